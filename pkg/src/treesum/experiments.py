"""Ablation and hyperparameter-tuning harnesses.

``run_ablation`` scores every method on the same corpus and embeddings, so
the comparison isolates the method. ``run_grid_search`` sweeps the scoring
hyperparameters over a lattice of all weight triples on the 0.1-step simplex
(66 of them), the 11 values of delta, and the candidate cluster counts,
which makes 2178 configurations for the full sweep.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from .corpus import Corpus
from .embedding import EmbeddedCorpus
from .pipeline import resolve_max_nodes, summarize_corpus
from .rouge import RougeReport, RougeScore, evaluate_corpus
from .scoring import Hyperparams
from .selection import Budget, select_summary
from .tree import build_class_tree, derive_seed
from .variants import METHODS, VariantSpec


@dataclass(frozen=True)
class AblationRow:
    method: str
    seed: int
    scores: dict[str, RougeScore]


def run_ablation(
    corpus: Corpus,
    embedded: EmbeddedCorpus,
    hp: Hyperparams,
    budget: Budget,
    seed: int,
    metrics: Sequence[str],
    report_kind: str,
    max_nodes: int | None = None,
    workers: int = 1,
    methods: Sequence[str] = METHODS,
) -> list[AblationRow]:
    """Evaluate every method on the same inputs; one row per method."""
    cap = resolve_max_nodes(corpus, budget, max_nodes)
    rows = []
    for method in methods:
        spec = VariantSpec(kind=method, hp=hp, budget=budget, seed=seed)
        summaries = summarize_corpus(corpus, embedded, spec, cap, workers=workers)
        report = evaluate_corpus(
            {tid: s.text for tid, s in summaries.items()},
            corpus,
            budget,
            metrics=metrics,
            report_kind=report_kind,
        )
        rows.append(AblationRow(method=method, seed=seed, scores=dict(report.mean)))
    return rows


def ablation_csv(rows: Sequence[AblationRow], metrics: Sequence[str]) -> str:
    lines = ["method,seed,metric,recall,precision,f1"]
    for row in rows:
        for metric in metrics:
            s = row.scores[metric]
            lines.append(
                f"{row.method},{row.seed},{metric},{s.recall:.6f},{s.precision:.6f},{s.f1:.6f}"
            )
    return "\n".join(lines) + "\n"


def ablation_table(rows: Sequence[AblationRow], metrics: Sequence[str], report_kind: str) -> str:
    header = ["method"] + [f"{m}-{report_kind}" for m in metrics]
    body = []
    for row in rows:
        values = [
            row.scores[m].recall if report_kind == "recall" else row.scores[m].f1
            for m in metrics
        ]
        body.append([row.method] + [f"{v:.4f}" for v in values])
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) for i in range(len(header))]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    out = [fmt.format(*header)]
    out.extend(fmt.format(*row) for row in body)
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class GridPoint:
    delta: float
    alpha: float
    beta: float
    gamma: float
    k: int


@dataclass(frozen=True)
class GridResult:
    point: GridPoint
    objective: float


def simplex_triples(step: float = 0.1) -> list[tuple[float, float, float]]:
    """All (alpha, beta, gamma) with the given step that sum to 1.

    Enumerated over the integer lattice so members are exact multiples of
    the step; at step 0.1 there are 66 triples.
    """
    n = round(1.0 / step)
    triples = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            triples.append((i / n, j / n, (n - i - j) / n))
    return triples


def full_grid(
    deltas: Sequence[float] | None = None,
    weight_triples: Sequence[tuple[float, float, float]] | None = None,
    ks: Sequence[int] | None = None,
) -> list[GridPoint]:
    """The hyperparameter lattice, optionally restricted per axis.

    Defaults: delta in {0.0, 0.1, ..., 1.0}, all 0.1-step weight triples,
    and cluster counts 2..4: 11 x 66 x 3 = 2178 points.
    """
    if deltas is None:
        deltas = [i / 10 for i in range(11)]
    if weight_triples is None:
        weight_triples = simplex_triples(0.1)
    if ks is None:
        ks = [2, 3, 4]
    points = []
    for delta in deltas:
        for alpha, beta, gamma in weight_triples:
            for k in ks:
                points.append(GridPoint(delta=delta, alpha=alpha, beta=beta, gamma=gamma, k=k))
    if not points:
        raise ValueError("empty hyperparameter grid")
    return points


def run_grid_search(
    corpus: Corpus,
    embedded: EmbeddedCorpus,
    budget: Budget,
    grid: Sequence[GridPoint],
    seed: int,
    objective_metric: str = "r1",
    report_kind: str = "recall",
    base_hp: Hyperparams | None = None,
    max_nodes: int | None = None,
    workers: int = 1,
) -> tuple[GridResult, list[GridResult]]:
    """Score every grid point and return (best, all results).

    The objective is the corpus-mean value of one metric (recall or f1 per
    ``report_kind``) for the full pipeline. Ties go to the lexicographically
    smallest (delta, alpha, beta, gamma, k). Class trees depend only on the
    cluster count, not on the scoring weights, so they are built once per k
    and shared across all weight combinations; results are identical to
    running each configuration standalone.
    """
    if not grid:
        raise ValueError("empty hyperparameter grid")
    base = base_hp or Hyperparams()
    cap = resolve_max_nodes(corpus, budget, max_nodes)

    trees_by_k: dict[int, dict[str, object]] = {}
    for k in sorted({point.k for point in grid}):
        trees_by_k[k] = {
            topic.topic_id: build_class_tree(
                list(embedded.doc_vectors_for(topic).items()),
                k,
                base.k_rest,
                cap,
                derive_seed(seed, f"topic:{topic.topic_id}"),
            )
            for topic in corpus
        }

    topics = list(corpus)

    def point_summaries(trees, hp) -> dict[str, str]:
        def one(topic):
            return select_summary(
                trees[topic.topic_id], topic, embedded, hp, budget, scoring_mode="final"
            ).text

        if workers <= 1:
            texts = [one(t) for t in topics]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                texts = list(pool.map(one, topics))
        return {t.topic_id: text for t, text in zip(topics, texts)}

    results = []
    for point in grid:
        hp = replace(
            base,
            delta=point.delta,
            alpha=point.alpha,
            beta=point.beta,
            gamma=point.gamma,
            k_first=point.k,
        )
        summaries = point_summaries(trees_by_k[point.k], hp)
        report: RougeReport = evaluate_corpus(
            summaries,
            corpus,
            budget,
            metrics=[objective_metric],
            report_kind=report_kind,
        )
        results.append(GridResult(point=point, objective=report.headline(objective_metric)))
    best = min(
        results,
        key=lambda r: (
            -r.objective,
            r.point.delta,
            r.point.alpha,
            r.point.beta,
            r.point.gamma,
            r.point.k,
        ),
    )
    return best, results


def grid_csv(results: Sequence[GridResult], objective_metric: str, report_kind: str) -> str:
    lines = [f"delta,alpha,beta,gamma,k,{objective_metric}_{report_kind}"]
    for r in results:
        p = r.point
        lines.append(f"{p.delta},{p.alpha},{p.beta},{p.gamma},{p.k},{r.objective:.6f}")
    return "\n".join(lines) + "\n"
