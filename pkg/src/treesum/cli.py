"""Command-line entry point.

Four subcommands cover the pipeline end to end:

* ``summarize``: corpus in, one summary per topic out.
* ``evaluate``: score summaries (given or freshly generated) against the
  corpus' reference summaries.
* ``ablate``: run every method on the same corpus and print the comparison
  table.
* ``tune``: grid-search the scoring hyperparameters on a held-out corpus.

Flags can also be given through ``--config FILE`` (flat ``key = value``
lines); explicit flags win. Exit codes: 0 on success, 2 for input or
configuration errors, 3 for embedding-provider errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import (
    ConfigError,
    RunConfig,
    config_from_mapping,
    load_config_file,
    write_config,
)
from .corpus import Corpus, CorpusError, load_corpus
from .embedding import EmbeddedCorpus, ProviderError, embed_corpus
from .experiments import (
    ablation_csv,
    ablation_table,
    full_grid,
    grid_csv,
    run_ablation,
    run_grid_search,
)
from .pipeline import resolve_max_nodes, summarize_corpus
from .rouge import EvaluationError, evaluate_corpus
from .tree import build_class_tree, derive_seed, tree_to_dict
from .variants import VariantSpec


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file; flags override it")
    parser.add_argument("--input", help="corpus root directory or JSONL file")
    parser.add_argument("--layout", choices=["topic-dirs", "jsonl"])
    parser.add_argument(
        "--method",
        choices=["ours-final", "ours-cs", "comp1", "comp2", "comp3", "comp4"],
    )
    budget = parser.add_mutually_exclusive_group()
    budget.add_argument("--budget-words", type=int, metavar="N")
    budget.add_argument("--budget-bytes", type=int, metavar="N")
    parser.add_argument("--embedder", help="file:PATH, builtin:DIM or remote:URL")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--k-first", type=int)
    parser.add_argument("--k-rest", type=int)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--max-nodes", type=int)
    parser.add_argument("--metrics", help="comma list from r1,r2,rl,rsu4")
    parser.add_argument("--report", choices=["recall", "f1"])
    parser.add_argument("--out")
    parser.add_argument("--workers", type=int)


_FLAG_TO_KEY = {
    "input": "input",
    "layout": "layout",
    "method": "method",
    "budget_words": "budget-words",
    "budget_bytes": "budget-bytes",
    "embedder": "embedder",
    "seed": "seed",
    "k_first": "k-first",
    "k_rest": "k-rest",
    "delta": "delta",
    "alpha": "alpha",
    "beta": "beta",
    "gamma": "gamma",
    "max_nodes": "max-nodes",
    "metrics": "metrics",
    "report": "report",
    "out": "out",
    "workers": "workers",
}


def _build_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, str] = {}
    if args.config:
        values.update(load_config_file(args.config))
    for flag, key in _FLAG_TO_KEY.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[key] = str(value)
    config = config_from_mapping(values)
    if not config.input:
        raise ConfigError("no corpus given; pass --input or set it in the config file")
    return config


def _load_and_embed(config: RunConfig) -> tuple[Corpus, EmbeddedCorpus]:
    corpus = load_corpus(config.input, config.layout)
    provider = config.make_provider(corpus)
    return corpus, embed_corpus(corpus, provider)


def _generate_summaries(config: RunConfig, corpus: Corpus, embedded: EmbeddedCorpus):
    spec = VariantSpec(
        kind=config.method, hp=config.hyperparams(), budget=config.budget(), seed=config.seed
    )
    cap = resolve_max_nodes(corpus, config.budget(), config.max_nodes)
    if config.k_first > max(2, cap - 1):
        print(
            f"warning: k-first {config.k_first} exceeds the estimated sentence budget "
            f"({cap} nodes); second-layer nodes beyond the budget never contribute sentences",
            file=sys.stderr,
        )
    return summarize_corpus(corpus, embedded, spec, cap, workers=config.workers)


def _dump_trees(config: RunConfig, corpus: Corpus, embedded: EmbeddedCorpus, out_dir: Path) -> None:
    cap = resolve_max_nodes(corpus, config.budget(), config.max_nodes)
    hp = config.hyperparams()
    dumps = {}
    for topic in corpus:
        seed = derive_seed(config.seed, f"topic:{topic.topic_id}")
        tree = build_class_tree(
            list(embedded.doc_vectors_for(topic).items()), hp.k_first, hp.k_rest, cap, seed
        )
        dumps[topic.topic_id] = tree_to_dict(tree)
    (out_dir / "trees.json").write_text(json.dumps(dumps, indent=2), encoding="utf-8")


def cmd_summarize(args: argparse.Namespace) -> int:
    config = _build_config(args)
    corpus, embedded = _load_and_embed(config)
    summaries = _generate_summaries(config, corpus, embedded)

    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_config(config, out_dir)

    if args.format == "jsonl":
        with (out_dir / "summaries.jsonl").open("w", encoding="utf-8") as handle:
            for topic_id, summary in summaries.items():
                record = {
                    "topic_id": topic_id,
                    "summary": summary.text,
                    "sentences": [
                        {
                            "text": s.text,
                            "node_id": s.node_id,
                            "doc_id": s.doc_id,
                            "position": s.position_1based,
                        }
                        for s in summary.sentences
                    ],
                }
                handle.write(json.dumps(record) + "\n")
    else:
        for topic_id, summary in summaries.items():
            (out_dir / f"{topic_id}.txt").write_text(summary.text + "\n", encoding="utf-8")

    if args.dump_trees:
        _dump_trees(config, corpus, embedded, out_dir)
    print(f"wrote {len(summaries)} summaries to {out_dir}")
    return 0


def _read_summaries(path: str) -> dict[str, str]:
    source = Path(path)
    if source.is_dir():
        summaries = {
            p.stem: p.read_text(encoding="utf-8").strip()
            for p in sorted(source.glob("*.txt"))
        }
        if not summaries:
            raise EvaluationError(f"no *.txt summaries found under {source}")
        return summaries
    if source.is_file():
        summaries = {}
        with source.open(encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                summaries[record["topic_id"]] = record["summary"]
        if not summaries:
            raise EvaluationError(f"no summary records found in {source}")
        return summaries
    raise EvaluationError(f"summaries path {source} does not exist")


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _build_config(args)
    corpus, embedded = (None, None)
    if args.summaries:
        corpus = load_corpus(config.input, config.layout)
        summaries = _read_summaries(args.summaries)
    else:
        corpus, embedded = _load_and_embed(config)
        summaries = {tid: s.text for tid, s in _generate_summaries(config, corpus, embedded).items()}

    report = evaluate_corpus(
        summaries, corpus, config.budget(), metrics=config.metrics, report_kind=config.report
    )
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_config(config, out_dir)
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    table = report.to_text_table()
    (out_dir / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    config = _build_config(args)
    corpus, embedded = _load_and_embed(config)
    rows = run_ablation(
        corpus,
        embedded,
        config.hyperparams(),
        config.budget(),
        config.seed,
        metrics=config.metrics,
        report_kind=config.report,
        max_nodes=config.max_nodes,
        workers=config.workers,
    )
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_config(config, out_dir)
    (out_dir / "ablation.csv").write_text(ablation_csv(rows, config.metrics), encoding="utf-8")
    table = ablation_table(rows, config.metrics, config.report)
    (out_dir / "ablation.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return 0


def _parse_grid_args(args: argparse.Namespace):
    deltas = None
    if args.deltas:
        deltas = [float(v) for v in args.deltas.split(",") if v.strip()]
    ks = None
    if args.ks:
        ks = [int(v) for v in args.ks.split(",") if v.strip()]
    triples = None
    if args.weights:
        triples = []
        for chunk in args.weights.split(";"):
            parts = [float(v) for v in chunk.split(",")]
            if len(parts) != 3:
                raise ConfigError(f"--weights triple must have 3 values, got {chunk!r}")
            triples.append((parts[0], parts[1], parts[2]))
    return deltas, triples, ks


def cmd_tune(args: argparse.Namespace) -> int:
    config = _build_config(args)
    corpus, embedded = _load_and_embed(config)
    deltas, triples, ks = _parse_grid_args(args)
    try:
        grid = full_grid(deltas=deltas, weight_triples=triples, ks=ks)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    best, results = run_grid_search(
        corpus,
        embedded,
        config.budget(),
        grid,
        seed=config.seed,
        objective_metric=args.objective,
        report_kind=config.report,
        base_hp=config.hyperparams(),
        max_nodes=config.max_nodes,
        workers=config.workers,
    )
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_config(config, out_dir)
    (out_dir / "grid.csv").write_text(
        grid_csv(results, args.objective, config.report), encoding="utf-8"
    )
    p = best.point
    best_text = (
        f"delta = {p.delta}\nalpha = {p.alpha}\nbeta = {p.beta}\ngamma = {p.gamma}\n"
        f"k-first = {p.k}\nobjective = {best.objective:.6f}\n"
    )
    (out_dir / "best.txt").write_text(best_text, encoding="utf-8")
    print(
        f"best: delta={p.delta} alpha={p.alpha} beta={p.beta} gamma={p.gamma} "
        f"k={p.k} ({args.objective} {config.report} {best.objective:.4f}; "
        f"{len(results)} configurations)"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treesum",
        description="Extractive multi-document summarization over a class tree of documents.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sum = sub.add_parser("summarize", help="write one summary per topic")
    _add_common_flags(p_sum)
    p_sum.add_argument("--format", choices=["files", "jsonl"], default="files")
    p_sum.add_argument("--dump-trees", action="store_true", help="also write trees.json")
    p_sum.set_defaults(func=cmd_summarize)

    p_eval = sub.add_parser("evaluate", help="ROUGE-score summaries against references")
    _add_common_flags(p_eval)
    p_eval.add_argument("--summaries", help="directory of <topic_id>.txt files or a summaries JSONL")
    p_eval.set_defaults(func=cmd_evaluate)

    p_abl = sub.add_parser("ablate", help="compare all methods on one corpus")
    _add_common_flags(p_abl)
    p_abl.set_defaults(func=cmd_ablate)

    p_tune = sub.add_parser("tune", help="grid-search scoring hyperparameters")
    _add_common_flags(p_tune)
    p_tune.add_argument("--objective", default="r1", choices=["r1", "r2", "rl", "rsu4"])
    p_tune.add_argument("--deltas", help="comma list restricting the delta axis")
    p_tune.add_argument("--ks", help="comma list restricting the cluster-count axis")
    p_tune.add_argument("--weights", help="semicolon-separated alpha,beta,gamma triples")
    p_tune.set_defaults(func=cmd_tune)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, CorpusError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ProviderError as exc:
        print(f"embedding provider error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
