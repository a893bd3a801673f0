"""Self-contained ROUGE-1/2/L/SU4 evaluator.

Candidate summaries are compared against one or more reference summaries
with the settings conventional for length-budgeted news summarization:
lowercased alphanumeric tokenization, Porter stemming, truncation of the
candidate to the word or byte budget before scoring, and averaging of
per-reference scores when a topic has several references.

Metric ids are ``r1``, ``r2`` (clipped n-gram overlap), ``rl``
(summary-level union-LCS) and ``rsu4`` (skip-bigrams with at most four
intervening tokens, plus unigrams). Bootstrap confidence intervals are out
of scope; all values are point estimates.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, segment_sentences
from .selection import Budget
from .stem import porter_stem

METRIC_IDS = ("r1", "r2", "rl", "rsu4")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f1: float


def _prf(overlap: float, ref_total: float, cand_total: float) -> RougeScore:
    recall = overlap / ref_total if ref_total > 0 else 0.0
    precision = overlap / cand_total if cand_total > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return RougeScore(recall=recall, precision=precision, f1=f1)


def _average(scores: Sequence[RougeScore]) -> RougeScore:
    if not scores:
        raise ValueError("at least one reference summary is required")
    n = len(scores)
    return RougeScore(
        recall=sum(s.recall for s in scores) / n,
        precision=sum(s.precision for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
    )


def tokenize(text: str, stem: bool = False) -> list[str]:
    """Lowercase alphanumeric tokens, optionally Porter-stemmed."""
    tokens = _TOKEN_RE.findall(text.lower())
    if stem:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


def truncate(text: str, budget: Budget) -> str:
    """Cut a summary down to its budget, keeping whole tokens.

    Word budgets keep the first ``limit`` whitespace tokens. Byte budgets
    keep the longest token prefix whose total UTF-8 length, including the
    single joining spaces, stays within the limit.
    """
    tokens = text.split()
    if budget.unit == "words":
        return " ".join(tokens[: budget.limit])
    kept: list[str] = []
    used = 0
    for token in tokens:
        cost = len(token.encode("utf-8")) + (1 if kept else 0)
        if used + cost > budget.limit:
            break
        kept.append(token)
        used += cost
    return " ".join(kept)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _clipped_overlap(cand: Counter, ref: Counter) -> int:
    return sum(min(count, ref[gram]) for gram, count in cand.items() if gram in ref)


def rouge_n(candidate: str, references: Sequence[str], n: int, stem: bool = True) -> RougeScore:
    """Clipped n-gram overlap, averaged across references."""
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    cand_counts = _ngrams(tokenize(candidate, stem), n)
    cand_total = sum(cand_counts.values())
    per_ref = []
    for reference in references:
        ref_counts = _ngrams(tokenize(reference, stem), n)
        overlap = _clipped_overlap(cand_counts, ref_counts)
        per_ref.append(_prf(overlap, sum(ref_counts.values()), cand_total))
    return _average(per_ref)


def _lcs_match_positions(ref_tokens: Sequence[str], cand_tokens: Sequence[str]) -> set[int]:
    """Reference-token positions on one LCS alignment path."""
    m, n = len(ref_tokens), len(cand_tokens)
    if m == 0 or n == 0:
        return set()
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if ref_tokens[i - 1] == cand_tokens[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    positions: set[int] = set()
    i, j = m, n
    while i > 0 and j > 0:
        if ref_tokens[i - 1] == cand_tokens[j - 1]:
            positions.add(i - 1)
            i -= 1
            j -= 1
        elif table[i - 1][j] > table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    return positions


def _sentence_tokens(text: str, stem: bool) -> list[list[str]]:
    sentences = [tokenize(s.text, stem) for s in segment_sentences(text)]
    return [s for s in sentences if s]


def rouge_l(candidate: str, references: Sequence[str], stem: bool = True) -> RougeScore:
    """Summary-level longest-common-subsequence score.

    For each reference sentence, the match positions of its LCS with every
    candidate sentence are unioned; the union sizes are summed over reference
    sentences. Recall divides by the reference token count, precision by the
    candidate token count; per-reference scores are averaged.
    """
    cand_sents = _sentence_tokens(candidate, stem)
    cand_total = sum(len(s) for s in cand_sents)
    per_ref = []
    for reference in references:
        ref_sents = _sentence_tokens(reference, stem)
        ref_total = sum(len(s) for s in ref_sents)
        hits = 0
        for ref_sent in ref_sents:
            union: set[int] = set()
            for cand_sent in cand_sents:
                union |= _lcs_match_positions(ref_sent, cand_sent)
            hits += len(union)
        per_ref.append(_prf(hits, ref_total, cand_total))
    return _average(per_ref)


def _su4_counts(sentences: Sequence[Sequence[str]]) -> Counter:
    """Skip-bigrams with at most 4 intervening tokens, plus unigrams.

    Skip-bigrams never cross sentence boundaries; with zero allowed
    intervening tokens they would degenerate to ordinary bigrams.
    """
    counts: Counter = Counter()
    for tokens in sentences:
        for i, left in enumerate(tokens):
            counts[("u", left)] += 1
            for j in range(i + 1, min(i + 6, len(tokens))):
                counts[("sb", left, tokens[j])] += 1
    return counts


def rouge_su4(candidate: str, references: Sequence[str], stem: bool = True) -> RougeScore:
    """Skip-bigram(4) + unigram overlap, averaged across references."""
    cand_counts = _su4_counts(_sentence_tokens(candidate, stem))
    cand_total = sum(cand_counts.values())
    per_ref = []
    for reference in references:
        ref_counts = _su4_counts(_sentence_tokens(reference, stem))
        overlap = _clipped_overlap(cand_counts, ref_counts)
        per_ref.append(_prf(overlap, sum(ref_counts.values()), cand_total))
    return _average(per_ref)


_METRIC_FNS = {
    "r1": lambda cand, refs, stem: rouge_n(cand, refs, 1, stem),
    "r2": lambda cand, refs, stem: rouge_n(cand, refs, 2, stem),
    "rl": rouge_l,
    "rsu4": rouge_su4,
}


def score_all(
    candidate: str, references: Sequence[str], metrics: Sequence[str], stem: bool = True
) -> dict[str, RougeScore]:
    unknown = set(metrics) - set(METRIC_IDS)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    return {m: _METRIC_FNS[m](candidate, references, stem) for m in metrics}


@dataclass
class RougeReport:
    """Per-topic and corpus-averaged scores for the requested metrics."""

    metrics: tuple[str, ...]
    report_kind: str  # "recall" | "f1"
    per_topic: dict[str, dict[str, RougeScore]]
    mean: dict[str, RougeScore]

    def headline(self, metric: str) -> float:
        score = self.mean[metric]
        return score.recall if self.report_kind == "recall" else score.f1

    def to_csv(self) -> str:
        lines = ["topic_id,metric,recall,precision,f1"]
        for topic_id, scores in self.per_topic.items():
            for metric in self.metrics:
                s = scores[metric]
                lines.append(f"{topic_id},{metric},{s.recall:.6f},{s.precision:.6f},{s.f1:.6f}")
        for metric in self.metrics:
            s = self.mean[metric]
            lines.append(f"MEAN,{metric},{s.recall:.6f},{s.precision:.6f},{s.f1:.6f}")
        return "\n".join(lines) + "\n"

    def to_text_table(self) -> str:
        stat = self.report_kind
        header = ["topic_id"] + [f"{m}-{stat}" for m in self.metrics]
        rows = []
        for topic_id, scores in self.per_topic.items():
            values = [
                scores[m].recall if stat == "recall" else scores[m].f1 for m in self.metrics
            ]
            rows.append([topic_id] + [f"{v:.4f}" for v in values])
        mean_values = [
            self.mean[m].recall if stat == "recall" else self.mean[m].f1 for m in self.metrics
        ]
        rows.append(["MEAN"] + [f"{v:.4f}" for v in mean_values])
        widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
        fmt = "  ".join(f"{{:<{w}}}" for w in widths)
        out = [fmt.format(*header)]
        out.extend(fmt.format(*row) for row in rows)
        return "\n".join(out) + "\n"


class EvaluationError(Exception):
    """Raised when a corpus cannot be evaluated as requested."""


def evaluate_corpus(
    summaries: Mapping[str, str],
    corpus: Corpus | Iterable,
    budget: Budget,
    metrics: Sequence[str] = METRIC_IDS,
    report_kind: str = "recall",
    stem: bool = True,
) -> RougeReport:
    """Score one summary per topic against the topic's references.

    Summaries are truncated to the budget first. Every topic needs at least
    one reference and one summary; the corpus mean is the arithmetic mean
    over topics.
    """
    if report_kind not in ("recall", "f1"):
        raise ValueError(f"unknown report kind {report_kind!r}")
    per_topic: dict[str, dict[str, RougeScore]] = {}
    for topic in corpus:
        if not topic.references:
            raise EvaluationError(f"topic {topic.topic_id!r} has no reference summaries")
        if topic.topic_id not in summaries:
            raise EvaluationError(f"no summary provided for topic {topic.topic_id!r}")
        candidate = truncate(summaries[topic.topic_id], budget)
        per_topic[topic.topic_id] = score_all(candidate, list(topic.references), metrics, stem)
    if not per_topic:
        raise EvaluationError("corpus has no topics")
    mean = {
        m: _average([scores[m] for scores in per_topic.values()]) for m in metrics
    }
    return RougeReport(
        metrics=tuple(metrics), report_kind=report_kind, per_topic=per_topic, mean=mean
    )
