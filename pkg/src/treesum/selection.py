"""Sentence selection over the class tree and summary assembly.

Selection walks the tree's traversal order (layer by layer, larger nodes
first) and takes at most one sentence per node per pass; passes repeat from
the top until the length budget is met or every sentence is used. The
sentence that crosses the budget is kept: evaluation-time truncation deals
with the overshoot. The final summary orders sentences by their node's
traversal position, then by the order they were picked.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .corpus import Topic
from .embedding import EmbeddedCorpus, Vector, document_key, sentence_key
from .scoring import Hyperparams, node_centroids, score_cs, score_final, score_nr, score_position
from .tree import ClassTree


@dataclass(frozen=True)
class Budget:
    """Summary length limit, counted in whitespace words or UTF-8 bytes."""

    unit: str  # "words" | "bytes"
    limit: int

    def __post_init__(self) -> None:
        if self.unit not in ("words", "bytes"):
            raise ValueError(f"unknown budget unit {self.unit!r}")
        if self.limit < 1:
            raise ValueError("budget limit must be >= 1")

    def size_of(self, ref: "SentenceRef") -> int:
        return ref.word_count if self.unit == "words" else ref.byte_length


@dataclass(frozen=True)
class SentenceRef:
    """Everything selection needs to know about one sentence."""

    key: str
    doc_id: str
    doc_index: int
    sent_index: int
    text: str
    word_count: int
    byte_length: int
    doc_sentence_count: int

    @property
    def position_1based(self) -> int:
        return self.sent_index + 1


@dataclass(frozen=True)
class SelectedSentence:
    ref: SentenceRef
    node_id: int
    iteration: int


@dataclass
class SelectionState:
    """Evolving state of one selection run."""

    selected: list[SelectedSentence] = field(default_factory=list)
    selected_vectors: list[Vector] = field(default_factory=list)
    consumed: int = 0
    iteration: int = 1


@dataclass(frozen=True)
class SummarySentence:
    text: str
    node_id: int
    doc_id: str
    doc_index: int
    sent_index: int
    iteration: int
    key: str

    @property
    def position_1based(self) -> int:
        return self.sent_index + 1


@dataclass(frozen=True)
class Summary:
    sentences: tuple[SummarySentence, ...]

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)


def sentence_refs(topic: Topic) -> list[SentenceRef]:
    """All sentences of a topic ordered by (doc_index, sent_index)."""
    refs = []
    for doc in topic.documents:
        for sent in doc.sentences:
            refs.append(
                SentenceRef(
                    key=sentence_key(topic.topic_id, doc.doc_index, sent.sent_index),
                    doc_id=doc.doc_id,
                    doc_index=doc.doc_index,
                    sent_index=sent.sent_index,
                    text=sent.text,
                    word_count=sent.word_count,
                    byte_length=sent.byte_length,
                    doc_sentence_count=len(doc.sentences),
                )
            )
    return refs


_KEY_RE = re.compile(r"/d(\d+)/s(\d+)$")


def break_ties(candidates: Sequence[tuple[str, float]]) -> str:
    """Pick the winning sentence key from (key, score) candidates.

    Highest score wins; exact ties fall back to the lower document index,
    then the lower sentence index, parsed from the key's ``/d<i>/s<k>``
    suffix.
    """
    if not candidates:
        raise ValueError("no candidates")

    def rank(item: tuple[str, float]):
        key, score = item
        match = _KEY_RE.search(key)
        if match is None:
            raise ValueError(f"malformed sentence key {key!r}")
        return (-score, int(match.group(1)), int(match.group(2)))

    return min(candidates, key=rank)[0]


ScoreFn = Callable[[int, SentenceRef, Sequence[Vector]], float]


def run_selection(
    groups: Sequence[tuple[int, Sequence[SentenceRef]]],
    score_fn: ScoreFn,
    vectors: Mapping[str, Vector],
    budget: Budget,
) -> SelectionState:
    """Round-robin selection engine shared by the tree pipeline and variants.

    ``groups`` lists (node_id, member sentences) in visiting order. Each pass
    takes the best-scoring unselected sentence from every group in turn;
    groups whose sentences are all taken are skipped. Selection stops the
    moment the budget is consumed (keeping the crossing sentence) or when a
    full pass selects nothing.
    """
    state = SelectionState()
    taken: set[str] = set()
    while True:
        picked_in_pass = False
        for node_id, members in groups:
            candidates = [m for m in members if m.key not in taken]
            if not candidates:
                continue
            best = None
            best_rank = None
            for ref in candidates:
                score = score_fn(node_id, ref, state.selected_vectors)
                rank = (-score, ref.doc_index, ref.sent_index)
                if best_rank is None or rank < best_rank:
                    best, best_rank = ref, rank
            assert best is not None
            taken.add(best.key)
            state.selected.append(SelectedSentence(ref=best, node_id=node_id, iteration=state.iteration))
            state.selected_vectors.append(vectors[best.key])
            state.consumed += budget.size_of(best)
            picked_in_pass = True
            if state.consumed >= budget.limit:
                return state
        if not picked_in_pass:
            return state
        state.iteration += 1


def order_summary(state: SelectionState, traversal_order: Sequence[int]) -> Summary:
    """Arrange selected sentences into the final summary order.

    Primary key: the originating node's position in the traversal order.
    Secondary key: the order in which sentences were selected, which keeps a
    node's first-pass sentence ahead of its later ones.
    """
    position = {node_id: pos for pos, node_id in enumerate(traversal_order)}
    ordered = sorted(
        enumerate(state.selected),
        key=lambda item: (position[item[1].node_id], item[0]),
    )
    sentences = tuple(
        SummarySentence(
            text=sel.ref.text,
            node_id=sel.node_id,
            doc_id=sel.ref.doc_id,
            doc_index=sel.ref.doc_index,
            sent_index=sel.ref.sent_index,
            iteration=sel.iteration,
            key=sel.ref.key,
        )
        for _, sel in ordered
    )
    return Summary(sentences=sentences)


def select_summary(
    tree: ClassTree,
    topic: Topic,
    embedded: EmbeddedCorpus,
    hp: Hyperparams,
    budget: Budget,
    scoring_mode: str = "final",
) -> Summary:
    """Select a summary for one topic from its document class tree.

    ``scoring_mode`` is ``"cs_only"`` to rank by the commonality-specificity
    score alone or ``"final"`` for the full three-way combination. The
    commonality and position scores are cached per (node, sentence); the
    non-redundancy score is recomputed at every step because it depends on
    what is already selected.
    """
    if scoring_mode not in ("cs_only", "final"):
        raise ValueError(f"unknown scoring mode {scoring_mode!r}")
    if tree.node_count < 1:
        raise ValueError("empty tree")

    refs = sentence_refs(topic)
    refs_by_doc_key: dict[str, list[SentenceRef]] = {}
    for ref in refs:
        refs_by_doc_key.setdefault(document_key(topic.topic_id, ref.doc_index), []).append(ref)

    doc_vectors = embedded.doc_vectors_for(topic)
    sent_vectors = embedded.sentence_vectors_for(topic)

    groups: list[tuple[int, Sequence[SentenceRef]]] = []
    centroids_by_node = {}
    for node_id in tree.traversal_order:
        node = tree.node(node_id)
        members: list[SentenceRef] = []
        for doc_key in node.member_keys:
            members.extend(refs_by_doc_key[doc_key])
        members.sort(key=lambda r: (r.doc_index, r.sent_index))
        groups.append((node_id, members))
        centroids_by_node[node_id] = node_centroids(node.member_keys, doc_vectors)

    cs_cache: dict[tuple[int, str], float] = {}
    pos_cache: dict[str, float] = {}

    def cached_cs(node_id: int, ref: SentenceRef) -> float:
        key = (node_id, ref.key)
        if key not in cs_cache:
            cs_cache[key] = score_cs(sent_vectors[ref.key], centroids_by_node[node_id], hp.delta)
        return cs_cache[key]

    def cached_pos(ref: SentenceRef) -> float:
        if ref.key not in pos_cache:
            pos_cache[ref.key] = score_position(ref.position_1based, ref.doc_sentence_count)
        return pos_cache[ref.key]

    if scoring_mode == "cs_only":
        def score_fn(node_id: int, ref: SentenceRef, selected: Sequence[Vector]) -> float:
            return cached_cs(node_id, ref)
    else:
        def score_fn(node_id: int, ref: SentenceRef, selected: Sequence[Vector]) -> float:
            nr = score_nr(sent_vectors[ref.key], selected)
            return score_final(cached_cs(node_id, ref), nr, cached_pos(ref), hp)

    state = run_selection(groups, score_fn, sent_vectors, budget)
    return order_summary(state, tree.traversal_order)
