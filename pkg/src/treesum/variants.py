"""Comparison baselines behind the same summarize interface.

Four reduced pipelines isolate what the full approach adds:

* ``comp1`` ranks every sentence by similarity to the centroid of all
  documents: commonality only, no clustering.
* ``comp2`` clusters documents once (flat k-means) and picks the best
  commonality-specificity sentence per cluster, round-robin.
* ``comp3`` is comp2 but scores by similarity to the cluster centroid alone,
  ignoring what lies outside the cluster.
* ``comp4`` runs the full hierarchical pipeline over sentence vectors
  instead of document vectors.

``summarize_topic`` dispatches between these and the two main methods
(``ours_cs``, ``ours_final``). All variants share the selection engine, so
budget semantics and the no-duplicate rule are identical everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .corpus import Topic
from .embedding import EmbeddedCorpus, Vector, cosine_similarity, document_key
from .scoring import Hyperparams, NodeCentroids, node_centroids, score_cs
from .selection import Budget, SentenceRef, Summary, order_summary, run_selection, select_summary, sentence_refs
from .tree import build_class_tree, derive_seed, kmeans

METHODS = ("ours_final", "ours_cs", "comp1", "comp2", "comp3", "comp4")


@dataclass(frozen=True)
class VariantSpec:
    """A method choice plus everything needed to run it reproducibly."""

    kind: str
    hp: Hyperparams
    budget: Budget
    seed: int

    def __post_init__(self) -> None:
        kind = self.kind.replace("-", "_")
        if kind not in METHODS:
            raise ValueError(f"unknown method {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "ours_cs":
            object.__setattr__(self, "hp", replace(self.hp, alpha=1.0, beta=0.0, gamma=0.0))


def _clamped(value: float) -> float:
    return min(1.0, max(0.0, value))


def summarize_comp1(topic: Topic, embedded: EmbeddedCorpus, budget: Budget) -> Summary:
    """Rank all sentences against the global document centroid, no clustering.

    Sentences appear in the summary in score order.
    """
    doc_vectors = embedded.doc_vectors_for(topic)
    sent_vectors = embedded.sentence_vectors_for(topic)
    centroid = np.stack(list(doc_vectors.values())).mean(axis=0)
    refs = sentence_refs(topic)

    cache: dict[str, float] = {}

    def score_fn(node_id: int, ref: SentenceRef, selected: Sequence[Vector]) -> float:
        if ref.key not in cache:
            cache[ref.key] = _clamped(cosine_similarity(sent_vectors[ref.key], centroid))
        return cache[ref.key]

    state = run_selection([(0, refs)], score_fn, sent_vectors, budget)
    return order_summary(state, [0])


def _flat_document_clusters(
    topic: Topic, embedded: EmbeddedCorpus, k: int, seed: int
) -> list[tuple[int, list[str]]]:
    """One round of k-means over the topic's documents.

    Falls back to a single cluster when the documents cannot be divided.
    Clusters come back largest first, ties by lowest document index.
    """
    doc_vectors = embedded.doc_vectors_for(topic)
    keys = list(doc_vectors)
    result = kmeans([doc_vectors[key] for key in keys], k, seed=seed) if len(keys) >= 2 else None
    if result is None:
        return [(0, keys)]
    groups: dict[int, list[str]] = {}
    for key, label in zip(keys, result.labels):
        groups.setdefault(int(label), []).append(key)
    index_of = {key: i for i, key in enumerate(keys)}
    ordered = sorted(groups.values(), key=lambda g: (-len(g), min(index_of[k_] for k_ in g)))
    return [(i, group) for i, group in enumerate(ordered)]


def _select_from_clusters(
    topic: Topic,
    embedded: EmbeddedCorpus,
    clusters: Sequence[tuple[int, list[str]]],
    budget: Budget,
    delta: float | None,
) -> Summary:
    """Round-robin over flat document clusters.

    ``delta`` None means score by similarity to the cluster centroid alone;
    otherwise the full commonality-specificity blend is used.
    """
    doc_vectors = embedded.doc_vectors_for(topic)
    sent_vectors = embedded.sentence_vectors_for(topic)
    refs_by_doc_key: dict[str, list[SentenceRef]] = {}
    for ref in sentence_refs(topic):
        refs_by_doc_key.setdefault(document_key(topic.topic_id, ref.doc_index), []).append(ref)

    groups = []
    centroids: dict[int, NodeCentroids] = {}
    for cluster_id, member_doc_keys in clusters:
        members: list[SentenceRef] = []
        for doc_key in member_doc_keys:
            members.extend(refs_by_doc_key[doc_key])
        members.sort(key=lambda r: (r.doc_index, r.sent_index))
        groups.append((cluster_id, members))
        centroids[cluster_id] = node_centroids(member_doc_keys, doc_vectors)

    cache: dict[tuple[int, str], float] = {}

    def score_fn(cluster_id: int, ref: SentenceRef, selected: Sequence[Vector]) -> float:
        cache_key = (cluster_id, ref.key)
        if cache_key not in cache:
            if delta is None:
                cache[cache_key] = _clamped(
                    cosine_similarity(sent_vectors[ref.key], centroids[cluster_id].inside)
                )
            else:
                cache[cache_key] = score_cs(sent_vectors[ref.key], centroids[cluster_id], delta)
        return cache[cache_key]

    state = run_selection(groups, score_fn, sent_vectors, budget)
    return order_summary(state, [cluster_id for cluster_id, _ in groups])


def summarize_comp2(
    topic: Topic, embedded: EmbeddedCorpus, hp: Hyperparams, budget: Budget, seed: int
) -> Summary:
    """Flat document clusters scored with the commonality-specificity blend."""
    clusters = _flat_document_clusters(topic, embedded, hp.k_first, seed)
    return _select_from_clusters(topic, embedded, clusters, budget, hp.delta)


def summarize_comp3(
    topic: Topic, embedded: EmbeddedCorpus, hp: Hyperparams, budget: Budget, seed: int
) -> Summary:
    """Flat document clusters scored by in-cluster similarity only."""
    clusters = _flat_document_clusters(topic, embedded, hp.k_first, seed)
    return _select_from_clusters(topic, embedded, clusters, budget, None)


def summarize_comp4(
    topic: Topic,
    embedded: EmbeddedCorpus,
    hp: Hyperparams,
    budget: Budget,
    seed: int,
    max_nodes: int,
) -> Summary:
    """The hierarchical pipeline with sentences as the clustered unit.

    Nodes hold sentences; centroids are means of member sentence vectors and
    the complement centroid is the mean of the topic's other sentences.
    """
    sent_vectors = embedded.sentence_vectors_for(topic)
    refs_by_key = {ref.key: ref for ref in sentence_refs(topic)}
    items = [(key, vec) for key, vec in sent_vectors.items()]
    tree = build_class_tree(items, hp.k_first, hp.k_rest, max_nodes, seed)

    groups = []
    centroids = {}
    for node_id in tree.traversal_order:
        node = tree.node(node_id)
        members = sorted(
            (refs_by_key[key] for key in node.member_keys),
            key=lambda r: (r.doc_index, r.sent_index),
        )
        groups.append((node_id, members))
        centroids[node_id] = node_centroids(node.member_keys, sent_vectors)

    cache: dict[tuple[int, str], float] = {}

    def score_fn(node_id: int, ref: SentenceRef, selected: Sequence[Vector]) -> float:
        cache_key = (node_id, ref.key)
        if cache_key not in cache:
            cache[cache_key] = score_cs(sent_vectors[ref.key], centroids[node_id], hp.delta)
        return cache[cache_key]

    state = run_selection(groups, score_fn, sent_vectors, budget)
    return order_summary(state, tree.traversal_order)


def summarize_topic(
    topic: Topic,
    embedded: EmbeddedCorpus,
    spec: VariantSpec,
    max_nodes: int,
) -> Summary:
    """Run one method on one topic. Seeds are derived per topic from the
    spec's master seed, so results for a topic never depend on which other
    topics are in the corpus."""
    topic_seed = derive_seed(spec.seed, f"topic:{topic.topic_id}")
    hp, budget = spec.hp, spec.budget
    if spec.kind in ("ours_final", "ours_cs"):
        doc_vectors = embedded.doc_vectors_for(topic)
        tree = build_class_tree(list(doc_vectors.items()), hp.k_first, hp.k_rest, max_nodes, topic_seed)
        mode = "final" if spec.kind == "ours_final" else "cs_only"
        return select_summary(tree, topic, embedded, hp, budget, scoring_mode=mode)
    if spec.kind == "comp1":
        return summarize_comp1(topic, embedded, budget)
    if spec.kind == "comp2":
        return summarize_comp2(topic, embedded, hp, budget, topic_seed)
    if spec.kind == "comp3":
        return summarize_comp3(topic, embedded, hp, budget, topic_seed)
    if spec.kind == "comp4":
        return summarize_comp4(topic, embedded, hp, budget, topic_seed, max_nodes)
    raise ValueError(f"unknown method {spec.kind!r}")
