"""Shared fixtures and independent oracles used across the test suite."""

from __future__ import annotations

from itertools import product
from typing import Mapping, Sequence

import numpy as np

from treesum.corpus import Corpus, CorpusError, Document, Topic, segment_sentences
from treesum.embedding import EmbeddedCorpus, embed_corpus, sentence_key


def make_document(doc_id: str, doc_index: int, text: str) -> Document:
    sentences = segment_sentences(text)
    if not sentences:
        raise CorpusError(f"fixture document {doc_id!r} has no sentences")
    return Document(doc_id=doc_id, doc_index=doc_index, sentences=tuple(sentences))


def make_topic(topic_id: str, doc_texts: Sequence[str], references: Sequence[str] = ()) -> Topic:
    docs = tuple(make_document(f"doc{i}", i, text) for i, text in enumerate(doc_texts))
    return Topic(topic_id=topic_id, documents=docs, references=tuple(references))


def make_corpus(*topics: Topic) -> Corpus:
    return Corpus(topics=tuple(topics))


class DictProvider:
    """Embedding provider backed by an explicit key -> vector mapping."""

    def __init__(self, vectors: Mapping[str, Sequence[float]]):
        self._vectors = {k: np.asarray(v, dtype=float) for k, v in vectors.items()}

    def embed(self, keys, texts):
        return [self._vectors[k] for k in keys]


def embed_with_vectors(corpus: Corpus, vectors: Mapping[str, Sequence[float]]) -> EmbeddedCorpus:
    return embed_corpus(corpus, DictProvider(vectors))


def skey(topic_id: str, doc_index: int, sent_index: int) -> str:
    return sentence_key(topic_id, doc_index, sent_index)


def brute_force_min_inertia(points: np.ndarray, k: int) -> float:
    """Exact minimum within-cluster sum of squares over all k-partitions.

    Enumerates every surjective label assignment; only feasible for small
    inputs (n <= 8 or so). Independent of the k-means implementation.
    """
    points = np.asarray(points, dtype=float)
    n = len(points)
    best = float("inf")
    for labels in product(range(k), repeat=n):
        if len(set(labels)) != k:
            continue
        labels_arr = np.asarray(labels)
        total = 0.0
        for j in range(k):
            cluster = points[labels_arr == j]
            centroid = cluster.mean(axis=0)
            total += float(np.sum((cluster - centroid) ** 2))
        if total < best:
            best = total
    return best


def random_synthetic_topic(rng: np.random.Generator, topic_id: str) -> tuple[Topic, dict]:
    """A topic with random cluster structure plus hand-assigned vectors.

    Documents get vectors near one of a few random cluster centers; each
    document holds 1-4 single-sentence paragraphs so sentence keys exist.
    Returns (topic, {sentence_key or doc placement -> vector}) where sentence
    vectors are small perturbations of their document's vector.
    """
    n_clusters = int(rng.integers(1, 4))
    docs_per_cluster = [int(rng.integers(1, 4)) for _ in range(n_clusters)]
    dim = int(rng.integers(2, 6))
    centers = rng.normal(size=(n_clusters, dim)) * 10.0

    doc_texts = []
    doc_vectors = []
    for c, n_docs in enumerate(docs_per_cluster):
        for _ in range(n_docs):
            n_sents = int(rng.integers(1, 5))
            words = [f"w{int(rng.integers(0, 50))}" for _ in range(n_sents * 4)]
            text = ". ".join(
                " ".join(words[i * 4 : (i + 1) * 4]) for i in range(n_sents)
            ) + "."
            doc_texts.append(text)
            doc_vectors.append(centers[c] + rng.normal(size=dim))

    topic = make_topic(topic_id, doc_texts)
    vectors: dict[str, np.ndarray] = {}
    for doc, base in zip(topic.documents, doc_vectors):
        for sent in doc.sentences:
            vectors[skey(topic_id, doc.doc_index, sent.sent_index)] = base + 0.01 * rng.normal(
                size=base.shape
            )
    return topic, vectors
