"""Sentence scores used during selection from a class-tree node.

Three per-sentence signals are combined:

* commonality/specificity: how close a sentence sits to the centroid of the
  node's own documents, blended with how far it sits from the centroid of
  the documents outside the node;
* non-redundancy: one minus the highest similarity to anything already
  selected;
* position: an exponential decay in the sentence's 1-based position within
  its document, floored at 0.5.

Cosines are clamped to [0, 1] before entering the formulas so every score is
bounded in [0, 1] for arbitrary embedding providers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embedding import Vector, cosine_similarity


@dataclass(frozen=True)
class Hyperparams:
    """Tunable weights of the pipeline.

    ``delta`` balances in-node similarity against out-of-node dissimilarity;
    ``alpha``/``beta``/``gamma`` weight the commonality-specificity,
    non-redundancy and position scores and must sum to 1. ``k_first`` is the
    cluster count for the tree's second layer, ``k_rest`` for deeper layers.
    """

    delta: float = 0.9
    alpha: float = 0.8
    beta: float = 0.1
    gamma: float = 0.1
    k_first: int = 3
    k_rest: int = 2

    def __post_init__(self) -> None:
        for name in ("delta", "alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if abs(self.alpha + self.beta + self.gamma - 1.0) > 1e-9:
            raise ValueError("alpha + beta + gamma must equal 1")
        if self.k_first < 2 or self.k_rest < 2:
            raise ValueError("cluster counts must be >= 2")


@dataclass(frozen=True)
class NodeCentroids:
    """Mean vectors of a node's members and (when any) of its complement."""

    inside: Vector
    outside: Vector | None


def node_centroids(member_keys: Iterable[str], universe: Mapping[str, Vector]) -> NodeCentroids:
    """Centroids for a node given the full key -> vector universe.

    ``outside`` is None exactly when the node covers the whole universe
    (e.g. the root node).
    """
    members = set(member_keys)
    inside_vecs = [universe[key] for key in universe if key in members]
    outside_vecs = [universe[key] for key in universe if key not in members]
    if not inside_vecs:
        raise ValueError("node has no members")
    inside = np.stack(inside_vecs).mean(axis=0)
    outside = np.stack(outside_vecs).mean(axis=0) if outside_vecs else None
    return NodeCentroids(inside=inside, outside=outside)


def _clamped_sim(a: Vector, b: Vector) -> float:
    return min(1.0, max(0.0, cosine_similarity(a, b)))


def score_cs(sentence_vec: Vector, centroids: NodeCentroids, delta: float) -> float:
    """Commonality-specificity score of a sentence within a node.

    ``delta * sim(s, inside) + (1 - delta) * (1 - sim(s, outside))``. When the
    node has no complement the dissimilarity factor is defined as 1, which
    adds the same constant to every sentence and leaves the ranking purely
    about commonality.
    """
    inside_term = _clamped_sim(sentence_vec, centroids.inside)
    if centroids.outside is None:
        outside_term = 1.0
    else:
        outside_term = 1.0 - _clamped_sim(sentence_vec, centroids.outside)
    value = delta * inside_term + (1.0 - delta) * outside_term
    return min(1.0, max(0.0, value))


def score_nr(sentence_vec: Vector, selected: Sequence[Vector]) -> float:
    """Non-redundancy: 1 minus the highest similarity to selected sentences.

    Returns 1.0 when nothing has been selected yet.
    """
    if not selected:
        return 1.0
    worst = max(_clamped_sim(sentence_vec, prev) for prev in selected)
    return 1.0 - worst


def score_position(position_1based: int, doc_sentence_count: int) -> float:
    """Position score ``max(0.5, exp(-position / cbrt(doc_length)))``.

    Highest for the first sentence of a document, decaying toward a floor of
    0.5 a few sentences in.
    """
    if position_1based < 1 or doc_sentence_count < 1:
        raise ValueError("position and document length must be >= 1")
    return max(0.5, math.exp(-position_1based / doc_sentence_count ** (1.0 / 3.0)))


def score_final(cs: float, nr: float, pos: float, hp: Hyperparams) -> float:
    """Convex combination ``alpha*cs + beta*nr + gamma*pos``."""
    return hp.alpha * cs + hp.beta * nr + hp.gamma * pos
