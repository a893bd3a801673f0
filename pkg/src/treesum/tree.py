"""Class-tree construction by top-down k-means over keyed vectors.

The root node holds every item (normally the documents of one topic; the
sentence-clustering variant feeds sentences instead). Each layer splits the
nodes of the previous layer with k-means until either no node can be divided
any further or the tree already holds as many nodes as the summary needs
sentences.

Everything here is deterministic: k-means uses k-means++ seeding from an
explicit seed, restarts select the best inertia, and all orderings are total.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

Vector = np.ndarray

_SEED_MASK = 0xFFFFFFFFFFFFFFFF


def derive_seed(master_seed: int, label: str) -> int:
    """Stable 63-bit seed derived from a master seed and a text label.

    Used to give each topic (and each tree node) its own random stream, so
    adding or removing topics never perturbs the others.
    """
    payload = f"{master_seed & _SEED_MASK}:{label}".encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little") >> 1


@dataclass
class KMeansResult:
    labels: np.ndarray  # (n,) cluster index per input vector
    centroids: np.ndarray  # (k, dim)
    inertia: float


@dataclass
class ClassTreeNode:
    node_id: int
    layer: int  # 1 = root
    member_keys: tuple[str, ...]  # ordered by item index
    min_member_index: int
    children: list["ClassTreeNode"] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.member_keys)


@dataclass
class ClassTree:
    root: ClassTreeNode
    node_count: int
    traversal_order: tuple[int, ...]
    nodes: dict[int, ClassTreeNode]

    def node(self, node_id: int) -> ClassTreeNode:
        return self.nodes[node_id]


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    closest = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers[j] = points[idx]
        closest = np.minimum(closest, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator, max_iters: int) -> np.ndarray | None:
    n = points.shape[0]
    centroids = _kmeans_pp_init(points, k, rng)
    labels = np.full(n, -1)
    for _ in range(max_iters):
        dists = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = dists.argmin(axis=1)
        counts = np.bincount(new_labels, minlength=k)
        # Repair empty clusters by donating the farthest point from a
        # cluster that can spare one.
        for j in np.flatnonzero(counts == 0):
            donors = np.flatnonzero(counts[new_labels] > 1)
            if donors.size == 0:
                return None
            point_dists = dists[donors, new_labels[donors]]
            donor = donors[int(point_dists.argmax())]
            counts[new_labels[donor]] -= 1
            new_labels[donor] = j
            counts[j] += 1
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = np.stack([points[labels == j].mean(axis=0) for j in range(k)])
    if np.bincount(labels, minlength=k).min() == 0:
        return None
    return labels


def _refine_labels(points: np.ndarray, labels: np.ndarray, k: int, max_sweeps: int = 200) -> np.ndarray:
    """Single-point improvement sweeps after Lloyd converges.

    Lloyd stops at assignments that are centroid-stable but may still admit
    an objective-reducing move of one point; the exact change of moving
    point i from its cluster s to cluster j is
    ``n_j/(n_j+1) * d(i, c_j)^2 - n_s/(n_s-1) * d(i, c_s)^2``. Applying the
    best strictly-improving move per sweep is deterministic, terminates
    (the objective decreases each time) and never empties a cluster.
    """
    labels = labels.copy()
    for _ in range(max_sweeps):
        counts = np.bincount(labels, minlength=k).astype(float)
        centroids = np.stack([points[labels == j].mean(axis=0) for j in range(k)])
        best_move = None
        best_delta = -1e-12
        for i in range(len(points)):
            s = int(labels[i])
            if counts[s] <= 1:
                continue
            loss_off = counts[s] / (counts[s] - 1.0) * float(np.sum((points[i] - centroids[s]) ** 2))
            for j in range(k):
                if j == s:
                    continue
                gain_on = counts[j] / (counts[j] + 1.0) * float(np.sum((points[i] - centroids[j]) ** 2))
                delta = gain_on - loss_off
                if delta < best_delta:
                    best_delta = delta
                    best_move = (i, j)
        if best_move is None:
            return labels
        labels[best_move[0]] = best_move[1]
    return labels


def kmeans(
    vectors: Sequence[Vector],
    k: int,
    seed: int,
    restarts: int = 3,
    max_iters: int = 100,
) -> KMeansResult | None:
    """k-means with k-means++ seeding; best inertia over restarts.

    Each restart runs Lloyd iterations to convergence and then a
    deterministic single-point refinement pass, which escapes the
    centroid-stable local optima plain Lloyd gets stuck in on small inputs.

    Returns None when the input cannot be divided into k non-empty clusters:
    fewer distinct vectors than k, or an empty cluster that survives three
    re-seeded attempts. That is a signal, not a failure. The result is fully
    determined by (vectors, k, seed, restarts, max_iters).
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(vectors) == 0:
        raise ValueError("kmeans needs at least one vector")
    points = np.stack([np.asarray(v, dtype=float) for v in vectors])
    if np.unique(points, axis=0).shape[0] < k:
        return None
    seed = seed & _SEED_MASK
    for attempt in range(3):
        best: KMeansResult | None = None
        for restart in range(restarts):
            rng = np.random.default_rng([seed, attempt, restart])
            labels = _lloyd(points, k, rng, max_iters)
            if labels is None:
                continue
            labels = _refine_labels(points, labels, k)
            centroids = np.stack([points[labels == j].mean(axis=0) for j in range(k)])
            inertia = float(np.sum((points - centroids[labels]) ** 2))
            if best is None or inertia < best.inertia:
                best = KMeansResult(labels=labels, centroids=centroids, inertia=inertia)
        if best is not None:
            return best
    return None


def _ordered_children(groups: list[tuple[str, ...]], index_of: Mapping[str, int]) -> list[tuple[str, ...]]:
    return sorted(groups, key=lambda g: (-len(g), min(index_of[k] for k in g)))


def build_class_tree(
    items: Sequence[tuple[str, Vector]],
    k_first: int,
    k_rest: int,
    max_nodes: int,
    seed: int,
    restarts: int = 3,
    max_iters: int = 100,
) -> ClassTree:
    """Build the class tree for one topic's keyed vectors.

    The root (layer 1) holds every item. Layer 2 is built with ``k_first``
    clusters per node, deeper layers with ``k_rest``. Construction stops when
    a pass over the newest layer divides nothing, or as soon as the tree
    holds ``max_nodes`` nodes (checked before each split, so the total never
    exceeds ``max_nodes + max(k_first, k_rest) - 1``).

    Traversal order sorts nodes by layer ascending, then size descending,
    ties by the smallest contained item index.
    """
    if not items:
        raise ValueError("cannot build a tree over zero items")
    if k_first < 2 or k_rest < 2:
        raise ValueError("cluster counts must be >= 2")
    if max_nodes < 1:
        raise ValueError("max_nodes must be >= 1")

    keys = [key for key, _ in items]
    index_of = {key: i for i, key in enumerate(keys)}
    if len(index_of) != len(keys):
        raise ValueError("duplicate item keys")
    vectors = {key: np.asarray(vec, dtype=float) for key, vec in items}

    root = ClassTreeNode(node_id=0, layer=1, member_keys=tuple(keys), min_member_index=0)
    nodes: dict[int, ClassTreeNode] = {0: root}
    node_count = 1
    next_id = 1
    current_layer = [root]
    layer_no = 1
    stopped = False

    while current_layer and not stopped:
        k = k_first if layer_no == 1 else k_rest
        next_layer: list[ClassTreeNode] = []
        for node in sorted(current_layer, key=lambda n: (-n.size, n.min_member_index)):
            if node_count >= max_nodes:
                stopped = True
                break
            if node.size < 2:
                continue
            member_vectors = [vectors[key] for key in node.member_keys]
            result = kmeans(
                member_vectors,
                k,
                seed=derive_seed(seed, f"node:{node.node_id}"),
                restarts=restarts,
                max_iters=max_iters,
            )
            if result is None:
                continue
            groups: dict[int, list[str]] = {}
            for key, label in zip(node.member_keys, result.labels):
                groups.setdefault(int(label), []).append(key)
            ordered = _ordered_children([tuple(g) for g in groups.values()], index_of)
            for group in ordered:
                child = ClassTreeNode(
                    node_id=next_id,
                    layer=layer_no + 1,
                    member_keys=group,
                    min_member_index=min(index_of[key] for key in group),
                )
                node.children.append(child)
                nodes[next_id] = child
                next_layer.append(child)
                next_id += 1
                node_count += 1
        if not next_layer:
            break
        current_layer = next_layer
        layer_no += 1

    order = sorted(nodes.values(), key=lambda n: (n.layer, -n.size, n.min_member_index))
    return ClassTree(
        root=root,
        node_count=node_count,
        traversal_order=tuple(n.node_id for n in order),
        nodes=nodes,
    )


def estimate_sentence_budget(avg_target_summary_words: float, avg_source_sentence_words: float) -> float:
    """How many sentences a summary of the target length roughly needs.

    Average target summary length divided by the average sentence length of
    the source documents. Used to default the node-count cap and to sanity
    bound the first-layer cluster count.
    """
    if avg_target_summary_words <= 0 or avg_source_sentence_words <= 0:
        raise ValueError("lengths must be positive")
    return avg_target_summary_words / avg_source_sentence_words


def default_max_nodes(avg_target_summary_words: float, avg_source_sentence_words: float) -> int:
    return max(1, math.ceil(estimate_sentence_budget(avg_target_summary_words, avg_source_sentence_words)))


def tree_to_dict(tree: ClassTree) -> dict:
    """JSON-friendly rendering of a tree for debugging dumps."""
    position = {node_id: pos for pos, node_id in enumerate(tree.traversal_order)}
    return {
        "node_count": tree.node_count,
        "nodes": [
            {
                "node_id": node.node_id,
                "layer": node.layer,
                "size": node.size,
                "members": list(node.member_keys),
                "children": [c.node_id for c in node.children],
                "traversal_position": position[node.node_id],
            }
            for node in (tree.nodes[i] for i in tree.traversal_order)
        ],
    }
