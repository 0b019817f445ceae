"""Shared flat-tree storage and prediction routing.

Trees are stored as parallel node arrays (struct-of-arrays). Leaves have
feature_index == -1 and child indices == -1; internal nodes route a sample
left iff x[feature_index] <= threshold. Parents always precede their children
in the arrays (preorder allocation), which importance extraction relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative tie band for split-quality comparisons. Candidates whose criteria
# differ by less than this (relative to the node's criterion scale) count as
# tied and resolve to the lowest feature index, then the lowest threshold,
# keeping split choices stable under float summation-order noise.
TIE_REL = 1e-9

LEAF = -1


@dataclass(eq=False)
class TreeNodes:
    """Flattened node arrays for one regression tree."""

    feature_index: np.ndarray  # int32; LEAF for leaves
    threshold: np.ndarray  # float64; 0.0 on leaves
    left: np.ndarray  # int32; LEAF on leaves
    right: np.ndarray  # int32; LEAF on leaves
    value: np.ndarray  # float64; leaf prediction, 0.0 on internal nodes
    n_samples: np.ndarray  # int64; training rows routed through the node

    @property
    def n_nodes(self) -> int:
        return self.feature_index.shape[0]

    def is_leaf(self, i: int) -> bool:
        return self.feature_index[i] == LEAF


class _TreeBuilder:
    """Accumulates nodes during growth; parents are allocated before children."""

    def __init__(self) -> None:
        self.feature_index: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.n_samples: list[int] = []

    def add_leaf(self, value: float, n_samples: int) -> int:
        return self._add(LEAF, 0.0, LEAF, LEAF, value, n_samples)

    def add_internal(self, feature: int, threshold: float, n_samples: int) -> int:
        return self._add(feature, threshold, LEAF, LEAF, 0.0, n_samples)

    def make_internal(self, node: int, feature: int, threshold: float) -> None:
        self.feature_index[node] = feature
        self.threshold[node] = threshold
        self.value[node] = 0.0

    def set_children(self, node: int, left: int, right: int) -> None:
        self.left[node] = left
        self.right[node] = right

    def _add(self, f: int, t: float, l: int, r: int, v: float, n: int) -> int:
        self.feature_index.append(f)
        self.threshold.append(t)
        self.left.append(l)
        self.right.append(r)
        self.value.append(v)
        self.n_samples.append(n)
        return len(self.feature_index) - 1

    def finish(self) -> TreeNodes:
        return TreeNodes(
            feature_index=np.array(self.feature_index, dtype=np.int32),
            threshold=np.array(self.threshold, dtype=float),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            value=np.array(self.value, dtype=float),
            n_samples=np.array(self.n_samples, dtype=np.int64),
        )


def predict_nodes(nodes: TreeNodes, values: np.ndarray) -> np.ndarray:
    """Route every row of ``values`` to a leaf and return the leaf values."""
    n = values.shape[0]
    cur = np.zeros(n, dtype=np.int64)
    feat = nodes.feature_index
    while True:
        f = feat[cur]
        active = f >= 0
        if not active.any():
            break
        rows = np.nonzero(active)[0]
        cur_active = cur[rows]
        go_left = values[rows, f[rows]] <= nodes.threshold[cur_active]
        cur[rows] = np.where(go_left, nodes.left[cur_active], nodes.right[cur_active])
    return nodes.value[cur]


def canonical_sum(values: np.ndarray) -> float:
    """Sum in value-sorted order: invariant to input row permutation."""
    return float(np.sort(values).sum())


def canonical_mean(values: np.ndarray) -> float:
    """Permutation-invariant mean that is exact on constant inputs."""
    ordered = np.sort(values)
    if ordered[0] == ordered[-1]:
        return float(ordered[0])
    return float(ordered.sum()) / ordered.size
