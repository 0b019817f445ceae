"""Exact CART regression tree: variance-reduction split search.

Every node exhaustively scans each candidate feature and every midpoint
between consecutive distinct sorted values, minimizing the summed within-child
squared error SSE(left) + SSE(right). Ties resolve to the lowest feature
index, then the lowest threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import FeatureMatrix, TargetVector
from .common import TIE_REL, TreeNodes, _TreeBuilder, canonical_mean


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = 8
    min_samples_leaf: int = 5


@dataclass(eq=False)
class TreeModel:
    """A fitted regression tree; immutable after fit."""

    nodes: TreeNodes
    params: TreeParams
    feature_names: tuple[str, ...]


def _node_sse(y: np.ndarray) -> float:
    # Summed squared deviation from the mean, accumulated in value-sorted
    # order so the result is invariant to training-row permutation.
    ys = np.sort(y)
    s = ys.sum()
    return max(float(np.dot(ys, ys) - s * s / ys.size), 0.0)


def _best_split_sse(
    values: np.ndarray,
    y: np.ndarray,
    idx: np.ndarray,
    min_samples_leaf: int,
    feature_indices,
) -> tuple[int, float] | None:
    """Best (feature, threshold) under the summed-SSE criterion, or None.

    Returns None when the node is pure or no candidate reduces the criterion
    beyond the tie band.
    """
    y_node = y[idx]
    n = idx.size
    if n < 2 * min_samples_leaf:
        return None
    ys_sorted = np.sort(y_node)
    if ys_sorted[0] == ys_sorted[-1]:
        return None
    total = ys_sorted.sum()
    total_sq = float(np.dot(ys_sorted, ys_sorted))
    node_sse = max(total_sq - total * total / n, 0.0)
    eps = TIE_REL * node_sse

    best_crit = np.inf
    best: tuple[int, float] | None = None
    for j in feature_indices:
        v = values[idx, j]
        order = np.lexsort((y_node, v))  # canonical (value, y) order
        vs = v[order]
        ys = y_node[order]
        cut = np.nonzero(vs[:-1] < vs[1:])[0]
        if min_samples_leaf > 1:
            cut = cut[(cut + 1 >= min_samples_leaf) & (n - cut - 1 >= min_samples_leaf)]
        if cut.size == 0:
            continue
        cs = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        n_left = cut + 1.0
        n_right = n - n_left
        s_left = cs[cut]
        sq_left = csq[cut]
        sse_left = np.maximum(sq_left - s_left * s_left / n_left, 0.0)
        sse_right = np.maximum(
            (total_sq - sq_left) - (total - s_left) ** 2 / n_right, 0.0
        )
        crit = sse_left + sse_right
        pos = int(np.argmin(crit))  # first minimum: lowest threshold wins
        if crit[pos] < best_crit - eps:
            best_crit = float(crit[pos])
            k = int(cut[pos])
            best = (int(j), float(0.5 * (vs[k] + vs[k + 1])))
    if best is None or best_crit >= node_sse - eps:
        return None
    return best


def grow_variance_tree(
    values: np.ndarray,
    y: np.ndarray,
    max_depth: int | None,
    min_samples_leaf: int,
    rng: np.random.Generator | None = None,
    n_sub_features: int | None = None,
) -> TreeNodes:
    """Grow a CART tree; optionally scan a random feature subset per node.

    When ``n_sub_features`` is given (and smaller than the column count) each
    node draws that many distinct features from ``rng`` and scans them in
    ascending index order, preserving the tie-break contract within the
    subset. Node visitation is a deterministic preorder DFS, so the draw
    sequence is reproducible for a given generator state.
    """
    n_cols = values.shape[1]
    builder = _TreeBuilder()
    root = builder.add_leaf(0.0, y.size)
    # Stack of (node_id, row_indices, depth); children pushed right-first so
    # the left subtree is built (and numbered) first.
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        y_node = y[idx]
        split = None
        if max_depth is None or depth < max_depth:
            if n_sub_features is not None and n_sub_features < n_cols:
                assert rng is not None
                features = np.sort(rng.choice(n_cols, size=n_sub_features, replace=False))
            else:
                features = range(n_cols)
            split = _best_split_sse(values, y, idx, min_samples_leaf, features)
        if split is None:
            builder.value[node] = canonical_mean(y_node)
            continue
        j, thr = split
        go_left = values[idx, j] <= thr
        left_idx = idx[go_left]
        right_idx = idx[~go_left]
        builder.make_internal(node, j, thr)
        left = builder.add_leaf(0.0, left_idx.size)
        right = builder.add_leaf(0.0, right_idx.size)
        builder.set_children(node, left, right)
        stack.append((right, right_idx, depth + 1))
        stack.append((left, left_idx, depth + 1))
    return builder.finish()


def fit_tree(
    X: FeatureMatrix,
    y: TargetVector,
    max_depth: int | None = 8,
    min_samples_leaf: int = 5,
) -> TreeModel:
    """Fit a regression tree by recursive binary variance-reduction splits."""
    if X.n_rows < 1:
        raise ValueError("cannot fit a tree on an empty matrix")
    if X.n_rows != len(y):
        raise ValueError(f"row mismatch: X has {X.n_rows}, y has {len(y)}")
    if min_samples_leaf < 1:
        raise ValueError(f"min_samples_leaf must be >= 1: {min_samples_leaf}")
    if max_depth is not None and max_depth < 0:
        raise ValueError(f"max_depth must be >= 0 or None: {max_depth}")
    nodes = grow_variance_tree(X.values, y.values, max_depth, min_samples_leaf)
    return TreeModel(
        nodes=nodes,
        params=TreeParams(max_depth=max_depth, min_samples_leaf=min_samples_leaf),
        feature_names=X.column_names,
    )
