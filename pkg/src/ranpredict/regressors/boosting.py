"""Gradient-boosted regression trees with second-order split gains.

Two variants share the same loss machinery (squared error, so per-sample
gradient g_i = pred_i - y_i and hessian h_i = 1):

* ``second_order``: exact greedy depth-wise growth scanning every midpoint
  between consecutive distinct feature values.
* ``histogram_leafwise``: equal-frequency histogram binning with best-first
  growth, always splitting the leaf with the globally largest positive gain
  until ``num_leaves`` is reached.

Both use the split gain
``0.5 * (G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam))`` and the leaf
weight ``-G/(H+lam)``; a split is kept only when its gain is positive.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..dataset import FeatureMatrix, TargetVector
from .common import TIE_REL, TreeNodes, _TreeBuilder, canonical_mean, canonical_sum, predict_nodes
from .tree import TreeModel, TreeParams

VARIANT_SECOND_ORDER = "second_order"
VARIANT_HISTOGRAM_LEAFWISE = "histogram_leafwise"


@dataclass(frozen=True)
class BoostParams:
    n_rounds: int = 200
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    max_depth: int | None = 8
    min_samples_leaf: int = 5
    seed: int = 0
    base_score: float | None = None  # override; defaults to mean(y) at fit time


@dataclass(frozen=True)
class LeafwiseParams:
    n_rounds: int = 200
    learning_rate: float = 0.1
    reg_lambda: float = 1.0
    num_leaves: int = 31
    n_bins: int = 64
    min_samples_leaf: int = 5
    seed: int = 0
    base_score: float | None = None


@dataclass(eq=False)
class BoostedModel:
    """A fitted boosted ensemble: prediction = base_score + lr * sum of trees."""

    base_score: float
    learning_rate: float
    trees: tuple[TreeModel, ...]
    variant: str
    params: BoostParams | LeafwiseParams
    feature_names: tuple[str, ...]


@dataclass(eq=False)
class Histogram:
    """Per-bin gradient/hessian aggregates over one feature column.

    ``bin_edges`` has one more entry than the bins and spans the training
    range; bin j covers (bin_edges[j], bin_edges[j+1]] except the first,
    which also includes its lower edge.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    sum_gradients: np.ndarray
    sum_hessians: np.ndarray


@dataclass(eq=False)
class _BinSpec:
    """Bin layout for one feature: value bounds and split thresholds."""

    uppers: np.ndarray  # max value in each bin
    lowers: np.ndarray  # min value in each bin
    thresholds: np.ndarray  # midpoint between adjacent bins; len = bins - 1


def _build_binspec(values: np.ndarray, n_bins: int) -> _BinSpec:
    svals = np.sort(values)
    n = svals.size
    distinct = np.unique(svals)
    if distinct.size <= n_bins:
        uppers = distinct
    else:
        pos = np.ceil(np.arange(1, n_bins + 1) * (n / n_bins)).astype(np.int64) - 1
        uppers = np.unique(svals[pos])
    lowers = np.empty_like(uppers)
    lowers[0] = svals[0]
    for j in range(1, uppers.size):
        lowers[j] = svals[np.searchsorted(svals, uppers[j - 1], side="right")]
    thresholds = 0.5 * (uppers[:-1] + lowers[1:])
    return _BinSpec(uppers=uppers, lowers=lowers, thresholds=thresholds)


def _bin_column(spec: _BinSpec, values: np.ndarray) -> np.ndarray:
    return np.searchsorted(spec.uppers, values, side="left").astype(np.int32)


def build_histogram(values, gradients, hessians, n_bins: int) -> Histogram:
    """Aggregate gradients/hessians into equal-frequency value bins.

    Bin edges sit at equal-frequency quantiles of ``values`` (duplicate edges
    merged, so n_bins is an upper bound). All-identical values collapse to a
    single bin.
    """
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2: {n_bins}")
    values = np.asarray(values, dtype=float)
    gradients = np.asarray(gradients, dtype=float)
    hessians = np.asarray(hessians, dtype=float)
    if not (values.shape == gradients.shape == hessians.shape) or values.ndim != 1:
        raise ValueError("values, gradients and hessians must be equal-length 1-D arrays")
    if values.size == 0:
        raise ValueError("cannot build a histogram from empty values")
    spec = _build_binspec(values, n_bins)
    bins = _bin_column(spec, values)
    k = spec.uppers.size
    return Histogram(
        bin_edges=np.concatenate(([spec.lowers[0]], spec.uppers)),
        counts=np.bincount(bins, minlength=k),
        sum_gradients=np.bincount(bins, weights=gradients, minlength=k),
        sum_hessians=np.bincount(bins, weights=hessians, minlength=k),
    )


def _gain_eps(g_node: np.ndarray, reg_lambda: float) -> float:
    # Tie/positivity band scaled to the node's largest possible score term.
    scale = 0.5 * float(np.abs(g_node).sum()) ** 2 / (g_node.size + reg_lambda)
    return TIE_REL * (1.0 + scale)


def _leaf_weight(g: np.ndarray, reg_lambda: float) -> float:
    return -canonical_sum(g) / (g.size + reg_lambda)


def _score(G, H, reg_lambda):
    return G * G / (H + reg_lambda)


def _grow_exact(
    values: np.ndarray,
    g: np.ndarray,
    reg_lambda: float,
    max_depth: int | None,
    min_samples_leaf: int,
) -> TreeNodes:
    """Depth-wise greedy growth over exact midpoint candidates."""
    n_cols = values.shape[1]
    builder = _TreeBuilder()
    root = builder.add_leaf(0.0, g.size)
    stack: list[tuple[int, np.ndarray, int]] = [(root, np.arange(g.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        g_node = g[idx]
        n = idx.size
        split = None
        if (max_depth is None or depth < max_depth) and n >= 2 * min_samples_leaf:
            eps = _gain_eps(g_node, reg_lambda)
            G = canonical_sum(g_node)
            parent_score = _score(G, float(n), reg_lambda)
            best_gain = 0.0
            for j in range(n_cols):
                v = values[idx, j]
                order = np.argsort(v)
                vs = v[order]
                gs = g_node[order]
                cut = np.nonzero(vs[:-1] < vs[1:])[0]
                if min_samples_leaf > 1:
                    cut = cut[(cut + 1 >= min_samples_leaf) & (n - cut - 1 >= min_samples_leaf)]
                if cut.size == 0:
                    continue
                cg = np.cumsum(gs)
                n_left = cut + 1.0
                g_left = cg[cut]
                gains = 0.5 * (
                    _score(g_left, n_left, reg_lambda)
                    + _score(G - g_left, n - n_left, reg_lambda)
                    - parent_score
                )
                pos = int(np.argmax(gains))  # first maximum: lowest threshold
                if gains[pos] > best_gain + eps:
                    best_gain = float(gains[pos])
                    k = int(cut[pos])
                    split = (int(j), float(0.5 * (vs[k] + vs[k + 1])))
            if best_gain <= eps:
                split = None
        if split is None:
            builder.value[node] = _leaf_weight(g_node, reg_lambda)
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


def _grow_leafwise(
    values: np.ndarray,
    binned: np.ndarray,
    specs: list[_BinSpec],
    g: np.ndarray,
    reg_lambda: float,
    num_leaves: int,
    min_samples_leaf: int,
) -> TreeNodes:
    """Best-first growth over histogram bin boundaries."""

    def best_split(idx: np.ndarray):
        g_node = g[idx]
        n = idx.size
        if n < 2 * min_samples_leaf:
            return None
        eps = _gain_eps(g_node, reg_lambda)
        G = float(g_node.sum())
        parent_score = _score(G, float(n), reg_lambda)
        best = None
        best_gain = 0.0
        for j, spec in enumerate(specs):
            if spec.thresholds.size == 0:
                continue
            b = binned[idx, j]
            k = spec.uppers.size
            counts = np.bincount(b, minlength=k)
            sum_g = np.bincount(b, weights=g_node, minlength=k)
            n_left = np.cumsum(counts)[:-1]
            g_left = np.cumsum(sum_g)[:-1]
            n_right = n - n_left
            valid = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
            if not valid.any():
                continue
            gains = 0.5 * (
                _score(g_left, n_left.astype(float), reg_lambda)
                + _score(G - g_left, n_right.astype(float), reg_lambda)
                - parent_score
            )
            gains[~valid] = -np.inf
            pos = int(np.argmax(gains))
            if gains[pos] > best_gain + eps:
                best_gain = float(gains[pos])
                best = (int(j), float(spec.thresholds[pos]))
        if best is None or best_gain <= eps:
            return None
        return best_gain, best[0], best[1]

    builder = _TreeBuilder()
    all_idx = np.arange(g.size)
    root = builder.add_leaf(_leaf_weight(g, reg_lambda), g.size)
    heap: list[tuple[float, int, int, np.ndarray, int, float]] = []
    counter = 0
    cand = best_split(all_idx)
    if cand is not None:
        heapq.heappush(heap, (-cand[0], counter, root, all_idx, cand[1], cand[2]))
        counter += 1
    n_leaves = 1
    while n_leaves < num_leaves and heap:
        _, _, node, idx, j, thr = heapq.heappop(heap)
        go_left = values[idx, j] <= thr
        left_idx = idx[go_left]
        right_idx = idx[~go_left]
        builder.make_internal(node, j, thr)
        left = builder.add_leaf(_leaf_weight(g[left_idx], reg_lambda), left_idx.size)
        right = builder.add_leaf(_leaf_weight(g[right_idx], reg_lambda), right_idx.size)
        builder.set_children(node, left, right)
        n_leaves += 1
        for child, child_idx in ((left, left_idx), (right, right_idx)):
            cand = best_split(child_idx)
            if cand is not None:
                heapq.heappush(heap, (-cand[0], counter, child, child_idx, cand[1], cand[2]))
                counter += 1
    return builder.finish()


def _is_noop_tree(nodes: TreeNodes) -> bool:
    return nodes.n_nodes == 1 and nodes.value[0] == 0.0


def _check_common(X: FeatureMatrix, y: TargetVector, n_rounds, learning_rate, reg_lambda,
                  min_samples_leaf) -> None:
    if X.n_rows < 1:
        raise ValueError("cannot fit on an empty matrix")
    if X.n_rows != len(y):
        raise ValueError(f"row mismatch: X has {X.n_rows}, y has {len(y)}")
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1: {n_rounds}")
    if not 0.0 < learning_rate <= 1.0:
        raise ValueError(f"learning_rate must be in (0, 1]: {learning_rate}")
    if reg_lambda < 0:
        raise ValueError(f"reg_lambda must be >= 0: {reg_lambda}")
    if min_samples_leaf < 1:
        raise ValueError(f"min_samples_leaf must be >= 1: {min_samples_leaf}")


def fit_boosted_second_order(
    X: FeatureMatrix,
    y: TargetVector,
    n_rounds: int = 200,
    learning_rate: float = 0.1,
    reg_lambda: float = 1.0,
    max_depth: int | None = 8,
    min_samples_leaf: int = 5,
    seed: int = 0,
    base_score: float | None = None,
) -> BoostedModel:
    """Boost exact greedy trees on gradient/hessian statistics.

    ``base_score`` defaults to mean(y). Rounds whose tree is a single
    zero-weight leaf contribute nothing and are not stored, so the tree list
    may be shorter than ``n_rounds``.
    """
    _check_common(X, y, n_rounds, learning_rate, reg_lambda, min_samples_leaf)
    params = BoostParams(
        n_rounds=n_rounds,
        learning_rate=learning_rate,
        reg_lambda=reg_lambda,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        seed=seed,
        base_score=base_score,
    )
    base = canonical_mean(y.values) if base_score is None else float(base_score)
    tree_params = TreeParams(max_depth=max_depth, min_samples_leaf=min_samples_leaf)
    pred = np.full(X.n_rows, base)
    trees = []
    for _ in range(n_rounds):
        g = pred - y.values
        nodes = _grow_exact(X.values, g, reg_lambda, max_depth, min_samples_leaf)
        if _is_noop_tree(nodes):
            continue
        trees.append(TreeModel(nodes=nodes, params=tree_params, feature_names=X.column_names))
        pred += learning_rate * predict_nodes(nodes, X.values)
    return BoostedModel(
        base_score=base,
        learning_rate=learning_rate,
        trees=tuple(trees),
        variant=VARIANT_SECOND_ORDER,
        params=params,
        feature_names=X.column_names,
    )


def fit_boosted_leafwise(
    X: FeatureMatrix,
    y: TargetVector,
    n_rounds: int = 200,
    learning_rate: float = 0.1,
    reg_lambda: float = 1.0,
    num_leaves: int = 31,
    n_bins: int = 64,
    min_samples_leaf: int = 5,
    seed: int = 0,
    base_score: float | None = None,
) -> BoostedModel:
    """Boost histogram trees grown leaf-wise (best-first).

    Bin layouts are computed once per feature from the training column via
    equal-frequency quantiles; candidate splits sit on bin boundaries, at the
    midpoint between the adjacent bins' value ranges.
    """
    _check_common(X, y, n_rounds, learning_rate, reg_lambda, min_samples_leaf)
    if num_leaves < 2:
        raise ValueError(f"num_leaves must be >= 2: {num_leaves}")
    if n_bins < 2:
        raise ValueError(f"n_bins must be >= 2: {n_bins}")
    params = LeafwiseParams(
        n_rounds=n_rounds,
        learning_rate=learning_rate,
        reg_lambda=reg_lambda,
        num_leaves=num_leaves,
        n_bins=n_bins,
        min_samples_leaf=min_samples_leaf,
        seed=seed,
        base_score=base_score,
    )
    specs = [_build_binspec(X.values[:, j], n_bins) for j in range(X.n_cols)]
    binned = np.column_stack(
        [_bin_column(spec, X.values[:, j]) for j, spec in enumerate(specs)]
    )
    base = canonical_mean(y.values) if base_score is None else float(base_score)
    tree_params = TreeParams(max_depth=None, min_samples_leaf=min_samples_leaf)
    pred = np.full(X.n_rows, base)
    trees = []
    for _ in range(n_rounds):
        g = pred - y.values
        nodes = _grow_leafwise(
            X.values, binned, specs, g, reg_lambda, num_leaves, min_samples_leaf
        )
        if _is_noop_tree(nodes):
            continue
        trees.append(TreeModel(nodes=nodes, params=tree_params, feature_names=X.column_names))
        pred += learning_rate * predict_nodes(nodes, X.values)
    return BoostedModel(
        base_score=base,
        learning_rate=learning_rate,
        trees=tuple(trees),
        variant=VARIANT_HISTOGRAM_LEAFWISE,
        params=params,
        feature_names=X.column_names,
    )
