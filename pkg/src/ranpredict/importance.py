"""Gain-based feature importance for tree-backed models.

Each internal node's criterion reduction is attributed to its split feature
and summed across all trees, then normalized to shares. Reductions are
recomputed from the stored node statistics (leaf values and sample counts),
so a deserialized model reports the same importances as a freshly fitted one:

* variance trees: the split's between-child sum of squares,
  n_L*(v_L - v_P)^2 + n_R*(v_R - v_P)^2, where internal values are the
  sample-weighted child means (telescopes to root SSE minus leaf SSEs);
* boosted trees: the second-order gain, recovered from leaf weights via
  G_leaf = -w * (n + lambda) and H_leaf = n (unit hessians).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedModelError
from .regressors import BoostedModel, ForestModel, LinearModel, TreeModel, TreeNodes


@dataclass(frozen=True)
class ImportanceEntry:
    name: str
    total_gain: float
    share: float


@dataclass(frozen=True)
class ImportanceReport:
    """Per-feature gains in model column order; shares sum to 1 when any
    split exists, otherwise all zero with has_splits=False."""

    entries: tuple[ImportanceEntry, ...]
    has_splits: bool

    def ranked(self) -> tuple[ImportanceEntry, ...]:
        """Entries sorted by descending share (column order breaks ties)."""
        return tuple(sorted(self.entries, key=lambda e: -e.share))


def _variance_gains(nodes: TreeNodes, n_features: int) -> np.ndarray:
    gains = np.zeros(n_features)
    mean = nodes.value.astype(float).copy()
    count = nodes.n_samples.astype(float)
    for i in reversed(range(nodes.n_nodes)):
        if nodes.is_leaf(i):
            continue
        l, r = int(nodes.left[i]), int(nodes.right[i])
        parent_mean = (count[l] * mean[l] + count[r] * mean[r]) / (count[l] + count[r])
        mean[i] = parent_mean
        reduction = count[l] * (mean[l] - parent_mean) ** 2 + count[r] * (
            mean[r] - parent_mean
        ) ** 2
        gains[nodes.feature_index[i]] += max(reduction, 0.0)
    return gains


def _second_order_gains(nodes: TreeNodes, n_features: int, reg_lambda: float) -> np.ndarray:
    gains = np.zeros(n_features)
    hess = nodes.n_samples.astype(float)
    grad = np.where(
        nodes.feature_index == -1, -nodes.value * (hess + reg_lambda), 0.0
    )
    for i in reversed(range(nodes.n_nodes)):
        if nodes.is_leaf(i):
            continue
        l, r = int(nodes.left[i]), int(nodes.right[i])
        grad[i] = grad[l] + grad[r]

        def score(j: int) -> float:
            return grad[j] ** 2 / (hess[j] + reg_lambda)

        gains[nodes.feature_index[i]] += max(0.5 * (score(l) + score(r) - score(i)), 0.0)
    return gains


def gain_importance(model) -> ImportanceReport:
    """Per-feature criterion-reduction totals, normalized to shares.

    Supports tree, forest, and both boosted model kinds. A linear model has
    no split structure and raises :class:`UnsupportedModelError`. A model
    with zero splits yields all-zero shares, flagged via ``has_splits``.
    """
    if isinstance(model, LinearModel):
        raise UnsupportedModelError("a linear model has no split gains to report")
    n_features = len(model.feature_names)
    if isinstance(model, TreeModel):
        gains = _variance_gains(model.nodes, n_features)
    elif isinstance(model, ForestModel):
        gains = np.zeros(n_features)
        for tree in model.trees:
            gains += _variance_gains(tree.nodes, n_features)
    elif isinstance(model, BoostedModel):
        gains = np.zeros(n_features)
        for tree in model.trees:
            gains += _second_order_gains(tree.nodes, n_features, model.params.reg_lambda)
    else:
        raise TypeError(f"not a model: {type(model).__name__}")

    total = float(gains.sum())
    has_splits = total > 0.0
    shares = gains / total if has_splits else np.zeros(n_features)
    entries = tuple(
        ImportanceEntry(name=name, total_gain=float(g), share=float(s))
        for name, g, s in zip(model.feature_names, gains, shares)
    )
    return ImportanceReport(entries=entries, has_splits=has_splits)
