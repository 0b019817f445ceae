"""Random forest: bagged variance-reduction trees with feature subsampling.

The forest prediction is the unweighted mean of the member-tree predictions.
Each tree draws its own PRNG stream keyed by (seed, tree_index), so training
order (or any future parallelism) cannot change the fitted model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import FeatureMatrix, TargetVector
from .tree import TreeModel, TreeParams, grow_variance_tree


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = 8
    min_samples_leaf: int = 5
    feature_fraction: float = 1.0 / 3.0
    bootstrap: bool = True
    seed: int = 0


@dataclass(eq=False)
class ForestModel:
    """A fitted forest; immutable after fit."""

    trees: tuple[TreeModel, ...]
    params: ForestParams
    feature_names: tuple[str, ...]


def fit_forest(
    X: FeatureMatrix,
    y: TargetVector,
    n_trees: int = 100,
    max_depth: int | None = 8,
    min_samples_leaf: int = 5,
    feature_fraction: float = 1.0 / 3.0,
    bootstrap: bool = True,
    seed: int = 0,
) -> ForestModel:
    """Fit ``n_trees`` trees on bootstrap samples and random feature subsets.

    Each node considers ceil(feature_fraction * n_cols) features. With
    n_trees=1, bootstrap=False and feature_fraction=1.0 the forest degenerates
    to a single fit_tree model.
    """
    if X.n_rows < 1:
        raise ValueError("cannot fit a forest on an empty matrix")
    if X.n_rows != len(y):
        raise ValueError(f"row mismatch: X has {X.n_rows}, y has {len(y)}")
    if n_trees < 1:
        raise ValueError(f"n_trees must be >= 1: {n_trees}")
    if not 0.0 < feature_fraction <= 1.0:
        raise ValueError(f"feature_fraction must be in (0, 1]: {feature_fraction}")

    params = ForestParams(
        n_trees=n_trees,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        feature_fraction=feature_fraction,
        bootstrap=bootstrap,
        seed=seed,
    )
    n = X.n_rows
    n_sub = min(X.n_cols, math.ceil(feature_fraction * X.n_cols))
    tree_params = TreeParams(max_depth=max_depth, min_samples_leaf=min_samples_leaf)
    trees = []
    for b in range(n_trees):
        rng = np.random.default_rng([seed, b])
        if bootstrap:
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.arange(n)
        nodes = grow_variance_tree(
            X.values[rows],
            y.values[rows],
            max_depth,
            min_samples_leaf,
            rng=rng,
            n_sub_features=n_sub if n_sub < X.n_cols else None,
        )
        trees.append(TreeModel(nodes=nodes, params=tree_params, feature_names=X.column_names))
    return ForestModel(trees=tuple(trees), params=params, feature_names=X.column_names)
