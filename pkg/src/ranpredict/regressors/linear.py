"""Ordinary least squares with an intercept, via the normal equations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import FeatureMatrix, TargetVector


@dataclass(eq=False)
class LinearModel:
    """Fitted weights and intercept; immutable after fit."""

    weights: np.ndarray
    intercept: float
    feature_names: tuple[str, ...]


def fit_linear(X: FeatureMatrix, y: TargetVector) -> LinearModel:
    """Minimize the summed squared prediction error.

    Solves the normal equations on the intercept-augmented design matrix.
    When the Gram matrix is rank-deficient (collinear or constant columns)
    the minimum-norm solution is used instead, via the pseudoinverse.

    The Gram matrix and moment vector are accumulated with numpy reductions
    rather than a matrix product, which keeps refits bit-for-bit reproducible
    regardless of BLAS threading.
    """
    if X.n_rows < 1:
        raise ValueError("cannot fit on an empty matrix")
    if X.n_rows != len(y):
        raise ValueError(f"row mismatch: X has {X.n_rows}, y has {len(y)}")
    design = np.column_stack([X.values, np.ones(X.n_rows)])
    gram = np.einsum("ni,nj->nij", design, design).sum(axis=0)
    moment = (design * y.values[:, None]).sum(axis=0)
    if np.linalg.matrix_rank(gram) < gram.shape[0]:
        coef = np.linalg.pinv(gram) @ moment
    else:
        coef = np.linalg.solve(gram, moment)
    return LinearModel(
        weights=coef[:-1], intercept=float(coef[-1]), feature_names=X.column_names
    )
