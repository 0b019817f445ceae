"""Regression evaluation metrics and the prediction-error distribution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DegenerateTargetError(ValueError):
    """R^2 is undefined: the true targets are all identical (SS_tot = 0)."""


@dataclass(frozen=True)
class EvalResult:
    """MSE (target units squared), RMSE (target units), and R^2."""

    mse: float
    rmse: float
    r2: float


@dataclass(frozen=True, eq=False)
class ErrorHistogram:
    """Equal-width histogram of prediction errors (actual - predicted)."""

    bin_edges: np.ndarray
    counts: np.ndarray


def _as_pair(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(y_true, dtype=float)
    b = np.asarray(y_pred, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("metrics are undefined on empty inputs")
    return a, b


def mse(y_true, y_pred) -> float:
    """Mean of squared residuals."""
    a, b = _as_pair(y_true, y_pred)
    return float(np.mean((a - b) ** 2))


def rmse(y_true, y_pred) -> float:
    """Square root of the mean squared error."""
    return math.sqrt(mse(y_true, y_pred))


def r2(y_true, y_pred) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot.

    Raises :class:`DegenerateTargetError` when the targets are constant, so
    callers must handle degenerate scenario subsets explicitly.
    """
    a, b = _as_pair(y_true, y_pred)
    if a.size < 2:
        raise ValueError("r2 needs at least 2 samples")
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateTargetError("targets are constant; R^2 is undefined")
    ss_res = float(np.sum((a - b) ** 2))
    return 1.0 - ss_res / ss_tot


def evaluate(y_true, y_pred) -> EvalResult:
    """All three metrics in one pass-friendly bundle."""
    return EvalResult(mse=mse(y_true, y_pred), rmse=rmse(y_true, y_pred), r2=r2(y_true, y_pred))


def error_histogram(y_true, y_pred, n_bins: int = 50) -> ErrorHistogram:
    """Histogram of errors eps = actual - predicted.

    Bins are equal-width over [min eps, max eps]; a value equal to the
    maximum edge lands in the last bin. If all errors are identical the range
    degenerates and is widened by +-0.5 around the single value.
    """
    a, b = _as_pair(y_true, y_pred)
    if n_bins < 1:
        raise ValueError(f"n_bins must be >= 1: {n_bins}")
    counts, edges = np.histogram(a - b, bins=n_bins)
    return ErrorHistogram(bin_edges=edges, counts=counts)
