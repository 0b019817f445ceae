"""Feature-matrix assembly, train/test splitting, and z-score scaling."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .ingest import MetricRecord

# Short feature names accepted in task specs, mapped to MetricRecord fields.
# "cqi" is an alias for the SNR column: both name the channel-quality slot.
FEATURE_ALIASES = {
    "timestamp_ms": "timestamp_ms",
    "ue_id": "ue_id",
    "tti": "tti",
    "mcs": "mcs",
    "snr": "snr_db",
    "snr_db": "snr_db",
    "cqi": "snr_db",
    "bler": "bler",
    "brate": "brate_kbps",
    "brate_kbps": "brate_kbps",
}

DEFAULT_FEATURES = {
    "brate": ("bler", "tti", "mcs", "snr"),
    "snr": ("brate", "tti", "mcs", "bler"),
}


def _finite_or_raise(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} contains NaN or Inf")


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Named design matrix, shape (n_rows, n_cols), float64, finite."""

    column_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {self.values.shape}")
        if len(self.column_names) != self.values.shape[1]:
            raise ValueError(
                f"{len(self.column_names)} column names for {self.values.shape[1]} columns"
            )
        _finite_or_raise(self.values, "feature matrix")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    def write_csv(self, dest) -> None:
        """Debugging aid: dump the matrix with its header row."""
        rows = ([repr(float(v)) for v in row] for row in self.values)
        if hasattr(dest, "write"):
            w = csv.writer(dest, lineterminator="\n")
            w.writerow(self.column_names)
            w.writerows(rows)
        else:
            with open(dest, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(self.column_names)
                w.writerows(rows)


@dataclass(frozen=True, eq=False)
class TargetVector:
    """Named 1-D target (or prediction) vector aligned with a FeatureMatrix."""

    name: str
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.ndim != 1:
            raise ValueError(f"target must be 1-D, got shape {self.values.shape}")
        _finite_or_raise(self.values, "target vector")

    def __len__(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-column z-score parameters (population std, divisor N)."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "stds", np.asarray(self.stds, dtype=float))
        if self.means.shape != self.stds.shape or self.means.ndim != 1:
            raise ValueError("means and stds must be 1-D arrays of equal length")
        if np.any(self.stds < 0):
            raise ValueError("stds must be >= 0")

    @property
    def n_cols(self) -> int:
        return self.means.shape[0]


@dataclass(frozen=True)
class TaskSpec:
    """Which field to predict and which columns feed the model."""

    target: str
    features: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.target not in DEFAULT_FEATURES:
            raise ConfigError(f"unknown task target {self.target!r}; expected one of brate, snr")
        if not self.features:
            object.__setattr__(self, "features", DEFAULT_FEATURES[self.target])
        for name in self.features:
            if name.lower() not in FEATURE_ALIASES:
                raise ConfigError(f"unresolvable feature name: {name!r}")
        resolved = [FEATURE_ALIASES[f.lower()] for f in self.features]
        if FEATURE_ALIASES[self.target] in resolved:
            raise ConfigError(f"target {self.target!r} must not appear among the features")
        if len(set(resolved)) != len(resolved):
            raise ConfigError("duplicate feature columns in task spec")


def build_task(records: list[MetricRecord], spec: TaskSpec) -> tuple[FeatureMatrix, TargetVector]:
    """Extract the design matrix and target from records, in spec order.

    Row i corresponds to records[i]; no reordering or cleaning happens here.
    """
    if not records:
        raise ValueError("cannot build a task from an empty record list")
    feature_fields = [FEATURE_ALIASES[f.lower()] for f in spec.features]
    target_field = FEATURE_ALIASES[spec.target]
    values = np.array(
        [[float(getattr(r, f)) for f in feature_fields] for r in records], dtype=float
    )
    target = np.array([float(getattr(r, target_field)) for r in records], dtype=float)
    return (
        FeatureMatrix(column_names=tuple(spec.features), values=values),
        TargetVector(name=spec.target, values=target),
    )


def split_train_test(
    X: FeatureMatrix,
    y: TargetVector,
    train_fraction: float = 0.8,
    seed: int = 0,
    temporal: bool = False,
) -> tuple[FeatureMatrix, TargetVector, FeatureMatrix, TargetVector]:
    """Shuffle-and-split rows into train and test partitions.

    Rows are permuted by a PRNG seeded with ``seed``; the first
    floor(train_fraction * n) permuted rows form the training set. With
    ``temporal=True`` the permutation is skipped and the leading fraction in
    record order becomes the training set.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1): {train_fraction}")
    n = X.n_rows
    if n != len(y):
        raise ValueError(f"row mismatch: X has {n} rows, y has {len(y)}")
    if n < 2:
        raise ValueError(f"need at least 2 rows to form both partitions, got {n}")
    n_train = math.floor(train_fraction * n)
    if n_train < 1 or n_train >= n:
        raise ValueError(
            f"train_fraction {train_fraction} leaves an empty partition for n={n}"
        )
    if temporal:
        perm = np.arange(n)
    else:
        perm = np.random.default_rng(seed).permutation(n)
    tr, te = perm[:n_train], perm[n_train:]
    return (
        FeatureMatrix(X.column_names, X.values[tr]),
        TargetVector(y.name, y.values[tr]),
        FeatureMatrix(X.column_names, X.values[te]),
        TargetVector(y.name, y.values[te]),
    )


def fit_scaler(X_tr: FeatureMatrix) -> Scaler:
    """Per-column mean and population standard deviation of the training set."""
    if X_tr.n_rows < 1:
        raise ValueError("cannot fit a scaler on an empty matrix")
    return Scaler(means=X_tr.values.mean(axis=0), stds=X_tr.values.std(axis=0))


def transform(scaler: Scaler, X: FeatureMatrix) -> FeatureMatrix:
    """Apply (x - mean) / std per column; constant columns map to 0.0."""
    if X.n_cols != scaler.n_cols:
        raise ValueError(
            f"column-count mismatch: matrix has {X.n_cols}, scaler has {scaler.n_cols}"
        )
    safe = np.where(scaler.stds > 0, scaler.stds, 1.0)
    out = (X.values - scaler.means) / safe
    out[:, scaler.stds == 0] = 0.0
    return FeatureMatrix(X.column_names, out)
