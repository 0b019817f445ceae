"""Shared fixtures and pipeline helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

import ranpredict as rp


def make_matrix(values, names=None):
    values = np.asarray(values, dtype=float)
    if names is None:
        names = tuple(f"f{i}" for i in range(values.shape[1]))
    return rp.FeatureMatrix(tuple(names), values)


def make_target(values, name="y"):
    return rp.TargetVector(name, np.asarray(values, dtype=float))


def synth_split(n_samples, gen_seed, split_seed, train_fraction=0.8, task="brate", **gen_overrides):
    """Generate -> clean -> build -> split -> scale, like the CLI pipeline."""
    records = rp.generate(rp.GenConfig(n_samples=n_samples, seed=gen_seed, **gen_overrides))
    kept, _ = rp.filter_outliers(rp.align_timestamps(records)[0])
    X, y = rp.build_task(kept, rp.TaskSpec(task))
    X_tr, y_tr, X_te, y_te = rp.split_train_test(X, y, train_fraction, split_seed)
    scaler = rp.fit_scaler(X_tr)
    return rp.transform(scaler, X_tr), y_tr, rp.transform(scaler, X_te), y_te


@pytest.fixture(scope="session")
def small_task():
    """A modest noisy nonlinear task shared by model-level tests."""
    return synth_split(n_samples=1200, gen_seed=5, split_seed=3, noise_std_kbps=25.0)
