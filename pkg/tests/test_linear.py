"""Least-squares fitting, including rank-deficient inputs."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_matrix, make_target
from ranpredict import fit_linear, predict


class TestFitLinear:
    def test_exact_line(self):
        model = fit_linear(make_matrix([[1.0], [2.0], [3.0]]), make_target([2.0, 4.0, 6.0]))
        assert model.weights[0] == pytest.approx(2.0, abs=1e-9)
        assert model.intercept == pytest.approx(0.0, abs=1e-9)

    def test_constant_target(self):
        model = fit_linear(make_matrix([[1.0], [2.0], [3.0]]), make_target([1.0, 1.0, 1.0]))
        assert model.weights[0] == pytest.approx(0.0, abs=1e-9)
        assert model.intercept == pytest.approx(1.0, abs=1e-9)

    def test_collinear_uses_min_norm_solution(self):
        X = make_matrix([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = make_target([2.0, 4.0, 6.0])
        model = fit_linear(X, y)
        fitted = predict(model, X).values
        assert np.max(np.abs(fitted - y.values)) < 1e-8
        # Oracle: minimum-norm least squares via SVD-based lstsq on the raw
        # augmented design (an independent code path from the Gram solve).
        design = np.column_stack([X.values, np.ones(3)])
        expected, *_ = np.linalg.lstsq(design, y.values, rcond=None)
        assert model.weights == pytest.approx(expected[:2], abs=1e-8)
        assert model.intercept == pytest.approx(expected[2], abs=1e-8)

    def test_multifeature_recovery(self):
        rng = np.random.default_rng(3)
        values = rng.normal(size=(200, 3))
        y = values @ np.array([1.5, -2.0, 0.25]) + 0.75
        model = fit_linear(make_matrix(values), make_target(y))
        assert model.weights == pytest.approx([1.5, -2.0, 0.25], abs=1e-9)
        assert model.intercept == pytest.approx(0.75, abs=1e-9)

    def test_single_row(self):
        model = fit_linear(make_matrix([[2.0]]), make_target([7.0]))
        assert predict(model, make_matrix([[2.0]])).values[0] == pytest.approx(7.0, abs=1e-9)

    def test_refit_is_identical(self):
        rng = np.random.default_rng(8)
        X = make_matrix(rng.normal(size=(500, 4)))
        y = make_target(rng.normal(size=500))
        a, b = fit_linear(X, y), fit_linear(X, y)
        assert np.array_equal(a.weights, b.weights) and a.intercept == b.intercept


class TestPredictLinear:
    def test_dot_product(self):
        model = fit_linear(make_matrix([[1.0], [2.0]]), make_target([2.0, 4.0]))
        assert predict(model, make_matrix([[7.0]])).values[0] == pytest.approx(14.0, abs=1e-9)

    def test_column_mismatch(self):
        model = fit_linear(make_matrix([[1.0], [2.0]]), make_target([2.0, 4.0]))
        with pytest.raises(ValueError):
            predict(model, make_matrix([[1.0, 2.0]]))
