import math

import numpy as np
import pytest

from src.algorithms.domains import sample_sphere
from src.algorithms.kernels import KernelSpec, eval_gram
from src.algorithms.krr_experiment import (RiskCurve, RiskRow, excess_risk_experiment, fit_constrained_krr,
                                           fit_krr, implied_effective_dimension, predict, predicted_risk_slope,
                                           risk_curve_slope)
from src.utils.errors import DimensionMismatchError, ValidationError


@pytest.fixture
def train():
    X = sample_sphere(50, 3, seed=21).points
    y = np.random.default_rng(21).uniform(-2.0, 2.0, 50)
    return X, y


class TestFitKrr:
    """Unconstrained ridge solutions."""

    def test_single_point(self, laplace):
        model = fit_krr(laplace, [[0.3, 0.1]], [2.5], 0.25)
        assert model.coefficients[0] == pytest.approx(2.5 / 1.25, rel=1e-12)

    def test_normal_equations(self, laplace, train):
        X, y = train
        lam = 1e-3
        model = fit_krr(laplace, X, y, lam)
        G = eval_gram(laplace, X)
        residual = (G + len(y) * lam * np.eye(len(y))) @ model.coefficients - y
        assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(y)

    def test_stored_norm(self, laplace, train):
        X, y = train
        model = fit_krr(laplace, X, y, 1e-2)
        G = eval_gram(laplace, X)
        a = model.coefficients
        assert model.rkhs_norm ** 2 == pytest.approx(a @ G @ a, rel=1e-8)

    def test_heavy_ridge_shrinks_to_zero(self, laplace, train):
        X, y = train
        model = fit_krr(laplace, X, y, 1e8)
        assert np.abs(model.coefficients).max() < 1e-7
        assert np.abs(predict(model, X)).max() < 1e-5

    def test_lambda_must_be_positive(self, laplace, train):
        with pytest.raises(ValidationError):
            fit_krr(laplace, *train, 0.0)

    def test_length_mismatch(self, laplace, train):
        X, y = train
        with pytest.raises(ValidationError):
            fit_krr(laplace, X, y[:-1], 1.0)


class TestConstrainedKrr:
    """Bisection onto the unit RKHS ball."""

    @pytest.mark.parametrize("spec", [KernelSpec.laplace(1.0), KernelSpec.gaussian(0.1)])
    def test_norm_reaches_one(self, spec, train):
        model = fit_constrained_krr(spec, *train)
        assert not model.sub_unit
        assert model.rkhs_norm <= 1.0
        assert abs(model.rkhs_norm - 1.0) <= 1e-3

    def test_zero_labels(self, laplace, train):
        X, _ = train
        model = fit_constrained_krr(laplace, X, np.zeros(len(X)))
        assert model.sub_unit
        assert model.rkhs_norm == 0.0
        assert not np.any(model.coefficients)

    def test_norm_monotone_in_lambda(self, laplace, train):
        low = fit_krr(laplace, *train, 1e-12)
        high = fit_krr(laplace, *train, 1e3)
        assert low.rkhs_norm >= high.rkhs_norm

    def test_small_labels_are_sub_unit(self, laplace, train):
        X, y = train
        model = fit_constrained_krr(laplace, X, 1e-4 * y)
        assert model.sub_unit
        assert model.lam == 1e-12


class TestPredict:
    def test_zero_coefficients(self, laplace, train):
        X, _ = train
        model = fit_krr(laplace, X, np.zeros(len(X)), 1.0)
        assert np.array_equal(predict(model, X[:5]), np.zeros(5))

    def test_interpolation_limit(self, laplace):
        X = np.linspace(0.0, 9.0, 10).reshape(-1, 1)
        y = np.sin(X[:, 0])
        model = fit_krr(laplace, X, y, 1e-12)
        assert np.allclose(predict(model, X), y, atol=1e-8)

    def test_linear_in_coefficients(self, laplace, train):
        X, y = train
        model = fit_krr(laplace, X, y, 0.1)
        doubled = fit_krr(laplace, X, 2 * y, 0.1)
        Z = sample_sphere(7, 3, seed=1).points
        assert np.allclose(predict(doubled, Z), 2 * predict(model, Z), rtol=1e-10)

    def test_dimension_mismatch(self, laplace, train):
        model = fit_krr(laplace, *train, 0.1)
        with pytest.raises(DimensionMismatchError):
            predict(model, np.zeros((3, 2)))


class TestExperiment:
    """Excess-risk curves."""

    def test_noise_free_labels_give_zero_risk(self, laplace):
        curve = excess_risk_experiment(laplace, 3, [8, 16], trials=2, n_test=50, noise_amp=0.0)
        assert all(row.mean_excess == 0.0 for row in curve.rows)
        assert [row.trials for row in curve.rows] == [2, 2]

    def test_rows_and_estimator_cross_check(self, laplace):
        curve = excess_risk_experiment(laplace, 2, [16, 32, 64], trials=3, n_test=4000, seed=2)
        assert list(curve.ns) == [16, 32, 64]
        noise_var = 0.2 ** 2 / 3
        for row in curve.rows:
            assert row.mean_excess >= 0
            assert row.failed == 0
            bound = 6 * math.sqrt(row.mean_excess * noise_var / 4000) + 1e-12
            assert abs(row.mean_unreduced - row.mean_excess) <= bound

    def test_independent_of_thread_count(self, laplace):
        kwargs = dict(trials=3, n_test=100, seed=4)
        a = excess_risk_experiment(laplace, 3, [10, 20], threads=1, **kwargs)
        b = excess_risk_experiment(laplace, 3, [10, 20], threads=4, **kwargs)
        assert np.array_equal(a.as_array(), b.as_array())

    @pytest.mark.parametrize("kwargs", [
        {"d": 1, "sizes": [10, 20]},
        {"d": 3, "sizes": [20, 10]},
        {"d": 3, "sizes": []},
        {"d": 3, "sizes": [10], "trials": 0},
    ])
    def test_validation(self, laplace, kwargs):
        with pytest.raises(ValidationError):
            excess_risk_experiment(laplace, **kwargs)


class TestSlopes:
    def test_predicted_exponents(self):
        assert predicted_risk_slope(0) == -1.0
        assert predicted_risk_slope(2) == pytest.approx(-2 / 3)
        assert predicted_risk_slope(4) == pytest.approx(-0.6)
        assert predicted_risk_slope(6) == pytest.approx(-4 / 7)
        assert predicted_risk_slope(math.inf) == -0.5

    def test_implied_dimension_inverts_prediction(self):
        for d in (0.5, 2.0, 4.0, 6.0):
            assert implied_effective_dimension(predicted_risk_slope(d)) == pytest.approx(d)
        assert implied_effective_dimension(-1.2) == 0.0
        assert implied_effective_dimension(-0.4) == math.inf

    def test_risk_curve_slope(self):
        ns = [32, 64, 128, 256]
        rows = tuple(RiskRow(n, 5.0 * n ** (-2 / 3), 0.0, 10) for n in ns)
        assert risk_curve_slope(RiskCurve(rows)).slope == pytest.approx(-2 / 3, abs=1e-12)
