import math

import numpy as np
import pytest

from src.algorithms.dimension_fit import (FitMethod, RansacParams, collapse_plateaus, default_window,
                                          effective_dimension, estimate_effective_dimension, estimate_metric_dimension,
                                          fit_loglog, metric_dimension, parse_window, reference_dimensions)
from src.algorithms.domains import PointSet, generate_cantor
from src.algorithms.greedy_widths import greedy_cover
from src.algorithms.kernels import KernelFamily, KernelSpec
from src.utils.errors import DegenerateFitError, ValidationError


@pytest.fixture
def power_law():
    x = np.arange(1, 101, dtype=float)
    return x, x ** -0.5


class TestFitLogLog:
    """Straight-line fits in log-log coordinates."""

    @pytest.mark.parametrize("method", [FitMethod.OLS, FitMethod.RANSAC])
    def test_exact_power_law(self, power_law, method):
        fit = fit_loglog(*power_law, method=method)
        assert fit.slope == pytest.approx(-0.5, abs=1e-12)
        assert fit.intercept == pytest.approx(0.0, abs=1e-12)

    def test_ransac_ignores_outliers(self, power_law):
        x, y = power_law
        y = y.copy()
        corrupt = np.random.default_rng(0).choice(100, size=10, replace=False)
        y[corrupt] *= 100
        fit = fit_loglog(x, y, method=FitMethod.RANSAC,
                         ransac_params=RansacParams(iterations=500, residual_threshold=0.1), seed=1)
        assert fit.slope == pytest.approx(-0.5, abs=1e-6)
        assert not fit.inlier_mask[corrupt].any()
        assert fit.inliers == 90

    def test_constant_y(self):
        x = np.arange(1, 20, dtype=float)
        assert fit_loglog(x, np.full_like(x, 3.0), method=FitMethod.OLS).slope == pytest.approx(0.0, abs=1e-14)

    def test_scale_invariance(self, power_law):
        x, y = power_law
        a = fit_loglog(x, y, method=FitMethod.OLS)
        b = fit_loglog(x, 7.5 * y, method=FitMethod.OLS)
        assert b.slope == pytest.approx(a.slope, abs=1e-12)
        assert b.intercept == pytest.approx(a.intercept + math.log(7.5), abs=1e-12)

    def test_ransac_deterministic(self, power_law):
        x, y = power_law
        y = y * np.exp(np.random.default_rng(1).normal(scale=0.05, size=len(y)))
        a = fit_loglog(x, y, seed=5)
        b = fit_loglog(x, y, seed=5)
        assert np.array_equal(a.inlier_mask, b.inlier_mask)
        assert a.slope == b.slope

    def test_window_and_dropped_points(self):
        x = np.arange(1, 11, dtype=float)
        y = x ** -1.0
        y[4] = 0.0
        fit = fit_loglog(x, y, window=(2, 8), method=FitMethod.OLS)
        assert fit.window == (2, 8)
        assert fit.dropped == 1
        assert fit.n_points == 6
        assert fit.slope == pytest.approx(-1.0, abs=1e-12)

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateFitError):
            fit_loglog([1.0, 2.0], [1.0, 0.0], method=FitMethod.OLS)
        with pytest.raises(DegenerateFitError):
            fit_loglog([2.0, 2.0, 2.0], [1.0, 2.0, 3.0], method=FitMethod.OLS)

    def test_window_outside_curve(self, power_law):
        with pytest.raises(ValidationError):
            fit_loglog(*power_law, window=(50, 200))


class TestWindows:
    def test_default_window(self):
        assert default_window(1000) == (300, 500)
        assert default_window(500) == (300, 499)
        assert default_window(300) == (150, 299)
        assert default_window(61) == (31, 60)

    def test_parse_window(self):
        assert parse_window("150:300") == (150, 300)
        with pytest.raises(ValidationError):
            parse_window("300:150")
        with pytest.raises(ValidationError):
            parse_window("a:b")


class TestEffectiveDimension:
    """d_K from width curves."""

    def test_square_root_decay_gives_two(self):
        t = np.arange(1, 400, dtype=float)
        widths = np.concatenate([[1.0], t ** -0.5])
        assert effective_dimension(widths) == pytest.approx(2.0, rel=1e-9)
        assert effective_dimension(widths, method=FitMethod.OLS) == pytest.approx(2.0, rel=1e-9)

    @pytest.mark.parametrize("method", [FitMethod.OLS, FitMethod.RANSAC])
    def test_exponential_decay_is_small(self, method):
        widths = np.exp(-np.arange(301, dtype=float))
        assert effective_dimension(widths, window=(50, 300), method=method) < 0.2

    def test_flat_curve_is_infinite(self):
        assert effective_dimension(np.ones(50), method=FitMethod.OLS) == math.inf

    def test_window_cut_to_truncated_curve(self):
        widths = np.concatenate([[1.0], np.arange(1, 40, dtype=float) ** -0.25])
        estimate = estimate_effective_dimension(widths, window=(20, 300), method=FitMethod.OLS)
        assert estimate.fit.window == (20, 39)
        assert estimate.dimension == pytest.approx(4.0, rel=1e-9)

    def test_zero_widths_dropped(self):
        widths = np.concatenate([[1.0], np.arange(1, 30, dtype=float) ** -1.0, np.zeros(5)])
        estimate = estimate_effective_dimension(widths, window=(10, 34), method=FitMethod.OLS)
        assert estimate.fit.dropped == 5
        assert estimate.dimension == pytest.approx(1.0, rel=1e-9)


class TestMetricDimension:
    """d_rho from covering curves."""

    def test_cube_root_covering(self):
        n = np.arange(1, 200, dtype=float)
        assert metric_dimension((n, n ** (-1 / 3)), window=(1, 199)) == pytest.approx(3.0, rel=1e-9)

    def test_plateaus_collapse_to_first_n(self):
        ns, radii = collapse_plateaus(np.array([1, 2, 3, 4, 5]), np.array([1.0, 0.5, 0.5, 0.5, 0.25]))
        assert list(ns) == [1, 2, 5]
        assert list(radii) == [1.0, 0.5, 0.25]

    def test_round_off_does_not_split_a_plateau(self):
        radii = np.array([1.0, 0.5, 0.5 * (1 - 1e-9), 0.5 * (1 - 2e-4), 0.25])
        ns, _ = collapse_plateaus(np.arange(1, 6), radii)
        assert list(ns) == [1, 2, 5]

    def test_plateau_entering_window_is_not_a_point(self):
        # the radius 0.5 is reached at n = 2, before the window opens
        ns = np.arange(1, 9)
        radii = np.array([1.0, 0.5, 0.5, 0.5, 0.25, 0.25, 0.25, 0.125])
        estimate = estimate_metric_dimension((ns, radii), window=(3, 8), method=FitMethod.OLS)
        assert estimate.fit.n_points == 2
        assert estimate.dimension == pytest.approx(math.log(8 / 5) / math.log(2), rel=1e-12)

    def test_cantor_cover(self):
        # 2^m centers reach radius 3^-m, so d_rho is 2 log 2 / log 3
        cover = greedy_cover(KernelSpec.laplace(1.0), generate_cantor(13), 1e-12, max_centers=64)
        d = metric_dimension(cover.curve(), window=(4, 64), method=FitMethod.OLS)
        assert d == pytest.approx(2 * math.log(2) / math.log(3), abs=0.06)

    def test_laplace_on_planar_grid(self):
        g = np.linspace(0.0, 1.0, 200)
        grid = PointSet(np.array([(a, b) for a in g for b in g]))
        cover = greedy_cover(KernelSpec.laplace(1.0), grid, 1e-9, max_centers=2000)
        d = metric_dimension(cover.curve(), window=(200, 2000), method=FitMethod.OLS)
        assert d == pytest.approx(4.0, abs=0.4)


class TestReferenceDimensions:
    def test_table(self):
        assert reference_dimensions(KernelSpec.laplace(), 3) == (4.0, 4.0)
        assert reference_dimensions(KernelSpec.gaussian(), 3) == (2.0, 0.0)
        assert reference_dimensions(KernelSpec(KernelFamily.ZONAL_NTK_RELU), 2) == (2.0, 2.0)
        assert reference_dimensions(KernelSpec(KernelFamily.ZONAL_NNGP_RELU), 4) == (3.0, 2.0)
        assert reference_dimensions(KernelSpec(KernelFamily.EXPONENTIAL_TYPE, exponent_a=0.5), 2) == (4.0, 4.0)
        assert reference_dimensions(KernelSpec(KernelFamily.MATERN), 3) is None
