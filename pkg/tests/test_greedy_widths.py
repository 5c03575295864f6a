import math

import numpy as np
import pytest

from src.algorithms.domains import PointSet, sample_sphere
from src.algorithms.greedy_widths import (explicit_inverse_widths, greedy_cover, greedy_widths, net_radius,
                                          residual_at, uncertainty_bars)
from src.algorithms.kernels import build_kernel, distance_matrix, eval_gram
from src.utils.errors import DimensionMismatchError, ValidationError


class TestGreedyWidths:
    """The pivoted-Cholesky width engine."""

    def test_first_width_is_one_for_unit_diagonal(self, laplace, cube_points):
        run = greedy_widths(laplace, cube_points, 5)
        assert run.widths[0] == 1.0
        assert run.selected[0] == 0

    def test_two_point_laplace(self, laplace):
        r = 0.3
        run = greedy_widths(laplace, PointSet([[0.0], [r]]), 2)
        assert run.widths[0] == pytest.approx(1.0, abs=1e-10)
        assert run.widths[1] == pytest.approx(math.sqrt(1 - math.exp(-2 * r)), abs=1e-10)
        assert list(run.selected) == [0, 1]
        assert run.truncated_at is None

    def test_first_pivot_maximizes_diagonal(self):
        spec = "family=nngp1 n1=32 act=relu seed=1"
        X = np.random.default_rng(0).normal(size=(40, 3))
        run = greedy_widths(spec, X, 3)
        diag = build_kernel(spec).diag(X)
        assert run.selected[0] == int(np.argmax(diag))
        assert run.widths[0] == pytest.approx(math.sqrt(diag.max()))

    def test_determinant_identity(self, laplace, sphere200):
        run = greedy_widths(laplace, sphere200, 50)
        G = eval_gram(laplace, sphere200.points[run.selected])
        sign, logdet = np.linalg.slogdet(G)
        assert sign > 0
        assert logdet == pytest.approx(run.log_det, abs=1e-6)

    def test_widths_nonincreasing(self, ntk, sphere200):
        run = greedy_widths(ntk, sphere200, 60)
        assert np.all(np.diff(run.widths) <= 0)

    def test_cholesky_rows_factor_the_selected_gram(self, gaussian, sphere200):
        run = greedy_widths(gaussian, sphere200, 15)
        G = eval_gram(gaussian, sphere200.points[run.selected])
        L = run.chol_rows
        assert np.allclose(L, np.tril(L))
        assert np.allclose(L @ L.T, G, atol=1e-10)
        assert np.allclose(np.diag(L), run.widths, rtol=1e-10)

    def test_duplicate_point_is_not_selected_twice(self, laplace):
        points = PointSet([[0.0], [0.0], [1.0]])
        run = greedy_widths(laplace, points, 3)
        assert run.truncated_at == 2
        assert len(run) == 2
        assert sorted(run.selected) == [0, 2]

    def test_pivot_tolerance_truncates(self, laplace):
        points = PointSet(np.linspace(0, 1, 30).reshape(-1, 1))
        run = greedy_widths(laplace, points, 30, pivot_tol=0.5)
        assert run.truncated_at is not None
        assert np.all(run.widths >= 0.5)

    def test_duplicate_sphere_point_under_ntk(self, ntk):
        x = [0.0, 0.6, 0.8]
        points = PointSet([x, x, [1.0, 0.0, 0.0]])
        run = greedy_widths(ntk, points, 3)
        assert run.truncated_at == 2
        cover = greedy_cover(ntk, points, 1e-9)
        assert len(cover.centers) == 2

    @pytest.mark.parametrize("tol", [0.0, -1e-3])
    def test_pivot_tolerance_must_be_positive(self, laplace, cube_points, tol):
        with pytest.raises(ValidationError):
            greedy_widths(laplace, cube_points, 10, pivot_tol=tol)

    def test_matches_explicit_inverse_engine(self, laplace, sphere300):
        run = greedy_widths(laplace, sphere300, 60)
        widths, selected = explicit_inverse_widths(laplace, sphere300, 60)
        assert np.array_equal(selected, run.selected)
        assert np.allclose(widths, run.widths, rtol=1e-6)

    def test_validation(self, laplace, cube_points):
        with pytest.raises(ValidationError):
            greedy_widths(laplace, cube_points, 0)
        with pytest.raises(ValidationError):
            greedy_widths(laplace, cube_points, len(cube_points) + 1)


class TestResidual:
    """S_t(x) against a run."""

    @pytest.fixture
    def run(self, laplace, sphere200):
        return greedy_widths(laplace, sphere200, 30)

    def test_t_zero_is_diagonal(self, run, laplace, sphere200):
        assert residual_at(run, laplace, sphere200, 0, [0.0, 0.0, 1.0]) == 1.0

    def test_selected_points_have_zero_residual(self, run, laplace, sphere200):
        for k in range(10):
            x = sphere200.points[run.selected[k]]
            assert residual_at(run, laplace, sphere200, 10, x) == pytest.approx(0.0, abs=1e-9)

    def test_matches_explicit_solve(self, run, laplace, sphere200):
        x = sample_sphere(5, 3, seed=99).points
        t = 20
        Xt = sphere200.points[run.selected[:t]]
        k = eval_gram(laplace, Xt, x)
        expected = 1.0 - np.einsum("ij,ij->j", k, np.linalg.solve(eval_gram(laplace, Xt), k))
        assert np.allclose(residual_at(run, laplace, sphere200, t, x), expected, atol=1e-8)

    def test_final_residual_matches_run(self, run, laplace, sphere200):
        S = residual_at(run, laplace, sphere200, len(run), sphere200.points)
        assert np.allclose(S, run.residual, atol=1e-10)

    def test_width_is_max_residual(self, run, laplace, sphere200):
        S = residual_at(run, laplace, sphere200, 12, sphere200.points)
        assert math.sqrt(S.max()) == pytest.approx(run.widths[12], rel=1e-8)

    def test_dimension_mismatch(self, run, laplace, sphere200):
        with pytest.raises(DimensionMismatchError):
            residual_at(run, laplace, sphere200, 3, [1.0, 0.0])

    def test_lipschitz(self, run, laplace, sphere200):
        rng = np.random.default_rng(4)
        D = distance_matrix(laplace, sphere200, sphere200)
        for t in rng.integers(0, len(run) + 1, size=5):
            root = np.sqrt(residual_at(run, laplace, sphere200, int(t), sphere200.points))
            i, j = rng.integers(0, len(sphere200), size=(2, 200))
            assert np.all(root[i] - root[j] <= D[i, j] + 1e-9)


class TestCover:
    """Farthest-point covers and net radii."""

    def test_large_epsilon_needs_one_center(self, laplace, cube_points):
        cover = greedy_cover(laplace, cube_points, 10.0)
        assert len(cover.centers) == 1

    def test_two_points(self, laplace):
        points = PointSet([[0.0], [2.0]])
        d = distance_matrix(laplace, points, points)[0, 1]
        centers, radius = greedy_cover(laplace, points, d / 2)
        assert len(centers) == 2
        assert radius == 0.0

    def test_every_point_within_epsilon(self, laplace, cube_points):
        eps = 0.35
        cover = greedy_cover(laplace, cube_points.subset(range(100)), eps)
        D = distance_matrix(laplace, cube_points.points[:100], cube_points.points[cover.centers])
        assert D.min(axis=1).max() <= eps
        assert cover.radius <= eps

    def test_radii_curve(self, laplace, cube_points):
        cover = greedy_cover(laplace, cube_points, 1e-9, max_centers=40)
        ns, radii = cover.curve()
        assert len(ns) == len(radii) == 40
        assert np.all(np.diff(radii) <= 0)
        assert radii[9] == pytest.approx(net_radius(laplace, cube_points, cover.centers[:10]))

    def test_epsilon_must_be_positive(self, laplace, cube_points):
        with pytest.raises(ValidationError):
            greedy_cover(laplace, cube_points, 0.0)

    def test_net_radius_all_centers(self, laplace, cube_points):
        assert net_radius(laplace, cube_points, np.arange(len(cube_points))) == 0.0

    def test_net_radius_single_center(self, laplace):
        points = PointSet([[0.0], [0.8]])
        assert net_radius(laplace, points, [0]) == pytest.approx(math.sqrt(2 - 2 * math.exp(-0.8)))

    def test_net_radius_brute_force(self, laplace):
        X = np.random.default_rng(8).uniform(size=(500, 2))
        centers = [3, 77, 140, 402]
        expected = max(min(np.sqrt(max(2 - 2 * np.exp(-np.linalg.norm(x - X[c])), 0.0)) for c in centers)
                       for x in X)
        assert net_radius(laplace, X, centers) == pytest.approx(expected, abs=1e-12)

    def test_net_radius_against_reference_set(self, laplace):
        ambient = PointSet(np.linspace(0, 1, 101).reshape(-1, 1))
        net = PointSet([[0.25], [0.75]])
        expected = math.sqrt(2 - 2 * math.exp(-0.25))
        assert net_radius(laplace, ambient, [0, 1], reference=net) == pytest.approx(expected)

    def test_net_radius_needs_centers(self, laplace, cube_points):
        with pytest.raises(ValidationError):
            net_radius(laplace, cube_points, [])


def test_uncertainty_bars():
    lower, upper = uncertainty_bars([1.0, 0.5], 0.1)
    assert np.allclose(lower, [-math.log(1.1), -math.log(0.6)])
    assert np.allclose(upper, [0.0, math.log(2.0)])
