"""
Empirical upper bounds on Kolmogorov n-widths and metric covers.

greedy_widths() runs the greedy selection x_{t+1} = argmax S_t(x) over a
finite point set, where S_t(x) is the squared RKHS distance from K(x, .) to the
span of the first t selected kernel sections. It is a pivoted partial Cholesky
factorization: each step evaluates one kernel column and downdates the
residual diagonal, S_t(x) = S_{t-1}(x) - c_t(x)^2. The widths w_t = sqrt(max S_t)
are nonincreasing upper bounds on w_K(t) for the finite domain.

greedy_cover() is farthest-point sampling in the canonical metric; its
radii after n centers estimate the covering function eps(n).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .base import log_clamp_once
from .kernels import build_kernel
from ..utils.errors import DimensionMismatchError, NumericalError, ValidationError
from ..utils.metrics import as_points, check_same_dim

logger = logging.getLogger(__name__)

# Default stopping rule: residual below (REL_PIVOT_TOL * w_0)^2.
REL_PIVOT_TOL = 1e-6
NET_CHUNK = 4096
PROGRESS_EVERY = 50


@dataclass(frozen=True)
class GreedyRun:
    """
    Output of the greedy width algorithm.

    Attributes:
        selected: Indices of the selected points, in selection order
        widths: w_0 >= w_1 >= ... (one per selected point)
        chol_rows: Lower-triangular Cholesky factor of K[X_t, X_t] for the
            selected points (row t belongs to selected[t])
        residual: S_t(x) for every candidate at termination
        truncated_at: Step at which the largest residual fell below the pivot
            tolerance, or None when all requested steps ran
    """
    selected: np.ndarray
    widths: np.ndarray
    chol_rows: np.ndarray
    residual: np.ndarray
    truncated_at: Optional[int] = None

    def __len__(self):
        return len(self.widths)

    @property
    def log_det(self):
        """log det K[X_T, X_T] = sum_t log w_t^2."""
        return float(2.0 * np.sum(np.log(self.widths)))


def _resolve_steps(T, n):
    if int(T) != T or T < 1:
        raise ValidationError(f"T must be a positive integer, got {T}")
    if n < 1:
        raise ValidationError("point set is empty")
    if T > n:
        raise ValidationError(f"T={T} exceeds the number of points {n}")
    return int(T)


def greedy_widths(spec, points, T, pivot_tol=None):
    """
    Greedy n-width upper bounds on a finite point set.

    Args:
        spec: KernelSpec
        points: PointSet or (N, d) array of candidates
        T: Number of widths to compute, 1 <= T <= N
        pivot_tol: Stop when the largest residual drops below pivot_tol**2;
            defaults to 1e-6 * w_0

    Returns:
        GreedyRun. If the run stops early, 'truncated_at' is set and only
        the widths before that step are returned.
    """
    if pivot_tol is not None and not pivot_tol > 0:
        raise ValidationError(f"pivot_tol must be positive, got {pivot_tol}")

    kernel = build_kernel(spec)
    X = as_points(points)
    N = X.shape[0]
    T = _resolve_steps(T, N)

    S = np.array(kernel.diag(X), dtype=np.float64)
    if not np.all(np.isfinite(S)):
        raise NumericalError("kernel diagonal contains non-finite values")

    L = np.zeros((N, T))
    selected = []
    widths = []
    truncated_at = None
    tol2 = None
    clamped = 0

    for t in range(T):
        p = int(np.argmax(S))
        pivot = S[p]
        if tol2 is None:
            tol = pivot_tol if pivot_tol is not None else REL_PIVOT_TOL * np.sqrt(max(pivot, 0.0))
            tol2 = tol * tol
        if pivot <= 0 or pivot < tol2:
            truncated_at = t
            logger.warning("greedy run truncated at step %d of %d: max residual %.3e below tolerance %.3e",
                           t, T, pivot, tol2)
            break

        w = np.sqrt(pivot)
        selected.append(p)
        widths.append(w)

        col = kernel.cross(X, X[p:p + 1])[:, 0]
        if t:
            col -= L[:, :t] @ L[p, :t]
        col /= w
        L[:, t] = col
        S -= col * col
        S[p] = 0.0
        negative = S < 0
        if negative.any():
            clamped += int(negative.sum())
            S[negative] = 0.0

        if (t + 1) % PROGRESS_EVERY == 0:
            logger.info("step %d/%d: w=%.6g", t + 1, T, w)

    log_clamp_once("greedy residuals", clamped)

    k = len(selected)
    selected = np.array(selected, dtype=np.intp)
    return GreedyRun(
        selected=selected,
        widths=np.array(widths),
        chol_rows=np.tril(L[selected, :k]),
        residual=S,
        truncated_at=truncated_at,
    )


def explicit_inverse_widths(spec, points, T):
    """
    Reference engine: the same greedy rule evaluated with an explicit
    inverse K[X_t, X_t]^-1, grown by the block (Schur complement) update

        [[G^-1 + A A^T / s, -A / s], [-A^T / s, 1 / s]],  A = G^-1 k_t(x_t).

    O(T^3 N) arithmetic; intended for small instances and cross-checks.

    Returns:
        Tuple (widths, selected) as arrays
    """
    kernel = build_kernel(spec)
    X = as_points(points)
    N = X.shape[0]
    T = _resolve_steps(T, N)

    diag = np.array(kernel.diag(X), dtype=np.float64)
    p = int(np.argmax(diag))
    tol2 = (REL_PIVOT_TOL ** 2) * diag[p]
    if diag[p] <= 0:
        return np.array([]), np.array([], dtype=np.intp)

    selected = [p]
    widths = [np.sqrt(diag[p])]
    G_inv = np.array([[1.0 / diag[p]]])
    K_sel = kernel.cross(X, X[p:p + 1])

    for _ in range(1, T):
        S = diag - np.einsum("ij,jk,ik->i", K_sel, G_inv, K_sel)
        S[selected] = 0.0
        p = int(np.argmax(S))
        s = S[p]
        if s < tol2:
            break
        A = G_inv @ K_sel[p]
        G_inv = np.block([
            [G_inv + np.outer(A, A) / s, -A[:, None] / s],
            [-A[None, :] / s, np.array([[1.0 / s]])],
        ])
        selected.append(p)
        widths.append(np.sqrt(s))
        K_sel = np.hstack([K_sel, kernel.cross(X, X[p:p + 1])])

    return np.array(widths), np.array(selected, dtype=np.intp)


def residual_at(run, spec, points, t, x):
    """
    Residual S_t(x) = K(x,x) - k_t^T K[X_t, X_t]^-1 k_t against the first t
    selected points of a run.

    Args:
        run: GreedyRun computed on `points`
        spec: KernelSpec used for the run
        points: The PointSet the run was computed on
        t: Number of conditioning points, 0 <= t <= len(run)
        x: A single point, or an (m, d) array of points

    Returns:
        float for a single point, else an array of length m; clamped at 0
    """
    if not 0 <= t <= len(run):
        raise ValidationError(f"t must lie in [0, {len(run)}], got {t}")
    kernel = build_kernel(spec)
    X = as_points(points)
    single = np.ndim(x) <= 1
    Z = as_points(x)
    if Z.shape[1] != X.shape[1]:
        raise DimensionMismatchError(f"point has dimension {Z.shape[1]}, run domain has {X.shape[1]}")

    S = np.array(kernel.diag(Z), dtype=np.float64)
    if t:
        k_t = kernel.cross(X[run.selected[:t]], Z)
        coeffs = solve_triangular(run.chol_rows[:t, :t], k_t, lower=True, check_finite=False)
        S -= np.einsum("ij,ij->j", coeffs, coeffs)
    negative = S < 0
    if negative.any():
        log_clamp_once("residuals", int(negative.sum()))
        S[negative] = 0.0
    return float(S[0]) if single else S


@dataclass(frozen=True)
class Cover:
    """
    A greedy cover of a point set in the canonical metric.

    Attributes:
        centers: Indices of the centers, in selection order
        radius: Covering radius achieved by all centers
        radii: radii[n-1] is the covering radius of the first n centers

    Unpacks as 'centers, radius = cover'.
    """
    centers: np.ndarray
    radius: float
    radii: np.ndarray

    def __iter__(self):
        return iter((self.centers, self.radius))

    def curve(self):
        """The estimated covering function as (n, eps_hat(n)) arrays."""
        return np.arange(1, len(self.radii) + 1), self.radii


def greedy_cover(spec, points, epsilon, max_centers=None):
    """
    Farthest-point cover in the canonical metric rho.

    Starts from the point with the largest K(x, x) (lowest index on ties) and
    repeatedly adds the point farthest from the current centers until every
    point lies within `epsilon` of a center. The number of centers is at most
    the covering number N(epsilon/2) and the result is an epsilon-net.

    Args:
        spec: KernelSpec
        points: PointSet or (N, d) array
        epsilon: Target radius, > 0
        max_centers: Optional cap on the number of centers (the returned
            radius may then exceed epsilon)

    Returns:
        Cover
    """
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    kernel = build_kernel(spec)
    X = as_points(points)
    N = X.shape[0]
    if N < 1:
        raise ValidationError("point set is empty")
    limit = N if max_centers is None else min(int(max_centers), N)
    if limit < 1:
        raise ValidationError(f"max_centers must be positive, got {max_centers}")

    first = int(np.argmax(kernel.diag(X)))
    centers = [first]
    nearest = kernel.distances(X, X[first:first + 1])[:, 0]
    nearest[first] = 0.0
    radii = [float(nearest.max())]

    while radii[-1] > epsilon and len(centers) < limit:
        p = int(np.argmax(nearest))
        centers.append(p)
        np.minimum(nearest, kernel.distances(X, X[p:p + 1])[:, 0], out=nearest)
        nearest[p] = 0.0
        radii.append(float(nearest.max()))
        if len(centers) % (10 * PROGRESS_EVERY) == 0:
            logger.info("cover: %d centers, radius %.6g", len(centers), radii[-1])

    return Cover(np.array(centers, dtype=np.intp), radii[-1], np.array(radii))


def net_radius(spec, ambient_points, centers, reference=None):
    """
    Largest distance from an ambient point to its nearest center.

    Args:
        spec: KernelSpec
        ambient_points: PointSet or array of points to be covered
        centers: Indices of the centers
        reference: Point set the indices refer to; defaults to ambient_points

    Returns:
        max_x min_c rho(x, c)
    """
    centers = np.asarray(centers, dtype=np.intp)
    if centers.size == 0:
        raise ValidationError("net_radius needs at least one center")
    kernel = build_kernel(spec)
    X = as_points(ambient_points)
    C = as_points(reference if reference is not None else ambient_points)[centers]
    check_same_dim(X, C)
    radius = 0.0
    for start in range(0, X.shape[0], NET_CHUNK):
        D = kernel.distances(X[start:start + NET_CHUNK], C)
        radius = max(radius, float(D.min(axis=1).max()))
    return radius


def uncertainty_bars(widths, epsilon):
    """
    Intervals [-log(w_t + eps), -log(w_t)] around a width curve.

    Returns:
        Tuple (lower, upper) of arrays
    """
    widths = np.asarray(widths, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return -np.log(widths + epsilon), -np.log(widths)
