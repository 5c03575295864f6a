"""
Excess-risk decay of kernel ridge regression constrained to the unit RKHS ball.

Training data are uniform points on S^(d-1) with pure noise labels
Y = noise_amp * U[-1, 1], so the regression function is f* = 0 and the excess
risk of an estimate f is E[f(X)^2]. The constrained estimator is found by
bisecting the ridge parameter until the RKHS norm of the ridge solution
reaches 1.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .domains import sphere_points
from .dimension_fit import FitMethod, fit_loglog
from .kernels import build_kernel
from ..utils.errors import NumericalError, ValidationError
from ..utils.metrics import as_points

logger = logging.getLogger(__name__)

LAMBDA_MIN = 1e-12
LAMBDA_MAX = 1e3
BISECTION_ITERS = 30
NORM_TOL = 1e-3
JITTER = 1e-10
PREDICT_CHUNK = 4096

RISK_COLUMNS = ("n", "mean_excess", "std_excess", "trials", "mean_unreduced", "failed")


@dataclass(frozen=True)
class KrrModel:
    """
    f(x) = sum_i alpha_i K(x_i, x).

    Attributes:
        coefficients: alpha, one per training point
        train_points: Training inputs (n, d)
        lam: Ridge parameter lambda of (G + n lambda I) alpha = y
        rkhs_norm: sqrt(alpha^T G alpha)
        spec: KernelSpec of the expansion
        sub_unit: True when even the smallest lambda gives norm < 1
    """
    coefficients: np.ndarray
    train_points: np.ndarray
    lam: float
    rkhs_norm: float
    spec: object
    sub_unit: bool = False


def _solve(G, lam, y):
    n = len(y)
    A = G + (n * lam) * np.eye(n)
    try:
        factor = cho_factor(A, lower=True, check_finite=False)
    except LinAlgError:
        logger.debug("Cholesky failed at lambda=%.3e, retrying with jitter %.0e", lam, JITTER)
        A[np.diag_indices_from(A)] += JITTER
        try:
            factor = cho_factor(A, lower=True, check_finite=False)
        except LinAlgError as e:
            raise NumericalError(f"ridge system is not positive definite at lambda={lam:.3e}") from e
    alpha = cho_solve(factor, y, check_finite=False)
    if not np.all(np.isfinite(alpha)):
        raise NumericalError(f"ridge solve produced non-finite coefficients at lambda={lam:.3e}")
    return alpha


def _rkhs_norm(alpha, G):
    return math.sqrt(max(float(alpha @ G @ alpha), 0.0))


def _training_data(spec, X, y):
    X = as_points(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(X) < 1 or len(X) != len(y):
        raise ValidationError(f"need |X| == |y| >= 1, got {len(X)} points and {len(y)} labels")
    if not np.all(np.isfinite(y)):
        raise NumericalError("labels contain non-finite values")
    return X, y


def _fit_with_gram(spec, X, y, G, lam):
    alpha = _solve(G, lam, y)
    return KrrModel(alpha, X, float(lam), _rkhs_norm(alpha, G), spec)


def fit_krr(spec, X, y, lam):
    """
    Kernel ridge regression minimizing (1/n) sum (f(x_i) - y_i)^2 + lam ||f||^2.

    Args:
        spec: KernelSpec
        X: Training points (n, d)
        y: Labels (n,)
        lam: Ridge parameter, > 0

    Returns:
        KrrModel
    """
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    X, y = _training_data(spec, X, y)
    G = build_kernel(spec).gram(X)
    return _fit_with_gram(spec, X, y, G, lam)


def fit_constrained_krr(spec, X, y, iters=BISECTION_ITERS, norm_tol=NORM_TOL,
                        lambda_min=LAMBDA_MIN, lambda_max=LAMBDA_MAX):
    """
    Least squares over the unit RKHS ball, via bisection on log(lambda).

    The RKHS norm of the ridge solution is nonincreasing in lambda. If it is
    already <= 1 at lambda_min, that model is returned with 'sub_unit' set.
    Otherwise the returned model is the one with norm closest to 1 from below.
    A failed solve during bisection counts as norm > 1.

    Args:
        spec: KernelSpec
        X: Training points
        y: Labels
        iters: Number of halvings of the log-lambda interval
        norm_tol: Tolerance on |norm - 1| reported in the logs
        lambda_min: Lower end of the search range
        lambda_max: Upper end of the search range

    Returns:
        KrrModel
    """
    if not 0 < lambda_min < lambda_max:
        raise ValidationError(f"need 0 < lambda_min < lambda_max, got [{lambda_min}, {lambda_max}]")
    if iters < 1:
        raise ValidationError(f"bisection iterations must be positive, got {iters}")
    X, y = _training_data(spec, X, y)
    G = build_kernel(spec).gram(X)

    low = _fit_with_gram(spec, X, y, G, lambda_min)
    if low.rkhs_norm <= 1.0:
        if np.any(y):
            logger.warning("norm %.6g at lambda_min=%.1e is below 1; returning the sub-unit interpolant",
                           low.rkhs_norm, lambda_min)
        return replace(low, sub_unit=True)

    best = _fit_with_gram(spec, X, y, G, lambda_max)
    if best.rkhs_norm > 1.0:
        logger.warning("norm %.6g at lambda_max=%.1e still exceeds 1", best.rkhs_norm, lambda_max)
        return best

    lo, hi = math.log(lambda_min), math.log(lambda_max)
    for i in range(iters):
        mid = 0.5 * (lo + hi)
        try:
            model = _fit_with_gram(spec, X, y, G, math.exp(mid))
        except NumericalError:
            lo = mid
            continue
        if model.rkhs_norm > 1.0:
            lo = mid
        else:
            hi = mid
            if model.rkhs_norm > best.rkhs_norm:
                best = model
        logger.debug("bisection %d: lambda=%.4e norm=%.6f", i, model.lam, model.rkhs_norm)

    if 1.0 - best.rkhs_norm > norm_tol:
        logger.warning("constrained fit ended with norm %.6f (tolerance %.1e)", best.rkhs_norm, norm_tol)
    return best


def predict(model, Xtest):
    """
    Evaluate f(x) = sum_i alpha_i K(x_i, x) on test points.

    Returns:
        Array of predictions, one per test point
    """
    kernel = build_kernel(model.spec)
    Z = as_points(Xtest)
    out = np.empty(len(Z))
    for start in range(0, len(Z), PREDICT_CHUNK):
        block = Z[start:start + PREDICT_CHUNK]
        out[start:start + len(block)] = kernel.cross(block, model.train_points) @ model.coefficients
    return out


@dataclass(frozen=True)
class RiskRow:
    n: int
    mean_excess: float
    std_excess: float
    trials: int
    mean_unreduced: float = float("nan")
    failed: int = 0

    def as_tuple(self):
        return (self.n, self.mean_excess, self.std_excess, self.trials, self.mean_unreduced, self.failed)


@dataclass(frozen=True)
class RiskCurve:
    """Mean excess risk per training size, with increasing n."""
    rows: tuple

    @property
    def ns(self):
        return np.array([row.n for row in self.rows], dtype=np.float64)

    @property
    def means(self):
        return np.array([row.mean_excess for row in self.rows])

    def as_array(self):
        return np.array([row.as_tuple() for row in self.rows], dtype=np.float64).reshape(-1, len(RISK_COLUMNS))


def _run_trial(spec, d, n, trial, n_test, noise_amp, seed, iters, norm_tol, lambda_min, lambda_max):
    rng = np.random.default_rng([seed, trial, n])
    X = sphere_points(rng, n, d)
    y = noise_amp * rng.uniform(-1.0, 1.0, n)
    model = fit_constrained_krr(spec, X, y, iters, norm_tol, lambda_min, lambda_max)

    f = predict(model, sphere_points(rng, n_test, d))
    y_test = noise_amp * rng.uniform(-1.0, 1.0, n_test)
    excess = math.fsum(f * f) / n_test
    unreduced = (math.fsum((f - y_test) ** 2) - math.fsum(y_test * y_test)) / n_test
    return excess, unreduced


def _aggregate(n, results, failed):
    excess = [r[0] for r in results]
    unreduced = [r[1] for r in results]
    k = len(excess)
    mean = math.fsum(excess) / k
    std = math.sqrt(math.fsum((e - mean) ** 2 for e in excess) / (k - 1)) if k > 1 else 0.0
    return RiskRow(n, mean, std, k, math.fsum(unreduced) / k, failed)


def excess_risk_experiment(spec, d, sizes, trials=10, n_test=10_000, noise_amp=0.2, seed=0,
                           threads=1, iters=BISECTION_ITERS, norm_tol=NORM_TOL,
                           lambda_min=LAMBDA_MIN, lambda_max=LAMBDA_MAX):
    """
    Mean excess risk of constrained KRR as a function of the training size.

    Each (n, trial) pair draws its data from default_rng([seed, trial, n]), so
    results do not depend on scheduling. A trial whose solve fails is logged
    and counted in the row's 'failed' column.

    Args:
        spec: KernelSpec
        d: Ambient dimension of the sphere S^(d-1), >= 2
        sizes: Strictly increasing training sizes
        trials: Trials per size
        n_test: Fresh test points per trial
        noise_amp: Label noise amplitude
        seed: Base seed
        threads: Worker threads running trials
        iters, norm_tol, lambda_min, lambda_max: See fit_constrained_krr

    Returns:
        RiskCurve
    """
    sizes = [int(n) for n in sizes]
    if int(d) != d or d < 2:
        raise ValidationError(f"sphere dimension d must be an integer >= 2, got {d}")
    if not sizes or any(n < 1 for n in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValidationError(f"sizes must be positive and strictly increasing, got {sizes}")
    if trials < 1 or n_test < 1:
        raise ValidationError("trials and n_test must be positive")
    if noise_amp < 0:
        raise ValidationError(f"noise amplitude must be nonnegative, got {noise_amp}")

    jobs = [(n, trial) for n in sizes for trial in range(trials)]
    with ThreadPoolExecutor(max_workers=max(1, int(threads))) as pool:
        futures = {
            job: pool.submit(_run_trial, spec, int(d), job[0], job[1], n_test, noise_amp, seed,
                             iters, norm_tol, lambda_min, lambda_max)
            for job in jobs
        }

    rows = []
    for n in sizes:
        results, failed = [], 0
        for trial in range(trials):
            try:
                results.append(futures[(n, trial)].result())
            except NumericalError as e:
                failed += 1
                logger.warning("trial %d at n=%d failed: %s", trial, n, e)
        if not results:
            raise NumericalError(f"all {trials} trials failed at n={n}")
        row = _aggregate(n, results, failed)
        logger.info("n=%d: mean excess risk %.6g (std %.3g, %d trials)", n, row.mean_excess, row.std_excess, row.trials)
        rows.append(row)
    return RiskCurve(tuple(rows))


def predicted_risk_slope(d_K):
    """
    Excess-risk decay exponent -(2 + d_K) / (2 (1 + d_K)) for effective dimension d_K.

    Returns -1 for d_K = 0 and tends to -1/2 as d_K grows.
    """
    if d_K < 0:
        raise ValidationError(f"effective dimension must be nonnegative, got {d_K}")
    if math.isinf(d_K):
        return -0.5
    return -(2.0 + d_K) / (2.0 * (1.0 + d_K))


def implied_effective_dimension(slope):
    """Invert predicted_risk_slope: the d_K whose predicted exponent is `slope`."""
    if slope <= -1.0:
        return 0.0
    if slope >= -0.5:
        return math.inf
    return -2.0 * (1.0 + slope) / (1.0 + 2.0 * slope)


def risk_curve_slope(curve):
    """OLS slope of log mean excess risk against log n."""
    return fit_loglog(curve.ns, curve.means, method=FitMethod.OLS)
