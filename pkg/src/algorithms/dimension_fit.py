"""
Dimension estimates from log-log slopes.

Width curves give the effective dimension d_K as the reciprocal slope of
-log w_t against log t. Covering curves give the metric dimension d_rho as the
slope of log n against log(1/eps(n)). Slopes are fitted with RANSAC (default)
or ordinary least squares.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy import stats
from sklearn.linear_model import LinearRegression, RANSACRegressor

from .kernels import KernelFamily
from ..utils.errors import DegenerateFitError, ValidationError

logger = logging.getLogger(__name__)

SLOPE_TOL = 1e-12
WINDOW_LO = 300
WINDOW_HI = 500
# Covering radii within this relative distance of the previous plateau are merged into it.
PLATEAU_RTOL = 1e-3


class FitMethod(str, Enum):
    RANSAC = "ransac"
    OLS = "ols"


@dataclass(frozen=True)
class RansacParams:
    iterations: int = 1000
    residual_threshold: float = 0.05
    min_samples: int = 2

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError(f"RANSAC iterations must be positive, got {self.iterations}")
        if not self.residual_threshold > 0:
            raise ValidationError(f"residual threshold must be positive, got {self.residual_threshold}")
        if self.min_samples < 2:
            raise ValidationError("RANSAC needs at least 2 samples per hypothesis")


@dataclass(frozen=True)
class SlopeFit:
    """
    A straight-line fit y' = slope * x' + intercept in log-log coordinates.

    Attributes:
        slope: Fitted slope
        intercept: Fitted intercept
        method: FitMethod used
        window: Inclusive (lo, hi) abscissa range that was fitted
        inlier_mask: RANSAC inliers among the usable points (None for OLS)
        residual_threshold: RANSAC inlier threshold in log units
        iterations: RANSAC hypotheses drawn
        seed: RANSAC random state
        n_points: Usable points in the window
        dropped: Points in the window dropped for nonpositive values
    """
    slope: float
    intercept: float
    method: FitMethod
    window: tuple
    inlier_mask: Optional[np.ndarray] = None
    residual_threshold: Optional[float] = None
    iterations: Optional[int] = None
    seed: Optional[int] = None
    n_points: int = 0
    dropped: int = 0

    @property
    def inliers(self):
        return self.n_points if self.inlier_mask is None else int(self.inlier_mask.sum())

    def as_dict(self):
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "method": self.method.value,
            "window": list(self.window),
            "inliers": self.inliers,
            "points": self.n_points,
            "dropped": self.dropped,
        }


@dataclass(frozen=True)
class DimensionEstimate:
    """A dimension together with the fit it came from."""
    dimension: float
    fit: SlopeFit

    def as_dict(self):
        report = self.fit.as_dict()
        report["dimension"] = self.dimension
        return report


def default_window(T):
    """
    Default fit window, inclusive, for a curve indexed t = 0..T-1.

    [300, 500] (clipped to T - 1) for long curves, otherwise the upper half
    [ceil(T/2), T - 1]. Index 0 is never included.
    """
    if T >= WINDOW_HI:
        return WINDOW_LO, min(WINDOW_HI, T - 1)
    return max(1, math.ceil(T / 2)), T - 1


def parse_window(text):
    """Parse 'A:B' into an inclusive (A, B) pair."""
    try:
        lo, hi = (int(part) for part in text.split(":"))
    except ValueError:
        raise ValidationError(f"window must look like A:B, got {text!r}") from None
    if lo > hi:
        raise ValidationError(f"window start {lo} exceeds end {hi}")
    return lo, hi


def _fit_line(xl, yl, window, method, params, seed, dropped):
    method = FitMethod(method)
    if len(xl) < 2:
        raise DegenerateFitError(f"need at least 2 usable points in window {window}, got {len(xl)}")
    if np.all(xl == xl[0]):
        raise DegenerateFitError("all abscissae are equal")

    if method is FitMethod.OLS:
        result = stats.linregress(xl, yl)
        return SlopeFit(float(result.slope), float(result.intercept), method, window,
                        n_points=len(xl), dropped=dropped)

    params = params or RansacParams()
    ransac = RANSACRegressor(
        estimator=LinearRegression(),
        min_samples=params.min_samples,
        residual_threshold=params.residual_threshold,
        max_trials=params.iterations,
        stop_probability=1.0,
        random_state=seed,
    )
    try:
        ransac.fit(xl.reshape(-1, 1), yl)
    except ValueError as e:
        raise DegenerateFitError(f"RANSAC found no consensus: {e}") from e

    mask = np.asarray(ransac.inlier_mask_, dtype=bool)
    if mask.sum() < 2:
        raise DegenerateFitError("RANSAC consensus has fewer than 2 inliers")
    slope = float(ransac.estimator_.coef_[0])
    intercept = float(ransac.estimator_.intercept_)
    if not np.isfinite(slope):
        raise DegenerateFitError("RANSAC produced a non-finite slope")
    logger.debug("RANSAC: %d/%d inliers, slope %.6g", mask.sum(), len(mask), slope)
    return SlopeFit(slope, intercept, method, window, mask, params.residual_threshold,
                    params.iterations, seed, len(xl), dropped)


def _window_slice(window, length):
    lo, hi = window
    if lo < 0 or hi >= length or lo > hi:
        raise ValidationError(f"window [{lo}, {hi}] is outside the valid indices [0, {length - 1}]")
    return slice(lo, hi + 1)


def fit_loglog(xs, ys, window=None, method=FitMethod.RANSAC, ransac_params=None, seed=0):
    """
    Fit log(ys) against log(xs) on an index window.

    Args:
        xs: Positive abscissae
        ys: Positive ordinates (same length)
        window: Inclusive (lo, hi) index range; defaults to the whole curve
        method: FitMethod or its string value
        ransac_params: RansacParams (RANSAC only)
        seed: RANSAC random state

    Returns:
        SlopeFit

    Raises:
        DegenerateFitError: Fewer than 2 usable points, or all x equal
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValidationError(f"xs and ys must be 1-D of equal length, got {xs.shape} and {ys.shape}")
    window = tuple(window) if window is not None else (0, len(xs) - 1)
    sl = _window_slice(window, len(xs))
    x, y = xs[sl], ys[sl]
    usable = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    dropped = int((~usable).sum())
    if dropped:
        logger.info("dropped %d nonpositive points before the log transform", dropped)
    return _fit_line(np.log(x[usable]), np.log(y[usable]), window, method, ransac_params, seed, dropped)


def _widths_of(run_or_widths):
    return np.asarray(getattr(run_or_widths, "widths", run_or_widths), dtype=np.float64)


def estimate_effective_dimension(run_or_widths, window=None, method=FitMethod.RANSAC, params=None, seed=0):
    """
    d_K^emp from a width curve: the reciprocal slope of -log w_t on log t.

    Args:
        run_or_widths: GreedyRun or the widths w_0, w_1, ...
        window: Inclusive t range; defaults to default_window(). A window
            extending past a truncated curve is cut to the available widths.

    Returns:
        DimensionEstimate; the dimension is inf when the slope is <= 0
    """
    w = _widths_of(run_or_widths)
    T = len(w)
    if window is None:
        window = default_window(T)
    lo, hi = window
    if hi >= T:
        logger.warning("fit window [%d, %d] cut to the %d available widths", lo, hi, T)
        hi = T - 1
    if lo < 1:
        lo = 1
    window = (lo, hi)
    sl = _window_slice(window, T)

    t = np.arange(T, dtype=np.float64)[sl]
    wt = w[sl]
    usable = wt > 0
    dropped = int((~usable).sum())
    if dropped:
        logger.info("dropped %d zero widths before the log transform", dropped)
    fit = _fit_line(np.log(t[usable]), -np.log(wt[usable]), window, method, params, seed, dropped)
    dimension = 1.0 / fit.slope if fit.slope > SLOPE_TOL else math.inf
    return DimensionEstimate(dimension, fit)


def effective_dimension(run_or_widths, window=None, method=FitMethod.RANSAC, params=None, seed=0):
    """d_K^emp as a float; see estimate_effective_dimension()."""
    return estimate_effective_dimension(run_or_widths, window, method, params, seed).dimension


def collapse_plateaus(ns, radii, rtol=PLATEAU_RTOL):
    """
    Keep only the first n of every plateau of the covering curve.

    A radius starts a new plateau when it lies more than `rtol` (relative)
    below the radius of the last kept point, so round-off along a plateau
    does not split it.
    """
    ns = np.asarray(ns)
    radii = np.asarray(radii, dtype=np.float64)
    keep = []
    last = np.inf
    for i, r in enumerate(radii):
        if r < last * (1.0 - rtol):
            keep.append(i)
            last = r
    keep = np.array(keep, dtype=np.intp)
    return ns[keep], radii[keep]


def estimate_metric_dimension(cover_curve, window=None, method=FitMethod.RANSAC, params=None, seed=0):
    """
    d_rho^emp from a covering curve: the slope of log n on log(1/eps(n)).

    Args:
        cover_curve: Pair (ns, radii), e.g. from Cover.curve()
        window: Inclusive range of n; defaults to default_window()
            applied to n = 0..max(n)

    Returns:
        DimensionEstimate
    """
    ns, radii = cover_curve
    ns = np.asarray(ns, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    if ns.shape != radii.shape or ns.ndim != 1 or len(ns) == 0:
        raise ValidationError("cover curve must be two 1-D arrays of equal nonzero length")
    if window is None:
        window = default_window(int(ns.max()) + 1)
    lo, hi = window
    if lo > hi:
        raise ValidationError(f"window start {lo} exceeds end {hi}")
    ns, radii = collapse_plateaus(ns, radii)
    inside = (ns >= lo) & (ns <= hi)
    ns, radii = ns[inside], radii[inside]
    usable = radii > 0
    dropped = int((~usable).sum())
    fit = _fit_line(-np.log(radii[usable]), np.log(ns[usable]), (lo, hi), method, params, seed, dropped)
    return DimensionEstimate(fit.slope, fit)


def metric_dimension(cover_curve, window=None, method=FitMethod.RANSAC, params=None, seed=0):
    """d_rho^emp as a float; see estimate_metric_dimension()."""
    return estimate_metric_dimension(cover_curve, window, method, params, seed).dimension


def reference_dimensions(spec, d):
    """
    Known (d_rho, d_K) on the sphere S^(d-1) for the tabulated kernel families.

    Returns:
        Tuple (d_rho, d_K), or None when no reference is tabulated
    """
    if d < 2:
        raise ValidationError(f"sphere dimension d must be >= 2, got {d}")
    m = d - 1
    family = spec.family
    if family is KernelFamily.EXPONENTIAL_TYPE:
        if spec.exponent_a == 2.0:
            return float(m), 0.0
        if spec.exponent_a <= 1.0:
            value = 2.0 * m / spec.exponent_a
            return value, value
        return None
    if family in (KernelFamily.ZONAL_NTK_RELU, KernelFamily.ZONAL_NNGP_STEP):
        return 2.0 * m, 2.0 * m
    if family is KernelFamily.ZONAL_NNGP_RELU:
        return float(m), 2.0 * m / 3.0
    return None
