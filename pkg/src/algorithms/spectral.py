"""
Eigenvalues of the normalized empirical Gram matrix and the lower bounds on
n-widths they imply.

For the uniform measure on M points, the integral operator has the same
nonzero spectrum as (1/M) K[X, X]. Its eigenvalue tails give lower bounds
w_n >= sqrt(sum_{i>n} lambda_i), and the greedy widths bound the spectrum from
above through n * lambda_{2n} <= w_n^2.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigvalsh

from .kernels import eval_gram
from ..utils.errors import NumericalError, ValidationError
from ..utils.metrics import as_points

logger = logging.getLogger(__name__)

TRACE_RTOL = 1e-8
SANDWICH_RTOL = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """
    Descending eigenvalues of (1/M) K[X, X].

    Attributes:
        eigenvalues: Nonnegative eigenvalues, descending
        source_size: M, the number of points
        negatives_clipped: How many round-off negatives were set to 0
        trace: Trace of the normalized Gram matrix, mean K(x, x)
    """
    eigenvalues: np.ndarray
    source_size: int
    negatives_clipped: int = 0
    trace: float = field(default=float("nan"))

    def __len__(self):
        return len(self.eigenvalues)


def gram_eigenvalues(spec, points):
    """
    Full symmetric eigendecomposition of the normalized Gram matrix.

    The trace identity sum(lambda) == mean K(x, x) is checked before negative
    eigenvalues are clipped.

    Args:
        spec: KernelSpec
        points: PointSet or (M, d) array, M >= 1

    Returns:
        Spectrum
    """
    X = as_points(points)
    M = X.shape[0]
    if M < 1:
        raise ValidationError("point set is empty")

    G = eval_gram(spec, X) / M
    if not np.all(np.isfinite(G)):
        raise NumericalError("Gram matrix contains non-finite entries")
    logger.info("eigendecomposition of a %dx%d Gram matrix", M, M)
    try:
        eigenvalues = eigvalsh(G, check_finite=False)[::-1].copy()
    except LinAlgError as e:
        raise NumericalError(f"eigensolver failed: {e}") from e

    trace = float(np.trace(G))
    total = float(np.sum(eigenvalues))
    if abs(total - trace) > TRACE_RTOL * max(abs(trace), np.finfo(float).tiny):
        raise NumericalError(f"trace identity violated: sum of eigenvalues {total!r} vs trace {trace!r}")

    negative = eigenvalues < 0
    clipped = int(negative.sum())
    if clipped:
        logger.debug("clipped %d negative eigenvalues (min %.3e)", clipped, eigenvalues.min())
        eigenvalues[negative] = 0.0
    return Spectrum(eigenvalues, M, clipped, trace)


def ismagilov_lower_bounds(spectrum, n_max=None):
    """
    Lower bounds wL_n = sqrt(sum_{i>n} lambda_i) for n = 0..n_max.

    Tails are accumulated from the smallest eigenvalue upwards.

    Args:
        spectrum: Spectrum
        n_max: Largest n, < M; defaults to M - 1

    Returns:
        Array of length n_max + 1
    """
    M = len(spectrum.eigenvalues)
    if n_max is None:
        n_max = M - 1
    if not 0 <= n_max < M:
        raise ValidationError(f"n_max must lie in [0, {M - 1}], got {n_max}")
    tails = np.cumsum(spectrum.eigenvalues[::-1])[::-1]
    return np.sqrt(tails[:n_max + 1])


@dataclass(frozen=True)
class SandwichReport:
    """
    Consistency of a spectrum with a greedy run on the same points.

    Attributes:
        upper_violation: max over n of n*lambda_{2n} - w_n^2 (<= 0 when consistent)
        lower_violation: max over n of wL_n - w_n (<= 0 when consistent)
        upper_indices: n values where the spectral upper check applies
        lower_indices: n values where the tail lower check applies
        tolerance_upper: Allowed violation for the upper check
        tolerance_lower: Allowed violation for the lower check
    """
    upper_violation: float
    lower_violation: float
    upper_indices: np.ndarray
    lower_indices: np.ndarray
    tolerance_upper: float
    tolerance_lower: float

    @property
    def ok(self):
        return (self.upper_violation <= self.tolerance_upper
                and self.lower_violation <= self.tolerance_lower)

    def as_dict(self):
        return {
            "upper_violation": self.upper_violation,
            "lower_violation": self.lower_violation,
            "upper_checked": int(len(self.upper_indices)),
            "lower_checked": int(len(self.lower_indices)),
            "ok": bool(self.ok),
        }


def sandwich_report(spectrum, run):
    """
    Check n * lambda_{2n} <= w_n^2 and wL_n <= w_n.

    Only indices covered by both the run (before any truncation) and the
    spectrum are checked. lambda_{2n} is the 2n-th largest eigenvalue
    (1-based), so the first check needs n >= 1 and 2n <= M.

    Args:
        spectrum: Spectrum of the run's point set
        run: GreedyRun

    Returns:
        SandwichReport
    """
    M = spectrum.source_size
    if len(run.residual) != M:
        raise ValidationError(
            f"spectrum is over {M} points but the run is over {len(run.residual)}")
    w = np.asarray(run.widths)
    lam = spectrum.eigenvalues
    if len(w) == 0:
        raise ValidationError("greedy run has no widths")

    n_upper = np.arange(1, len(w))
    n_upper = n_upper[2 * n_upper <= M]
    upper = n_upper * lam[2 * n_upper - 1] - w[n_upper] ** 2
    n_lower = np.arange(min(len(w), M))
    lower = ismagilov_lower_bounds(spectrum, n_lower[-1]) - w[n_lower]

    w0 = float(w[0])
    return SandwichReport(
        upper_violation=float(upper.max()) if len(upper) else float("-inf"),
        lower_violation=float(lower.max()),
        upper_indices=n_upper,
        lower_indices=n_lower,
        tolerance_upper=SANDWICH_RTOL * w0 * w0,
        tolerance_lower=SANDWICH_RTOL * w0,
    )
