"""
Cross-module invariant checks on small, named instances.

Each check returns a CheckResult holding the worst observed violation
and the tolerance it is held to. run_invariant_suite() runs all checks
on one preset and is what 'nwidth verify' prints.
"""

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domains import generate_cantor, sample_sphere
from .greedy_widths import explicit_inverse_widths, greedy_widths, net_radius, residual_at
from .kernels import KernelFamily, KernelSpec, build_kernel
from .spectral import gram_eigenvalues, sandwich_report
from ..utils.errors import ValidationError
from ..utils.metrics import as_points

logger = logging.getLogger(__name__)

DET_LOG_TOL = 1e-6
ENGINE_RTOL = 1e-6
LIPSCHITZ_SLACK = 1e-9
NET_SLACK = 1e-9


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    violation: float
    tolerance: float
    detail: str = ""

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "violation": self.violation,
                "tolerance": self.tolerance, "detail": self.detail}

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name:<20} violation={self.violation:.3e} tol={self.tolerance:.1e}"
        return f"{text}  {self.detail}" if self.detail else text


def _result(name, violation, tolerance, detail=""):
    violation = float(violation)
    return CheckResult(name, bool(violation <= tolerance), violation, float(tolerance), detail)


def check_monotone(run):
    """Widths never increase."""
    steps = np.diff(run.widths)
    return _result("monotone", steps.max() if len(steps) else 0.0, 0.0)


def check_determinant(run, spec, points):
    """log det K[X_T, X_T] equals sum_t log w_t^2."""
    if run.truncated_at is not None:
        return CheckResult("determinant", True, 0.0, DET_LOG_TOL, "skipped: run truncated")
    X = as_points(points)
    G = build_kernel(spec).gram(X[run.selected])
    sign, logdet = np.linalg.slogdet(G)
    if sign <= 0:
        return CheckResult("determinant", False, float("inf"), DET_LOG_TOL, "selected Gram not positive definite")
    return _result("determinant", abs(logdet - run.log_det), DET_LOG_TOL,
                   f"log det={logdet:.6g}")


def check_engines(run, spec, points):
    """Downdate engine and explicit-inverse engine produce the same widths."""
    reference, _ = explicit_inverse_widths(spec, points, len(run))
    k = min(len(reference), len(run))
    if k == 0:
        return CheckResult("engine-equivalence", False, float("inf"), ENGINE_RTOL, "no widths")
    w = run.widths[:k]
    rel = np.abs(w - reference[:k]) / np.maximum(w, ENGINE_RTOL * run.widths[0])
    detail = "" if len(reference) == len(run) else f"lengths {len(run)} vs {len(reference)}"
    return _result("engine-equivalence", rel.max(), ENGINE_RTOL, detail)


def check_lipschitz(run, spec, points, pairs=1000, seed=0):
    """sqrt(S_t(x)) - sqrt(S_t(y)) <= rho(x, y) for random pairs and steps."""
    X = as_points(points)
    rng = np.random.default_rng(seed)
    steps = rng.integers(0, len(run) + 1, size=pairs)
    i = rng.integers(0, len(X), size=pairs)
    j = rng.integers(0, len(X), size=pairs)
    rho = build_kernel(spec).distances(X, X)[i, j]

    worst = -np.inf
    for t in np.unique(steps):
        mask = steps == t
        root_s = np.sqrt(residual_at(run, spec, X, int(t), X))
        worst = max(worst, float(np.max(root_s[i[mask]] - root_s[j[mask]] - rho[mask])))
    return _result("lipschitz", worst, LIPSCHITZ_SLACK, f"{pairs} pairs")


def check_net_bound(run, spec, points):
    """
    w_t <= max_x min_{s<t} rho(x, x_s): each width is below the net radius of
    the first t greedy-selected points.

    The net is run.selected[:t], not the first t centers of a greedy_cover()
    run. The bound holds for any t points of the set.
    """
    worst = -np.inf
    for t in range(1, len(run)):
        worst = max(worst, run.widths[t] - net_radius(spec, points, run.selected[:t]))
    return _result("net-bound", worst if np.isfinite(worst) else 0.0, NET_SLACK)


def check_sandwich(run, spec, points):
    """n lambda_2n <= w_n^2 and sqrt(sum_{i>n} lambda_i) <= w_n."""
    report = sandwich_report(gram_eigenvalues(spec, points), run)
    return [
        _result("sandwich-upper", report.upper_violation, report.tolerance_upper,
                f"{len(report.upper_indices)} indices"),
        _result("sandwich-lower", report.lower_violation, report.tolerance_lower,
                f"{len(report.lower_indices)} indices"),
    ]


@dataclass(frozen=True)
class Preset:
    name: str
    spec: KernelSpec
    make_points: Callable
    T: int
    description: str = ""


PRESETS = {
    preset.name: preset for preset in (
        Preset("sphere-laplace-small", KernelSpec.laplace(1.0),
               lambda seed: sample_sphere(300, 3, seed), 60, "Laplace, 300 points on S^2"),
        Preset("sphere-gaussian-small", KernelSpec.gaussian(1.0),
               lambda seed: sample_sphere(300, 3, seed), 20, "Gaussian, 300 points on S^2"),
        Preset("sphere-ntk-small", KernelSpec(KernelFamily.ZONAL_NTK_RELU),
               lambda seed: sample_sphere(300, 3, seed), 60, "ReLU NTK, 300 points on S^2"),
        Preset("cantor-laplace-small", KernelSpec.laplace(1.0),
               lambda seed: generate_cantor(8), 40, "Laplace, Cantor set level 8"),
    )
}


def run_checks(spec, points, T, seed=0, pairs=1000):
    """Run every invariant check for one kernel, point set and T."""
    run = greedy_widths(spec, points, T)
    results = [
        check_monotone(run),
        check_determinant(run, spec, points),
        check_engines(run, spec, points),
        check_lipschitz(run, spec, points, pairs=pairs, seed=seed),
        check_net_bound(run, spec, points),
    ]
    results.extend(check_sandwich(run, spec, points))
    for result in results:
        logger.info("%s", result)
    return results


def run_invariant_suite(preset, seed=0):
    """
    Run the invariant checks on a named preset.

    Args:
        preset: Preset or the name of one in PRESETS
        seed: Seed for the point sample and the random Lipschitz pairs

    Returns:
        List of CheckResult
    """
    if isinstance(preset, str):
        try:
            preset = PRESETS[preset]
        except KeyError:
            raise ValidationError(
                f"unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}") from None
    points = preset.make_points(seed)
    logger.info("verify %s: %s, N=%d, T=%d", preset.name, preset.spec, len(points), preset.T)
    return run_checks(preset.spec, points, preset.T, seed=seed)
