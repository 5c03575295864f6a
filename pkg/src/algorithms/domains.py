# src/algorithms/domains.py
# Point sets used as domains: fractals, the unit sphere, a Lorenz trajectory, files

import csv
import logging
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from ..utils.errors import NumericalError, PointsFormatError, ValidationError
from ..utils.io import open_input, open_output, provenance_line

logger = logging.getLogger(__name__)

CANTOR_MAX_LEVEL = 26
MAX_GENERATED_POINTS = 2 ** 24

LORENZ_SIGMA = 10.0
LORENZ_RHO = 28.0
LORENZ_BETA = 8.0 / 3.0
LORENZ_MAX_DT = 0.02

WEIERSTRASS_B = 7
WEIERSTRASS_TAIL = 1e-12


@dataclass(frozen=True)
class PointSet:
    """
    An ordered, read-only collection of points in R^d.

    Args:
        points: Array of shape (n, d)
        label: Free-form description of where the points came from
    """
    points: np.ndarray
    label: str = ""
    ambient_dim: int = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise ValidationError(f"points must form an (n, d) array, got shape {pts.shape}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "ambient_dim", pts.shape[1])

    def __len__(self):
        return self.points.shape[0]

    def __getitem__(self, index):
        return self.points[index]

    def subset(self, indices, label=None):
        """New PointSet with the rows at `indices`, in that order."""
        indices = np.asarray(indices, dtype=np.intp)
        return PointSet(self.points[indices], label or f"{self.label}[{len(indices)}]")

    def sample(self, size, seed):
        """Draw `size` distinct points uniformly at random (deterministic given seed)."""
        if not 1 <= size <= len(self):
            raise ValidationError(f"sample size must lie in [1, {len(self)}], got {size}")
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(len(self), size=size, replace=False))
        return self.subset(idx, f"{self.label}-sample{size}")


def _check_level(level, branching, limit, name):
    if int(level) != level or level < 1:
        raise ValidationError(f"{name} level must be a positive integer, got {level}")
    if branching ** level > limit:
        raise ValidationError(f"{name} level {level} gives {branching}**{level} points, above {limit}")
    return int(level)


def _self_similar(offsets, level):
    """
    Lower corners of the surviving cells after `level` subdivisions.

    Each step maps the current set by x -> x/3 + o/3 for every offset o, so
    level L is the image of level L-1 under the contractions.
    """
    offsets = np.asarray(offsets, dtype=np.float64)
    pts = np.zeros((1, offsets.shape[1]))
    for _ in range(level):
        pts = (pts[None, :, :] / 3.0 + offsets[:, None, :] / 3.0).reshape(-1, offsets.shape[1])
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def generate_cantor(level):
    """
    Left endpoints of the 2**level intervals of the middle-thirds Cantor set.

    Args:
        level: Construction depth, 1 <= level <= 26

    Returns:
        PointSet in R^1, sorted ascending
    """
    level = _check_level(level, 2, 2 ** CANTOR_MAX_LEVEL, "Cantor")
    return PointSet(_self_similar([[0.0], [2.0]], level), f"cantor-L{level}")


def generate_sierpinski_carpet(level):
    """
    Lower corners of the 8**level surviving squares of the Sierpinski carpet.

    Args:
        level: Subdivision depth with 8**level <= 2**24

    Returns:
        PointSet in [0, 1]^2
    """
    level = _check_level(level, 8, MAX_GENERATED_POINTS, "carpet")
    offsets = [(i, j) for i, j in product(range(3), repeat=2) if (i, j) != (1, 1)]
    return PointSet(_self_similar(offsets, level), f"carpet-L{level}")


def generate_menger(level):
    """
    Lower corners of the 20**level surviving cubes of the Menger sponge.

    A subcube survives when at most one of its coordinates is the middle third.
    """
    level = _check_level(level, 20, MAX_GENERATED_POINTS, "sponge")
    offsets = [o for o in product(range(3), repeat=3) if sum(c == 1 for c in o) <= 1]
    return PointSet(_self_similar(offsets, level), f"menger-L{level}")


def weierstrass_terms(a, tail=WEIERSTRASS_TAIL):
    """Smallest number of series terms with a**terms < tail."""
    return max(1, math.floor(math.log(tail) / math.log(a)) + 1)


def generate_weierstrass(num_points, a=None, b=WEIERSTRASS_B, terms=None):
    """
    Graph of the Weierstrass function W(x) = sum_{n<terms} a^n cos(b^n pi x).

    Args:
        num_points: Number of equally spaced abscissae in [0, 1]
        a: Amplitude ratio in (0, 1); defaults to b**-0.5 (box dimension 1.5)
        b: Integer frequency ratio >= 2
        terms: Series length; defaults to the smallest with a**terms < 1e-12

    Returns:
        PointSet of (x, W(x)) pairs in R^2
    """
    if int(num_points) != num_points or num_points < 1:
        raise ValidationError(f"num_points must be a positive integer, got {num_points}")
    if int(b) != b or b < 2:
        raise ValidationError(f"b must be an integer >= 2, got {b}")
    if a is None:
        a = b ** -0.5
    if not 0 < a < 1:
        raise ValidationError(f"a must lie in (0, 1), got {a}")
    if a * b <= 1:
        raise ValidationError(f"a*b must exceed 1 for a fractal graph, got {a * b}")
    if terms is None:
        terms = weierstrass_terms(a)
    if int(terms) != terms or terms < 1:
        raise ValidationError(f"terms must be a positive integer, got {terms}")

    xs = np.linspace(0.0, 1.0, int(num_points))
    ws = np.zeros_like(xs)
    for n in range(int(terms)):
        ws += a ** n * np.cos(float(b) ** n * np.pi * xs)
    return PointSet(np.column_stack([xs, ws]), f"weierstrass-a{a:.4g}-b{int(b)}")


def _lorenz_rhs(x, y, z):
    return (LORENZ_SIGMA * (y - x),
            x * (LORENZ_RHO - z) - y,
            x * y - LORENZ_BETA * z)


def _rk4_step(x, y, z, h):
    k1x, k1y, k1z = _lorenz_rhs(x, y, z)
    k2x, k2y, k2z = _lorenz_rhs(x + 0.5 * h * k1x, y + 0.5 * h * k1y, z + 0.5 * h * k1z)
    k3x, k3y, k3z = _lorenz_rhs(x + 0.5 * h * k2x, y + 0.5 * h * k2y, z + 0.5 * h * k2z)
    k4x, k4y, k4z = _lorenz_rhs(x + h * k3x, y + h * k3y, z + h * k3z)
    return (x + h * (k1x + 2 * k2x + 2 * k3x + k4x) / 6,
            y + h * (k1y + 2 * k2y + 2 * k3y + k4y) / 6,
            z + h * (k1z + 2 * k2z + 2 * k3z + k4z) / 6)


def integrate_lorenz(init, dt, steps):
    """
    Classical 4th-order Runge-Kutta integration of the Lorenz system.

    Args:
        init: Initial state (x, y, z)
        dt: Step size
        steps: Number of steps

    Returns:
        Array of shape (steps + 1, 3) with the initial state first

    Raises:
        NumericalError: if the state becomes non-finite
    """
    x, y, z = (float(v) for v in init)
    out = np.empty((steps + 1, 3))
    out[0] = x, y, z
    for i in range(1, steps + 1):
        x, y, z = _rk4_step(x, y, z, dt)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            raise NumericalError(f"Lorenz state became non-finite at step {i} (dt={dt})")
        out[i] = x, y, z
    return out


def generate_lorenz(num_points, dt=0.005, burn_in=10_000, init=(1.0, 1.0, 1.0)):
    """
    Points on a Lorenz trajectory (sigma=10, rho=28, beta=8/3), rescaled to [0, 1]^3.

    Args:
        num_points: Number of recorded states
        dt: RK4 step, at most 0.02
        burn_in: Steps discarded before recording
        init: Initial state

    Returns:
        PointSet in [0, 1]^3; each coordinate is affinely rescaled independently
    """
    if int(num_points) != num_points or num_points < 1:
        raise ValidationError(f"num_points must be a positive integer, got {num_points}")
    if not 0 < dt <= LORENZ_MAX_DT:
        raise ValidationError(f"dt must lie in (0, {LORENZ_MAX_DT}], got {dt}")
    if int(burn_in) != burn_in or burn_in < 0:
        raise ValidationError(f"burn_in must be a nonnegative integer, got {burn_in}")
    if len(init) != 3:
        raise ValidationError(f"init must be a 3-vector, got {init}")

    logger.info("integrating Lorenz system: %d + %d steps, dt=%g", burn_in, num_points, dt)
    start = integrate_lorenz(init, dt, int(burn_in))[-1]
    traj = integrate_lorenz(start, dt, int(num_points) - 1)

    lo, hi = traj.min(axis=0), traj.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return PointSet((traj - lo) / span, f"lorenz-dt{dt:g}")


def sphere_points(rng, n, d):
    """n uniform points on S^(d-1) from a numpy Generator (normalized Gaussians)."""
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_sphere(n, d, seed=0):
    """
    i.i.d. uniform points on the unit sphere S^(d-1).

    Args:
        n: Number of points
        d: Ambient dimension, at least 2
        seed: Seed for numpy.random.default_rng

    Returns:
        PointSet of unit vectors in R^d
    """
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    if int(d) != d or d < 2:
        raise ValidationError(f"sphere dimension d must be an integer >= 2, got {d}")
    rng = np.random.default_rng(seed)
    return PointSet(sphere_points(rng, int(n), int(d)), f"sphere-d{int(d)}-n{int(n)}-s{seed}")


def save_points(points, path, run_config=None):
    """
    Write a PointSet as CSV: one point per line, comma-separated.

    The file starts with a '# dim=<d> label=<s>' header, followed by the
    provenance line when a RunConfig is given.
    """
    label = points.label.replace(" ", "_") or "points"
    with open_output(path) as f:
        f.write(f"# dim={points.ambient_dim} label={label}\n")
        line = provenance_line(run_config)
        if line:
            f.write(f"# {line}\n")
        np.savetxt(f, points.points, delimiter=",", fmt="%.17g")


def _parse_header(text):
    header = {}
    for token in text.split():
        key, sep, value = token.partition("=")
        if sep and key in ("dim", "label"):
            header[key] = value
    return header


def load_points(path):
    """
    Read a PointSet from CSV.

    Args:
        path: File path, or '-' for stdin

    Returns:
        PointSet

    Raises:
        PointsFormatError: on unparsable values, ragged rows, a dim header
            that disagrees with the rows, or a file without points
    """
    header = {}
    rows = []
    width = None
    with open_input(path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "dim" not in header:
                    header = _parse_header(line.lstrip("# "))
                continue
            record = next(csv.reader([line]))
            if width is None:
                try:
                    width = int(header.get("dim", len(record)))
                except ValueError:
                    raise PointsFormatError(f"bad dim header {header['dim']!r}", line=lineno) from None
            if len(record) != width:
                raise PointsFormatError(
                    f"row has {len(record)} coordinates, expected {width}", line=lineno)
            try:
                rows.append([float(v) for v in record])
            except ValueError:
                raise PointsFormatError(f"cannot parse {line!r} as numbers", line=lineno) from None
    if not rows:
        raise PointsFormatError(f"{path}: file contains no points")
    return PointSet(np.array(rows), header.get("label", str(path)))
