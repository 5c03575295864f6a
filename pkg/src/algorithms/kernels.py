"""
Kernels K(x, y), the canonical metric rho and Gram blocks.

A kernel is described declaratively by a KernelSpec and turned into
an evaluator with build_kernel(). Specs round-trip through a flat
'key=value' text form used by the CLI and the config file:

    family=exp gamma=1.0 a=1.0
    family=matern nu=0.5 l=1.0
    family=ntk-relu
    family=ntk1 n1=1000 act=relu seed=7

Zonal families ('nngp-step', 'nngp-relu', 'ntk-relu') only accept points
on the unit sphere. Their normalizations use the unit prefactor 1/pi; any
positive rescaling leaves both intrinsic dimensions unchanged.
"""

import functools
import logging
from dataclasses import dataclass, fields, replace
from enum import Enum

import numpy as np
from scipy import special

from .base import Kernel
from ..utils.errors import ValidationError
from ..utils.metrics import as_points, check_same_dim, check_unit_norm, euclidean_distances, inner_products

logger = logging.getLogger(__name__)

UNIT_NORM_TOL = 1e-9


class KernelFamily(str, Enum):
    EXPONENTIAL_TYPE = "exp"
    MATERN = "matern"
    ZONAL_NNGP_STEP = "nngp-step"
    ZONAL_NNGP_RELU = "nngp-relu"
    ZONAL_NTK_RELU = "ntk-relu"
    RANDOM_NNGP1 = "nngp1"
    RANDOM_NTK1 = "ntk1"

    @property
    def is_zonal(self):
        return self in (KernelFamily.ZONAL_NNGP_STEP, KernelFamily.ZONAL_NNGP_RELU,
                        KernelFamily.ZONAL_NTK_RELU)

    @property
    def is_random(self):
        return self in (KernelFamily.RANDOM_NNGP1, KernelFamily.RANDOM_NTK1)


class Activation(str, Enum):
    RELU = "relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"
    ERF = "erf"


# text key -> dataclass field
_TEXT_KEYS = {
    "family": "family",
    "gamma": "gamma",
    "a": "exponent_a",
    "nu": "nu",
    "l": "length_l",
    "n1": "width_n1",
    "act": "activation",
    "seed": "seed",
}
_FIELD_KEYS = {v: k for k, v in _TEXT_KEYS.items()}

_FAMILY_ALIASES = {
    "laplace": (KernelFamily.EXPONENTIAL_TYPE, {"exponent_a": 1.0}),
    "gaussian": (KernelFamily.EXPONENTIAL_TYPE, {"exponent_a": 2.0}),
}

_RELEVANT = {
    KernelFamily.EXPONENTIAL_TYPE: ("gamma", "exponent_a"),
    KernelFamily.MATERN: ("nu", "length_l"),
    KernelFamily.ZONAL_NNGP_STEP: (),
    KernelFamily.ZONAL_NNGP_RELU: (),
    KernelFamily.ZONAL_NTK_RELU: (),
    KernelFamily.RANDOM_NNGP1: ("width_n1", "activation", "seed"),
    KernelFamily.RANDOM_NTK1: ("width_n1", "activation", "seed"),
}


@dataclass(frozen=True)
class KernelSpec:
    """
    Declarative description of a kernel.

    Only the fields relevant to 'family' affect evaluation; the others keep
    their defaults and are omitted from the text form.
    """
    family: KernelFamily = KernelFamily.EXPONENTIAL_TYPE
    gamma: float = 1.0
    exponent_a: float = 1.0
    nu: float = 0.5
    length_l: float = 1.0
    width_n1: int = 1000
    activation: Activation = Activation.RELU
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        object.__setattr__(self, "activation", Activation(self.activation))
        if not self.gamma > 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if not 0 < self.exponent_a <= 2:
            raise ValidationError(f"exponent a must lie in (0, 2], got {self.exponent_a}")
        if not 0 < self.nu < 1:
            raise ValidationError(f"Matern nu must lie in (0, 1), got {self.nu}")
        if not self.length_l > 0:
            raise ValidationError(f"Matern length scale must be positive, got {self.length_l}")
        if int(self.width_n1) != self.width_n1 or self.width_n1 < 1:
            raise ValidationError(f"hidden width n1 must be a positive integer, got {self.width_n1}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValidationError(f"seed must be an unsigned integer, got {self.seed}")
        object.__setattr__(self, "width_n1", int(self.width_n1))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def laplace(cls, gamma=1.0):
        return cls(KernelFamily.EXPONENTIAL_TYPE, gamma=gamma, exponent_a=1.0)

    @classmethod
    def gaussian(cls, gamma=1.0):
        return cls(KernelFamily.EXPONENTIAL_TYPE, gamma=gamma, exponent_a=2.0)

    @classmethod
    def from_text(cls, text):
        """
        Parse the flat 'key=value' form.

        Args:
            text: e.g. "family=exp gamma=1.0 a=1.0"

        Returns:
            KernelSpec

        Raises:
            ValidationError: on unknown keys, malformed tokens or bad values
        """
        values = {}
        for token in text.split():
            key, sep, value = token.partition("=")
            if not sep or not value:
                raise ValidationError(f"malformed kernel token {token!r}; expected key=value")
            if key not in _TEXT_KEYS:
                raise ValidationError(f"unknown kernel key {key!r}; known keys: {sorted(_TEXT_KEYS)}")
            values[_TEXT_KEYS[key]] = value
        if "family" not in values:
            raise ValidationError(f"kernel text {text!r} has no family")

        family = values.pop("family").lower()
        if family in _FAMILY_ALIASES:
            family, implied = _FAMILY_ALIASES[family]
            for name, value in implied.items():
                values.setdefault(name, value)
        try:
            family = KernelFamily(family)
        except ValueError:
            names = [f.value for f in KernelFamily] + list(_FAMILY_ALIASES)
            raise ValidationError(f"unknown kernel family {family!r}; known: {names}") from None

        kwargs = {}
        types = {f.name: f.type for f in fields(cls)}
        for name, value in values.items():
            try:
                if types[name] is int:
                    kwargs[name] = int(value)
                elif types[name] is float:
                    kwargs[name] = float(value)
                else:
                    kwargs[name] = value
            except ValueError:
                raise ValidationError(f"bad value {value!r} for kernel key {_FIELD_KEYS[name]!r}") from None
        try:
            return cls(family=family, **kwargs)
        except ValueError as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError(str(e)) from None

    def to_text(self):
        """Flat 'key=value' form with only the fields used by this family."""
        parts = [f"family={self.family.value}"]
        for name in _RELEVANT[self.family]:
            value = getattr(self, name)
            if isinstance(value, Enum):
                value = value.value
            parts.append(f"{_FIELD_KEYS[name]}={value!r}" if isinstance(value, float)
                         else f"{_FIELD_KEYS[name]}={value}")
        return " ".join(parts)

    def with_seed(self, seed):
        return replace(self, seed=seed)

    def __str__(self):
        return self.to_text()


class StationaryKernel(Kernel):
    """K(x, y) = k(||x - y||) with k(0) = 1."""

    def _profile(self, r):
        raise NotImplementedError

    def _cross(self, X, Y):
        return self._profile(euclidean_distances(X, Y))

    def _diag(self, X):
        return np.ones(X.shape[0])


class ExponentialTypeKernel(StationaryKernel):
    """exp(-gamma * ||x - y||^a); a = 1 is the Laplace kernel, a = 2 the Gaussian."""

    def _profile(self, r):
        return np.exp(-self.spec.gamma * r ** self.spec.exponent_a)


class MaternKernel(StationaryKernel):
    """
    k(r) = (2^(1-nu) / Gamma(nu)) * z^nu * K_nu(z),  z = sqrt(2 nu) r / l,
    with the r = 0 limit k(0) = 1.
    """

    def _profile(self, r):
        nu, l = self.spec.nu, self.spec.length_l
        out = np.ones_like(r)
        pos = r > 0
        z = np.sqrt(2.0 * nu) * r[pos] / l
        coef = 2.0 ** (1.0 - nu) / special.gamma(nu)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = coef * z ** nu * special.kv(nu, z)
        # subnormal z can overflow K_nu; the limit there is 1
        vals[~np.isfinite(vals)] = 1.0
        out[pos] = np.minimum(vals, 1.0)
        return out


class ZonalKernel(Kernel):
    """
    K(x, y) = k(theta) on the unit sphere, theta the angle between x and y.

    The angle is taken from the chord, theta = 2 arcsin(||x - y|| / 2), which
    stays accurate near theta = 0 where arccos(<x, y>) loses half the digits.
    Coincident points therefore get theta = 0 exactly and K(x, x) = k(0).
    """

    def _profile(self, theta):
        raise NotImplementedError

    def _validate(self, X):
        check_unit_norm(X, UNIT_NORM_TOL)
        return X

    def _cross(self, X, Y):
        chord = np.clip(euclidean_distances(X, Y) / 2.0, 0.0, 1.0)
        return self._profile(2.0 * np.arcsin(chord))

    def _diag(self, X):
        return np.full(X.shape[0], float(self._profile(np.zeros(1))[0]))


class NNGPStepKernel(ZonalKernel):
    """Arc-cosine kernel of order 0: (1/pi)(pi - theta)."""

    def _profile(self, theta):
        return (np.pi - theta) / np.pi


class NNGPReLUKernel(ZonalKernel):
    """Arc-cosine kernel of order 1: (1/pi)[cos(theta)(pi - theta) + sin(theta)]."""

    def _profile(self, theta):
        return (np.cos(theta) * (np.pi - theta) + np.sin(theta)) / np.pi


class NTKReLUKernel(ZonalKernel):
    """ReLU NTK: (1/pi)[(2 cos(theta) + 1)(pi - theta) + sin(theta)] + 1."""

    def _profile(self, theta):
        return ((2.0 * np.cos(theta) + 1.0) * (np.pi - theta) + np.sin(theta)) / np.pi + 1.0


_ACTIVATIONS = {
    Activation.RELU: (lambda z: np.maximum(z, 0.0),
                      lambda z: (z > 0).astype(np.float64)),
    Activation.TANH: (np.tanh,
                      lambda z: 1.0 - np.tanh(z) ** 2),
    Activation.SIGMOID: (special.expit,
                         lambda z: special.expit(z) * (1.0 - special.expit(z))),
    Activation.ERF: (special.erf,
                     lambda z: 2.0 / np.sqrt(np.pi) * np.exp(-z * z)),
}


@functools.lru_cache(maxsize=16)
def hidden_weights(seed, width_n1, dim):
    """
    First-layer weights W with i.i.d. N(0, 1) entries, shape (n1, d).

    Cached per (seed, n1, d), so every evaluation in a process sees the same
    read-only array.
    """
    W = np.random.default_rng(seed).standard_normal((width_n1, dim))
    W.setflags(write=False)
    return W


class RandomNNGP1Kernel(Kernel):
    """(1/n1) sigma(W x) . sigma(W y) for a seeded Gaussian first layer."""

    def _features(self, X):
        sigma, _ = _ACTIVATIONS[self.spec.activation]
        W = hidden_weights(self.spec.seed, self.spec.width_n1, X.shape[1])
        return sigma(X @ W.T)

    def _cross(self, X, Y):
        return self._features(X) @ self._features(Y).T / self.spec.width_n1

    def _diag(self, X):
        F = self._features(X)
        return np.einsum("ij,ij->i", F, F) / self.spec.width_n1


class RandomNTK1Kernel(RandomNNGP1Kernel):
    """
    NNGP1(x, y) + <x, y> (1/n1) sum_i sigma'(w_i.x) sigma'(w_i.y), the gradient
    inner product averaged over the output layer.
    """

    def _derivatives(self, X):
        _, dsigma = _ACTIVATIONS[self.spec.activation]
        W = hidden_weights(self.spec.seed, self.spec.width_n1, X.shape[1])
        return dsigma(X @ W.T)

    def _cross(self, X, Y):
        grad = self._derivatives(X) @ self._derivatives(Y).T / self.spec.width_n1
        return super()._cross(X, Y) + inner_products(X, Y) * grad

    def _diag(self, X):
        D = self._derivatives(X)
        grad = np.einsum("ij,ij->i", D, D) / self.spec.width_n1
        return super()._diag(X) + np.einsum("ij,ij->i", X, X) * grad


_KERNEL_CLASSES = {
    KernelFamily.EXPONENTIAL_TYPE: ExponentialTypeKernel,
    KernelFamily.MATERN: MaternKernel,
    KernelFamily.ZONAL_NNGP_STEP: NNGPStepKernel,
    KernelFamily.ZONAL_NNGP_RELU: NNGPReLUKernel,
    KernelFamily.ZONAL_NTK_RELU: NTKReLUKernel,
    KernelFamily.RANDOM_NNGP1: RandomNNGP1Kernel,
    KernelFamily.RANDOM_NTK1: RandomNTK1Kernel,
}


@functools.lru_cache(maxsize=64)
def build_kernel(spec):
    """
    Create the evaluator for a spec.

    Args:
        spec: KernelSpec, or its text form

    Returns:
        A Kernel instance
    """
    if isinstance(spec, str):
        spec = KernelSpec.from_text(spec)
    return _KERNEL_CLASSES[spec.family](spec)


def _single_point(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim > 1:
        if x.shape[0] != 1:
            raise ValidationError(f"expected a single point, got shape {x.shape}")
        x = x[0]
    return np.atleast_1d(x)


def eval_kernel(spec, x, y):
    """
    Evaluate K(x, y) for two points.

    Args:
        spec: KernelSpec
        x: Point (length-d sequence)
        y: Point (length-d sequence)

    Returns:
        The kernel value as a float
    """
    return build_kernel(spec)(_single_point(x), _single_point(y))


def canonical_distance(spec, x, y):
    """
    Canonical metric rho(x, y) = sqrt(K(x,x) + K(y,y) - 2 K(x,y)).

    The radicand is clamped at 0 before the square root.
    """
    return float(build_kernel(spec).distances(_single_point(x), _single_point(y))[0, 0])


def distance_matrix(spec, X, Y):
    """rho(x_i, y_j) for all pairs of two point collections, shape (n, m)."""
    return build_kernel(spec).distances(X, Y)


def eval_gram(spec, X, Y=None):
    """
    Gram matrix [K(x_i, y_j)].

    Args:
        spec: KernelSpec
        X: PointSet or (n, d) array
        Y: PointSet or (m, d) array; omit (or pass X itself) for the symmetric
           Gram of X, which is filled once per unordered pair

    Returns:
        Matrix of shape (n, m)
    """
    kernel = build_kernel(spec)
    if Y is None or Y is X:
        return kernel.gram(X)
    X, Y = as_points(X), as_points(Y)
    check_same_dim(X, Y)
    return kernel.gram(X, Y)
