# src/algorithms/base.py
# Base classes for kernels on point sets

import logging
from abc import ABC, abstractmethod

import numpy as np

from ..utils.metrics import as_points, check_same_dim, euclidean_distances

logger = logging.getLogger(__name__)

# Row-block size used when filling Gram matrices.
GRAM_BLOCK = 1024

_clamp_logged = False


def log_clamp_once(what, count):
    """Record at debug level, once per process, that negative values were clamped."""
    global _clamp_logged
    if count and not _clamp_logged:
        _clamp_logged = True
        logger.debug("clamped %d negative %s to 0 (further clamps not logged)", count, what)


class Kernel(ABC):
    """
    Abstract base class for a positive-semidefinite kernel K(x, y).

    Subclasses implement the cross block K[X, Y] and the diagonal K(x, x);
    Gram fills and the canonical metric are built on top of those two.
    """
    def __init__(self, spec):
        self.spec = spec

    @abstractmethod
    def _cross(self, X, Y):
        """
        Evaluate the kernel block.

        Args:
            X: Array of shape (n, d), already validated
            Y: Array of shape (m, d), already validated

        Returns:
            Matrix of shape (n, m) with entries K(x_i, y_j)
        """
        pass

    @abstractmethod
    def _diag(self, X):
        """
        Evaluate K(x, x) for every row of X.

        Args:
            X: Array of shape (n, d), already validated

        Returns:
            Vector of length n
        """
        pass

    def _validate(self, X):
        """Hook for family-specific input checks (e.g. unit norm)."""
        return X

    def cross(self, X, Y):
        """Kernel block K[X, Y] for point arrays or PointSets."""
        X, Y = as_points(X), as_points(Y)
        check_same_dim(X, Y)
        return self._cross(self._validate(X), self._validate(Y))

    def diag(self, X):
        """Diagonal K(x_i, x_i) for point arrays or PointSets."""
        return self._diag(self._validate(as_points(X)))

    def gram(self, X, Y=None):
        """
        Gram matrix K[X, Y].

        When Y is omitted, only blocks on and above the diagonal are evaluated
        and the lower triangle is mirrored, so the result is exactly symmetric.
        Its diagonal is K(x, x) as returned by diag().

        Args:
            X: Points (n, d) or PointSet
            Y: Optional points (m, d) or PointSet

        Returns:
            Matrix of shape (n, m)
        """
        if Y is not None:
            return self.cross(X, Y)

        X = self._validate(as_points(X))
        n = X.shape[0]
        G = np.empty((n, n))
        for i in range(0, n, GRAM_BLOCK):
            rows = slice(i, min(i + GRAM_BLOCK, n))
            for j in range(i, n, GRAM_BLOCK):
                cols = slice(j, min(j + GRAM_BLOCK, n))
                block = self._cross(X[rows], X[cols])
                if i == j:
                    block = np.triu(block) + np.triu(block, 1).T
                G[rows, cols] = block
                G[cols, rows] = block.T
        np.fill_diagonal(G, self._diag(X))
        return G

    def distances(self, X, Y):
        """
        Canonical metric rho(x, y) = sqrt(K(x,x) + K(y,y) - 2 K(x,y)) for all pairs.

        Args:
            X: Points (n, d)
            Y: Points (m, d)

        Returns:
            Matrix of shape (n, m); the radicand is clamped at 0 and is exactly
            0 for coincident points
        """
        X, Y = as_points(X), as_points(Y)
        check_same_dim(X, Y)
        X, Y = self._validate(X), self._validate(Y)
        sq = self._diag(X)[:, None] + self._diag(Y)[None, :] - 2.0 * self._cross(X, Y)
        negative = sq < 0
        if negative.any():
            log_clamp_once("metric radicands", int(negative.sum()))
            sq[negative] = 0.0
        sq[euclidean_distances(X, Y) == 0.0] = 0.0
        return np.sqrt(sq)

    def __call__(self, x, y):
        """Scalar K(x, y) for two single points."""
        return float(self.cross(x, y)[0, 0])

    def __repr__(self):
        return f"{type(self).__name__}({self.spec.to_text()!r})"
