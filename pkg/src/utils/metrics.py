import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionMismatchError


def as_points(X):
    """
    Coerce points to a 2-D float64 array of shape (n, d).

    Args:
        X: A PointSet, a single point (1-D) or an (n, d) array-like

    Returns:
        Array of shape (n, d)
    """
    if hasattr(X, "points"):
        X = X.points
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(1, -1)
    elif X.ndim != 2:
        raise DimensionMismatchError(f"points must be 1-D or 2-D, got shape {X.shape}")
    return X


def check_same_dim(X, Y):
    """Raise if two point arrays have different ambient dimensions."""
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatchError(
            f"ambient dimension mismatch: {X.shape[1]} vs {Y.shape[1]}"
        )


def euclidean_distances(X, Y):
    """
    Calculate the matrix of Euclidean distances between two point arrays.

    Args:
        X: Array of shape (n, d)
        Y: Array of shape (m, d)

    Returns:
        Matrix of shape (n, m) with entries ||x_i - y_j||
    """
    check_same_dim(X, Y)
    return cdist(X, Y, metric="euclidean")


def inner_products(X, Y):
    """Matrix of inner products <x_i, y_j>, shape (n, m)."""
    check_same_dim(X, Y)
    return X @ Y.T


def check_unit_norm(X, tol=1e-9):
    """
    Check that every row of X lies on the unit sphere.

    Args:
        X: Array of shape (n, d)
        tol: Allowed deviation of the Euclidean norm from 1

    Raises:
        DimensionMismatchError: if some row is off the sphere
    """
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > tol)
    if bad.size:
        raise DimensionMismatchError(
            f"zonal kernel requires unit-norm inputs; row {bad[0]} has norm {norms[bad[0]]!r}"
        )
