"""Shared fixtures for the nwidth test suite."""

import matplotlib

matplotlib.use("Agg")

import numpy as np
import pytest

from src.algorithms.domains import PointSet, generate_cantor, sample_sphere
from src.algorithms.kernels import KernelFamily, KernelSpec


@pytest.fixture
def laplace():
    return KernelSpec.laplace(1.0)


@pytest.fixture
def gaussian():
    return KernelSpec.gaussian(1.0)


@pytest.fixture
def ntk():
    return KernelSpec(KernelFamily.ZONAL_NTK_RELU)


@pytest.fixture
def sphere200():
    return sample_sphere(200, 3, seed=11)


@pytest.fixture
def sphere300():
    return sample_sphere(300, 3, seed=5)


@pytest.fixture
def cantor6():
    return generate_cantor(6)


@pytest.fixture
def cube_points():
    rng = np.random.default_rng(3)
    return PointSet(rng.uniform(0.0, 1.0, size=(150, 2)), "cube-150")
