import numpy as np
import pytest

from uavplace.channel import RayleighParams
from uavplace.density import GaussianDensity, Uniform1D, UniformBox2D
from uavplace.quadrature import QuadratureSpec


@pytest.fixture(scope="session")
def default_q():
    return QuadratureSpec()


@pytest.fixture(scope="session")
def coarse_q2d():
    return QuadratureSpec(nodes_2d=32)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def unit_interval():
    return Uniform1D(0.0, 1.0)


@pytest.fixture(scope="session")
def unit_square():
    return UniformBox2D(0.0, 1.0, 0.0, 1.0)


@pytest.fixture(scope="session")
def std_normal():
    return GaussianDensity(0.0, 1.0)


@pytest.fixture(scope="session")
def rayleigh_h1():
    return RayleighParams(lam=1.0, r=2.0, h=1.0)
