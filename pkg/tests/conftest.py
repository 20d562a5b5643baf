import numpy as np
import pytest

from stokes_evans.reduction import reduce_system
from stokes_evans.stokes import WaveParameters, stokes_expand


@pytest.fixture(scope="session")
def unit():
    return WaveParameters(1.0, 1.0)


@pytest.fixture(scope="session")
def stokes3(unit):
    return stokes_expand(unit, 3)


@pytest.fixture(scope="session")
def reduced0(stokes3):
    return reduce_system(stokes3, 0.0)


@pytest.fixture(scope="session")
def reduced_n2(stokes3):
    return reduce_system(stokes3, 0.75)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
