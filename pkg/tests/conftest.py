import numpy as np
import pytest

from multifreq import TorusGrid


@pytest.fixture(scope="session")
def default_grid():
    return TorusGrid()


@pytest.fixture(scope="session")
def small_grid():
    # coarse grid where O(M^2) brute-force transforms stay cheap
    return TorusGrid(period=8, samples=64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
