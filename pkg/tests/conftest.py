import numpy as np
import pytest

from layerflow import make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session")
def grid2d():
    return make_grid(2, 1.0, 2 * np.pi, 16, 17)


@pytest.fixture(scope="session")
def grid2d_fine():
    return make_grid(2, 1.0, 2 * np.pi, 32, 33)


@pytest.fixture(scope="session")
def grid3d():
    return make_grid(3, 1.0, 2 * np.pi, 8, 9)
