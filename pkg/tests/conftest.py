import numpy as np
import pytest

from anisomhd import Grid
from anisomhd.randfields import RandomFieldSpec, generate_field


@pytest.fixture(scope="session")
def grid16():
    return Grid(16, 16, 16)


@pytest.fixture(scope="session")
def grid8():
    return Grid(8, 8, 8)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_scalar(grid, seed, band=None, decay=1.0):
    band = band if band is not None else min(grid.dealias_band)
    return generate_field(RandomFieldSpec(grid, band=band, seed=seed, amplitude_decay=decay))
