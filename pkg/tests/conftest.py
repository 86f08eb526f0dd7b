import numpy as np
import pytest

from voxvie.grid import Physics, VoxelGrid
from voxvie.kernel import assemble_kernel


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)


@pytest.fixture(scope="session")
def physics():
    return Physics.from_wavelength(1550e-9)


@pytest.fixture(scope="session")
def small_grid():
    return VoxelGrid(4, 3, 2, 0.05)


@pytest.fixture(scope="session")
def small_kernel(small_grid):
    return assemble_kernel(small_grid, 2 * np.pi)


@pytest.fixture(scope="session")
def cube_grid():
    return VoxelGrid(3, 3, 3, 0.05)


@pytest.fixture(scope="session")
def cube_kernel(cube_grid):
    return assemble_kernel(cube_grid, 2 * np.pi)


def random_field(rng, grid):
    return rng.normal(size=grid.n_unknowns) + 1j * rng.normal(size=grid.n_unknowns)
