import numpy as np
import pytest

from dynbc.assembly import ACOUSTIC, KINETIC, BilinearParams, build_block_system
from dynbc.mesh import generate_disc_mesh


@pytest.fixture(scope="session")
def tiny_mesh():
    """34-vertex disc mesh for dense-oracle comparisons."""
    return generate_disc_mesh(0.45)


@pytest.fixture(scope="session")
def coarse_mesh():
    """Mid-size mesh for unit tests that need real operators."""
    return generate_disc_mesh(0.2)


@pytest.fixture(scope="session")
def study_mesh():
    """The canonical coarse study mesh (h ~ 0.09)."""
    return generate_disc_mesh(0.09)


@pytest.fixture(scope="session")
def tiny_kinetic_blocks(tiny_mesh):
    return build_block_system(tiny_mesh, BilinearParams(1.0, 1.0), KINETIC)


@pytest.fixture(scope="session")
def tiny_acoustic_blocks(tiny_mesh):
    return build_block_system(tiny_mesh, BilinearParams(1.0, 1.0), ACOUSTIC)


@pytest.fixture(scope="session")
def coarse_kinetic_blocks(coarse_mesh):
    return build_block_system(coarse_mesh, BilinearParams(1.0, 1.0), KINETIC)


@pytest.fixture(scope="session")
def coarse_acoustic_blocks(coarse_mesh):
    return build_block_system(coarse_mesh, BilinearParams(1.0, 1.0), ACOUSTIC)


def rng(seed=0):
    return np.random.default_rng(seed)
