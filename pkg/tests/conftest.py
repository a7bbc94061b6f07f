import numpy as np
import pytest

from chemotax.fem import P1Space, interpolate
from chemotax.mesh import TriMesh, generate_disk_mesh


def bell_u0(x, y):
    r2 = x * x + y * y
    return 15.0 * np.exp(-r2) * (81.0 - r2)


@pytest.fixture(scope="session")
def unit_triangle():
    return TriMesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]], [True, True, True])


@pytest.fixture(scope="session")
def unit_square():
    return TriMesh(
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        [[0, 1, 2], [0, 2, 3]],
        [True] * 4,
    )


@pytest.fixture(scope="session")
def coarse_disk():
    return generate_disk_mesh(9.0, 8)


@pytest.fixture(scope="session")
def disk40():
    return generate_disk_mesh(9.0, 40)


@pytest.fixture(scope="session")
def coarse_space(coarse_disk):
    return P1Space(coarse_disk)


@pytest.fixture(scope="session")
def coarse_u0(coarse_disk):
    return interpolate(coarse_disk, bell_u0)
