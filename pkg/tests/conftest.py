import numpy as np
import pytest

from pharmap.boundary import polar_cap_boundary
from pharmap.geometry import Ellipsoid, Sphere, Torus
from pharmap.mesh import build_unit_disk_mesh, build_unit_square_grid
from pharmap.models import BallSpec, SolverConfig


NORTH = np.array([0.0, 0.0, 1.0])


@pytest.fixture
def sphere():
    return Sphere()


@pytest.fixture
def ellipsoid():
    return Ellipsoid((2.0, 1.0, 1.0))


@pytest.fixture
def torus():
    return Torus(2.0, 1.0)


@pytest.fixture(params=["sphere", "ellipsoid", "torus"])
def any_target(request):
    return {"sphere": Sphere(), "ellipsoid": Ellipsoid((2.0, 1.0, 1.0)), "torus": Torus(2.0, 1.0)}[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def square16():
    return build_unit_square_grid(16)


@pytest.fixture(scope="session")
def disk4():
    return build_unit_disk_mesh(4)


@pytest.fixture
def cap_boundary(disk4, sphere):
    return polar_cap_boundary(disk4, sphere, 0.3, NORTH)


@pytest.fixture
def small_range_config():
    """p = 2 into the unit sphere, ball of radius 0.5 about the north pole."""
    return SolverConfig(p=2.0, ball=BallSpec(center=NORTH.tolist(), radius=0.5))


def _band(mesh, alpha=1.0):
    x = mesh.vertices[:, 0]
    return np.column_stack([np.sin(alpha * x), np.zeros_like(x), np.cos(alpha * x)])


@pytest.fixture
def band_values():
    """u(x, y) = (sin αx, 0, cos αx) at the mesh vertices; |∇u| ≡ α."""
    return _band
