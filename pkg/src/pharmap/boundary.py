"""Dirichlet boundary data and the named generators that produce it."""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InfeasibleBoundary,
    ParamOutOfRange,
    PointNotOnManifold,
    UnknownGenerator,
    UnsupportedTarget,
)
from .energy import read_map_values
from .geometry import GeodesicBall, Sphere, TargetManifold
from .geometry.balls import BOUNDARY_SLACK
from .mesh import DomainMesh
from .models import BoundarySpec


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Prescribed values on the boundary vertices of a mesh."""
    vertices: np.ndarray  # sorted boundary vertex indices
    values: np.ndarray  # (len(vertices), k) points of N

    def validate(self, target: TargetManifold, ball: GeodesicBall | None = None) -> None:
        """Raise InfeasibleBoundary unless every value is on N (and in the ball when one is given)."""
        try:
            target.check_on_manifold(self.values)
        except PointNotOnManifold as e:
            raise InfeasibleBoundary(f"boundary data off the target: {e}")
        if ball is None:
            return
        if isinstance(target, Sphere):
            dist = target.geodesic_distances(self.values, np.broadcast_to(ball.center, self.values.shape))
        else:
            dist = np.array([target.geodesic_distance(ball.center, y) for y in self.values])
        worst = float(dist.max(initial=0.0))
        if worst > ball.radius + BOUNDARY_SLACK:
            raise InfeasibleBoundary(
                f"boundary data reaches geodesic distance {worst:.6g} from P0, ball radius is {ball.radius:.6g}"
            )

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Copy of values with the boundary rows replaced by the prescribed data."""
        out = np.array(values, dtype=float)
        out[self.vertices] = self.values
        return out


def _arc_angles(mesh: DomainMesh) -> tuple[np.ndarray, np.ndarray]:
    """Boundary loop and the angle 2π·(arc length so far)/(perimeter) at each of its vertices."""
    loop = mesh.boundary_loop()
    pts = mesh.vertices[loop]
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    return loop, 2.0 * math.pi * arc / seg.sum()


def polar_cap_boundary(mesh: DomainMesh, target: TargetManifold, radius: float,
                       center=None) -> BoundaryData:
    """Circle of geodesic radius `radius` about P0, traversed once along the boundary loop."""
    if radius < 0:
        raise ParamOutOfRange(f"cap radius must be >= 0, got {radius}")
    P0 = target.default_center() if center is None else np.asarray(center, dtype=float)
    target.check_on_manifold(P0)
    loop, theta = _arc_angles(mesh)
    E = target.tangent_basis(P0)
    e1 = E[:, 0]
    e2 = E[:, 1] if E.shape[1] > 1 else np.zeros_like(e1)
    V = radius * (np.outer(np.cos(theta), e1) + np.outer(np.sin(theta), e2))
    vals = target.exponential_map(np.broadcast_to(P0, V.shape).copy(), V)
    order = np.argsort(loop)
    return BoundaryData(loop[order], vals[order])


def equator_boundary(mesh: DomainMesh, target: TargetManifold, center=None) -> BoundaryData:
    """The great circle orthogonal to P0 on a sphere."""
    if not isinstance(target, Sphere):
        raise UnsupportedTarget(f"the equator generator needs a sphere, not {target.kind}")
    return polar_cap_boundary(mesh, target, math.pi * target.radius / 2.0, center)


def custom_boundary(mesh: DomainMesh, target: TargetManifold, path: str) -> BoundaryData:
    """Boundary rows of a map-format file."""
    values = read_map_values(Path(path))
    if values.shape != (mesh.n_vertices, target.ambient_dim):
        raise ParamOutOfRange(
            f"{path}: map has shape {values.shape}, mesh needs ({mesh.n_vertices}, {target.ambient_dim})"
        )
    return BoundaryData(mesh.boundary_vertices.copy(), values[mesh.boundary_vertices])


GENERATORS = ("cap", "equator", "custom")


def boundary_generator(name: str, params: BoundarySpec, mesh: DomainMesh, target: TargetManifold,
                       ball: GeodesicBall | None = None) -> BoundaryData:
    """Build boundary data by generator name; `ball` marks an active range constraint."""
    if name not in GENERATORS:
        raise UnknownGenerator(f"unknown boundary generator '{name}' (known: {', '.join(GENERATORS)})")
    if name == "custom":
        if not params.path:
            raise ParamOutOfRange("generator 'custom' needs a path")
        return custom_boundary(mesh, target, params.path)

    if name == "equator" and not isinstance(target, Sphere):
        raise UnsupportedTarget(f"the equator generator needs a sphere, not {target.kind}")
    radius = params.radius if name == "cap" else math.pi * target.radius / 2.0
    if ball is not None and radius >= target.small_range_radius():
        raise ParamOutOfRange(
            f"cap radius {radius:.6g} must be below r_N = {target.small_range_radius():.6g} with a ball constraint"
        )
    if name == "equator":
        return equator_boundary(mesh, target, params.center)
    return polar_cap_boundary(mesh, target, radius, params.center)
