"""Target manifolds and geodesic balls."""

from .manifolds import TargetManifold, Sphere, Ellipsoid, Torus, build_manifold
from .balls import GeodesicBall, clamp_to_ball, project_to_geodesic_ball, resolve_ball

__all__ = [
    "TargetManifold",
    "Sphere",
    "Ellipsoid",
    "Torus",
    "build_manifold",
    "GeodesicBall",
    "clamp_to_ball",
    "project_to_geodesic_ball",
    "resolve_ball",
]
