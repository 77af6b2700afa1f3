"""Geodesic balls B(P0, r) on a target and projection onto them."""

from dataclasses import dataclass

import numpy as np

from ..errors import BallTooLarge, UnsupportedTarget
from .manifolds import Sphere, TargetManifold


# points within this slack outside the ball are left untouched
BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class GeodesicBall:
    """Closed geodesic ball around a point of the target."""
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius < 0:
            raise ValueError("ball radius must be non-negative")

    def validate_for(self, m: TargetManifold) -> None:
        """Check the ball is usable as a solver constraint on m."""
        m.check_on_manifold(self.center)
        r_N = m.small_range_radius()
        if not self.radius < r_N:
            raise BallTooLarge(f"ball radius {self.radius:.6g} is not below r_N = {r_N:.6g}")


def _fallback_direction(c: np.ndarray) -> np.ndarray:
    e = np.zeros_like(c)
    e[int(np.argmin(np.abs(c)))] = 1.0
    t = e - (e @ c) * c
    return t / np.linalg.norm(t)


def clamp_to_ball(m: TargetManifold, ball: GeodesicBall, y) -> tuple[np.ndarray, np.ndarray]:
    """Project every row of y onto the closed ball; also return which rows moved.

    On the sphere the projection walks back along the great circle from P0
    toward y (slerp). Antipodal points use a fixed direction orthogonal to P0.
    """
    if not isinstance(m, Sphere):
        raise UnsupportedTarget(f"geodesic-ball projection is implemented for spheres only, not {m.kind}")
    y = np.asarray(y, dtype=float)
    m.check_on_manifold(y)
    pts = y.reshape(-1, m.ambient_dim)
    R = m.radius
    c = ball.center / R
    w = pts / R
    dist = m.geodesic_distances(pts, np.broadcast_to(ball.center, pts.shape))
    moved = dist > ball.radius + BOUNDARY_SLACK
    out = pts.copy()
    if moved.any():
        t = w[moved] - np.outer(w[moved] @ c, c)
        tn = np.linalg.norm(t, axis=1, keepdims=True)
        degenerate = tn[:, 0] < 1e-12
        t[~degenerate] /= tn[~degenerate]
        t[degenerate] = _fallback_direction(c)
        angle = ball.radius / R
        out[moved] = R * (np.cos(angle) * c + np.sin(angle) * t)
    return out.reshape(y.shape), moved


def project_to_geodesic_ball(m: TargetManifold, ball: GeodesicBall, y) -> np.ndarray:
    """Nearest point of the closed geodesic ball along the minimizing geodesic from P0."""
    return clamp_to_ball(m, ball, y)[0]


def resolve_ball(m: TargetManifold, spec) -> GeodesicBall | None:
    """Turn a configuration BallSpec into a ball, defaulting to P0 = m.default_center() and r = r_N / 2."""
    if spec is None:
        return None
    center = m.default_center() if spec.center is None else np.asarray(spec.center, dtype=float)
    radius = 0.5 * m.small_range_radius() if spec.radius is None else spec.radius
    return GeodesicBall(center, radius)
