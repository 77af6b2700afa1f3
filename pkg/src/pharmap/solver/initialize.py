"""Starting maps for the descent: constant, discrete harmonic extension, random in the ball."""

import logging

import numpy as np
from scipy.sparse.linalg import spsolve

from ..boundary import BoundaryData
from ..energy import ManifoldMap
from ..errors import ProjectionDidNotConverge
from ..geometry import GeodesicBall, TargetManifold, clamp_to_ball, resolve_ball
from ..mesh import DomainMesh
from ..models import SolverConfig


logger = logging.getLogger(__name__)

INIT_MODES = ("harmonic_extension", "random_in_ball", "constant")


def _project_rows(target: TargetManifold, pts: np.ndarray) -> np.ndarray:
    """nearest_points, row by row when the batch fails; unprojectable rows are NaN."""
    try:
        return target.nearest_points(pts)
    except ProjectionDidNotConverge:
        out = np.full_like(pts, np.nan)
        for i, x in enumerate(pts):
            try:
                out[i] = target.nearest_points(x)[0]
            except ProjectionDidNotConverge:
                pass
        return out


def _clamp(target: TargetManifold, ball: GeodesicBall | None, values: np.ndarray) -> np.ndarray:
    if ball is None or len(values) == 0:
        return values
    return clamp_to_ball(target, ball, values)[0]


def constant_map(mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold, point) -> ManifoldMap:
    P = np.asarray(point, dtype=float)
    target.check_on_manifold(P)
    values = np.broadcast_to(P, (mesh.n_vertices, target.ambient_dim))
    return ManifoldMap(mesh, target, boundary.apply(values))


def harmonic_extension(mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold,
                       ball: GeodesicBall | None = None) -> ManifoldMap:
    """Componentwise discrete Laplace solve, then projection to N and to the ball."""
    interior, bnd = mesh.interior_vertices, boundary.vertices
    values = boundary.apply(np.zeros((mesh.n_vertices, target.ambient_dim)))
    if len(interior):
        K = mesh.stiffness.tocsr()
        rhs = -(K[interior][:, bnd] @ boundary.values)
        sol = np.asarray(spsolve(K[interior][:, interior].tocsc(), rhs)).reshape(len(interior), -1)
        proj = _project_rows(target, sol)
        missing = ~np.isfinite(proj).all(axis=1)
        if missing.any():
            logger.debug("harmonic extension: %d vertex value(s) not projectable, using fallback", int(missing.sum()))
            if ball is not None:
                proj[missing] = ball.center
            else:
                rows = interior[missing]
                d = np.linalg.norm(mesh.vertices[rows, None, :] - mesh.vertices[None, bnd, :], axis=2)
                proj[missing] = boundary.values[np.argmin(d, axis=1)]
        values[interior] = _clamp(target, ball, proj)
    return ManifoldMap(mesh, target, values)


def random_in_ball(mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold,
                   ball: GeodesicBall, seed: int) -> ManifoldMap:
    """Interior values exp_P0(ρ·θ) with ρ uniform in [0, r] and θ a uniform unit tangent direction."""
    rng = np.random.default_rng(seed)
    interior = mesh.interior_vertices
    values = boundary.apply(np.zeros((mesh.n_vertices, target.ambient_dim)))
    if len(interior):
        E = target.tangent_basis(ball.center)
        g = rng.standard_normal((len(interior), E.shape[1]))
        directions = g / np.linalg.norm(g, axis=1, keepdims=True)
        radii = rng.uniform(0.0, ball.radius, size=len(interior))
        V = (radii[:, None] * directions) @ E.T
        pts = target.exponential_map(np.broadcast_to(ball.center, V.shape).copy(), V)
        values[interior] = _clamp(target, ball, pts)
    return ManifoldMap(mesh, target, values)


def initialize_map(mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold,
                   config: SolverConfig, mode: str | None = None, point=None,
                   seed: int | None = None) -> ManifoldMap:
    """Feasible starting map; `mode` defaults to config.init and `seed` to config.seed."""
    mode = mode or config.init
    if mode not in INIT_MODES:
        raise ValueError(f"unknown init mode '{mode}' (known: {', '.join(INIT_MODES)})")
    ball = resolve_ball(target, config.ball)
    boundary.validate(target, ball)

    if mode == "constant":
        if point is None:
            point = config.init_point
        if point is None:
            point = ball.center if ball is not None else target.default_center()
        u = constant_map(mesh, boundary, target, point)
        u.values[mesh.interior_vertices] = _clamp(target, ball, u.values[mesh.interior_vertices])
        return u
    if mode == "harmonic_extension":
        return harmonic_extension(mesh, boundary, target, ball)
    if ball is None:
        raise ValueError("random_in_ball initialization needs a ball constraint")
    return random_in_ball(mesh, boundary, target, ball, config.seed if seed is None else seed)
