"""Discrete Euler–Lagrange residual and map diagnostics.

With A(y)(Y, Z) the normal part of the ambient second derivative, a critical
point of E_p satisfies, for every test field φ vanishing on ∂M,

    ∫ |∇u|^{p-2} ∇u : ∇φ  +  ∫ |∇u|^{p-2} Σ_α A(u)(∂_α u, ∂_α u) · φ  =  0.

On each triangle A is evaluated at the barycenter value projected to N, with
∂_α u tangent-projected there.
"""

import logging
import math

import numpy as np

from ..errors import DistanceNotComputable
from ..geometry import GeodesicBall, Sphere
from ..models import EnergyReport, GradientContinuity
from .functional import energy_and_gradient, gradient_norm, p_energy, squared_gradients
from .maps import ManifoldMap


logger = logging.getLogger(__name__)


def barycenter_points(u: ManifoldMap) -> np.ndarray:
    """Per-triangle barycenter of the vertex values, projected to N."""
    bary = u.values[u.mesh.triangles].mean(axis=1)
    proj = u.target.nearest_points(bary)
    missing = ~np.isfinite(proj).all(axis=1)
    if missing.any():
        proj[missing] = u.values[u.mesh.triangles[missing, 0]]
    return proj


def curvature_terms(u: ManifoldMap, du: np.ndarray) -> np.ndarray:
    """(T, k) sums Σ_α A(ū_T)(∂_α u, ∂_α u) with tangent-projected partials."""
    ub = barycenter_points(u)[:, None, :]
    partials = u.target.tangent_project(ub, du.transpose(0, 2, 1), check=False)
    return u.target.second_fundamental_form(ub, partials, partials, check=False).sum(axis=1)


def _weights(s: np.ndarray, p: float) -> np.ndarray:
    return s ** ((p - 2.0) / 2.0)


def el_residual(u: ManifoldMap, p: float, phi) -> float:
    """Weak Euler–Lagrange defect of u tested against the P1 field phi."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != u.values.shape:
        raise ValueError(f"test field has shape {phi.shape}, expected {u.values.shape}")
    if np.any(phi[u.mesh.boundary_mask]):
        raise ValueError("test field must vanish on boundary vertices")
    du, s = squared_gradients(u)
    w = u.mesh.triangle_areas * _weights(s, p)
    dphi = u.mesh.gradients(phi)
    phi_bar = phi[u.mesh.triangles].mean(axis=1)
    terms = w * (np.einsum("tka,tka->t", du, dphi) + np.einsum("tk,tk->t", curvature_terms(u, du), phi_bar))
    return math.fsum(terms)


def vertex_residuals(u: ManifoldMap, p: float) -> np.ndarray:
    """(V, k) residual vectors r_i: the defect against φ = hat_i·e is r_i · e."""
    mesh = u.mesh
    du, s = squared_gradients(u)
    w = mesh.triangle_areas * _weights(s, p)
    local = np.einsum("tka,tia->tik", du, mesh.gradient_coefficients) + curvature_terms(u, du)[:, None, :] / 3.0
    r = np.zeros_like(u.values)
    np.add.at(r, mesh.triangles, w[:, None, None] * local)
    return r


def hat_norms(u: ManifoldMap, p: float) -> np.ndarray:
    """W^{1,p} norms of the hat functions (one-point quadrature per triangle)."""
    mesh = u.mesh
    gmag = np.linalg.norm(mesh.gradient_coefficients, axis=2)
    local = mesh.triangle_areas[:, None] * ((1.0 / 3.0) ** p + gmag ** p)
    acc = np.zeros(mesh.n_vertices)
    np.add.at(acc, mesh.triangles, local)
    return acc ** (1.0 / p)


def residual_norm(u: ManifoldMap, p: float) -> float:
    """Largest normalized defect over unit tangent test fields supported at one interior vertex."""
    interior = u.mesh.interior_vertices
    if len(interior) == 0:
        return 0.0
    r = u.target.tangent_project(u.values[interior], vertex_residuals(u, p)[interior], check=False)
    return float(np.max(np.linalg.norm(r, axis=1) / hat_norms(u, p)[interior]))


def gradient_continuity(u: ManifoldMap) -> GradientContinuity:
    """Jumps of the constant triangle gradients across interior edges."""
    pairs = u.mesh.interior_edge_triangles
    du = u.gradients()
    if len(pairs) == 0:
        return GradientContinuity(max_jump=0.0, mean_jump=0.0, relative_max_jump=0.0)
    jumps = np.linalg.norm((du[pairs[:, 0]] - du[pairs[:, 1]]).reshape(len(pairs), -1), axis=1)
    scale = float(np.max(np.linalg.norm(du.reshape(len(du), -1), axis=1)))
    max_jump = float(jumps.max())
    return GradientContinuity(
        max_jump=max_jump,
        mean_jump=float(jumps.mean()),
        relative_max_jump=max_jump / scale if scale > 0 else 0.0,
    )


def distances_from(u: ManifoldMap, center: np.ndarray) -> np.ndarray:
    """Geodesic distance of every vertex value from center (chord where shooting is unsupported)."""
    target = u.target
    if isinstance(target, Sphere):
        return target.geodesic_distances(u.values, np.broadcast_to(center, u.values.shape))
    out = np.empty(len(u.values))
    for i, y in enumerate(u.values):
        try:
            out[i] = target.geodesic_distance(center, y)
        except DistanceNotComputable:
            logger.debug("vertex %d: geodesic distance unavailable, using chord", i)
            out[i] = float(np.linalg.norm(y - center))
    return out


def evaluate_map(u: ManifoldMap, p: float, ball: GeodesicBall | None = None,
                 compensated: bool = True) -> EnergyReport:
    """Energy, stationarity, range and gradient-jump figures of u at eps = 0."""
    _, grad = energy_and_gradient(u, p, 0.0)
    _, s = squared_gradients(u)
    range_radius = euclidean_range = 0.0
    if ball is not None:
        range_radius = float(distances_from(u, ball.center).max())
        euclidean_range = float(np.linalg.norm(u.values - ball.center, axis=1).max())
    return EnergyReport(
        p_energy=p_energy(u, p, 0.0, compensated=compensated),
        riemannian_gradient_norm=gradient_norm(u, grad),
        el_residual_norm=residual_norm(u, p),
        max_triangle_gradient=float(np.sqrt(s.max())),
        range_radius=range_radius,
        euclidean_range_radius=euclidean_range,
        continuity=gradient_continuity(u),
    )
