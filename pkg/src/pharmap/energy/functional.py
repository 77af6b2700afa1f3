"""The discrete (regularized) p-energy and its Riemannian gradient.

For a P1 map the energy is exactly a sum over triangles:

    E_{p,ε}(u) = (1/p) Σ_T |T| (|∇u|²_T + ε²)^{p/2}
"""

import math

import numpy as np

from ..errors import DegenerateGradient
from .maps import ManifoldMap


def _check_exponent(p: float) -> None:
    if p < 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")


def squared_gradients(u: ManifoldMap) -> tuple[np.ndarray, np.ndarray]:
    """Triangle gradients (T, k, 2) and their squared Frobenius norms (T,)."""
    du = u.gradients()
    return du, np.einsum("tka,tka->t", du, du)


def _densities(s: np.ndarray, p: float, eps: float) -> np.ndarray:
    return (s + eps * eps) ** (p / 2.0)


def p_energy(u: ManifoldMap, p: float, eps: float = 0.0, compensated: bool = True) -> float:
    """(1/p) Σ_T area(T)·(|∇u|²_T + eps²)^{p/2}; eps = 0 gives the exact discrete E_p."""
    _check_exponent(p)
    if eps < 0:
        raise ValueError("eps must be >= 0")
    _, s = squared_gradients(u)
    terms = u.mesh.triangle_areas * _densities(s, p, eps) / p
    return math.fsum(terms) if compensated else float(terms.sum())


def euclidean_gradient(u: ManifoldMap, p: float, eps: float) -> tuple[float, np.ndarray]:
    """Energy and its gradient with respect to all vertex positions (no projection)."""
    _check_exponent(p)
    du, s = squared_gradients(u)
    reg = s + eps * eps
    if p < 2 and np.any(reg == 0.0):
        raise DegenerateGradient(f"|∇u| = 0 on {int(np.sum(reg == 0.0))} triangle(s) with p = {p} < 2 and eps = 0")
    mesh = u.mesh
    energy = math.fsum(mesh.triangle_areas * reg ** (p / 2.0) / p)
    weight = mesh.triangle_areas * reg ** (p / 2.0 - 1.0)
    contrib = np.einsum("t,tka,tia->tik", weight, du, mesh.gradient_coefficients)
    grad = np.zeros_like(u.values)
    np.add.at(grad, mesh.triangles, contrib)
    return energy, grad


def energy_and_gradient(u: ManifoldMap, p: float, eps: float) -> tuple[float, np.ndarray]:
    """Regularized energy and Riemannian gradient (tangent at each vertex, zero on ∂M)."""
    energy, grad = euclidean_gradient(u, p, eps)
    grad = u.target.tangent_project(u.values, grad, check=False)
    grad[u.mesh.boundary_mask] = 0.0
    return energy, grad


def energy_gradient(u: ManifoldMap, p: float, eps: float) -> np.ndarray:
    return energy_and_gradient(u, p, eps)[1]


def gradient_norm(u: ManifoldMap, grad: np.ndarray) -> float:
    """‖grad‖ over interior vertices divided by √(interior vertex count)."""
    n = max(len(u.mesh.interior_vertices), 1)
    return float(np.linalg.norm(grad[u.mesh.interior_vertices]) / math.sqrt(n))
