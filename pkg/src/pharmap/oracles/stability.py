"""Stability inequality for maps with range in a Euclidean ball B(P0, r) ⊂ R^k:

    ∫ |∇u|^p |φ|²  <=  16 r² ∫ |∇u|^{p−2} |∇φ|²     for φ vanishing on ∂M.
"""

import numpy as np

from ..energy import ManifoldMap
from ..errors import NotSmallRange
from ..geometry import GeodesicBall
from ..mesh import DomainMesh
from ..models import InequalityMargin


RANGE_SLACK = 1e-12


def w1p_norm(mesh: DomainMesh, phi: np.ndarray, p: float) -> float:
    """(Σ_T |T| (|φ̄_T|^p + |∇φ_T|^p))^{1/p} with barycenter values φ̄_T."""
    bar = np.linalg.norm(phi[mesh.triangles].mean(axis=1), axis=1)
    grad = np.linalg.norm(mesh.gradients(phi).reshape(mesh.n_triangles, -1), axis=1)
    return float(np.sum(mesh.triangle_areas * (bar ** p + grad ** p)) ** (1.0 / p))


def random_test_field(mesh: DomainMesh, k: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian interior bumps, one Jacobi averaging pass, unit W^{1,p} norm; zero on ∂M."""
    phi = np.zeros((mesh.n_vertices, k))
    phi[mesh.interior_vertices] = rng.standard_normal((len(mesh.interior_vertices), k))
    A = mesh.adjacency
    degree = np.asarray(A.sum(axis=1)).reshape(-1, 1)
    phi = (phi + A @ phi) / (1.0 + degree)
    phi[mesh.boundary_mask] = 0.0
    norm = w1p_norm(mesh, phi, p)
    return phi / norm if norm > 0 else phi


def stability_sides(u: ManifoldMap, p: float, r: float, phi: np.ndarray) -> tuple[float, float]:
    mesh = u.mesh
    du = u.gradients()
    g2 = np.einsum("tka,tka->t", du, du)
    phi_bar = phi[mesh.triangles].mean(axis=1)
    dphi = mesh.gradients(phi)
    lhs = np.sum(mesh.triangle_areas * g2 ** (p / 2.0) * np.einsum("tk,tk->t", phi_bar, phi_bar))
    rhs = 16.0 * r * r * np.sum(mesh.triangle_areas * g2 ** ((p - 2.0) / 2.0) * np.einsum("tka,tka->t", dphi, dphi))
    return float(lhs), float(rhs)


def stability_check(u: ManifoldMap, ball: GeodesicBall, p: float, phi=None, trials: int = 1,
                    seed: int = 0) -> InequalityMargin:
    """Worst margin over the given test field or `trials` random ones.

    ball.radius is read as the Euclidean radius r of the ball around ball.center
    in R^k that must contain every vertex value.
    """
    r = ball.radius
    reach = float(np.max(np.linalg.norm(u.values - ball.center, axis=1)))
    if reach > r + RANGE_SLACK:
        raise NotSmallRange(f"map reaches Euclidean distance {reach:.6g} from P0, above r = {r:.6g}")
    if phi is not None:
        phi = np.asarray(phi, dtype=float)
        if np.any(phi[u.mesh.boundary_mask]):
            raise ValueError("test field must vanish on boundary vertices")
        fields = [phi]
    else:
        if trials < 1:
            raise ValueError("stability_check needs at least one trial")
        rng = np.random.default_rng(seed)
        fields = [random_test_field(u.mesh, u.target.ambient_dim, p, rng) for _ in range(trials)]

    worst = None
    sides = [stability_sides(u, p, r, field) for field in fields]
    max_ratio = max((lhs / rhs if rhs > 0 else 0.0) for lhs, rhs in sides)
    for t, (lhs, rhs) in enumerate(sides):
        ratio = lhs / rhs if rhs > 0 else 0.0
        m = InequalityMargin(name="stability", lhs=lhs, rhs=rhs, margin=rhs - lhs,
                             scale=max(lhs, rhs, 1.0), seed=seed, samples=len(fields),
                             witness={"trial": t, "r": r, "ratio": ratio, "max_ratio": max_ratio, "euclidean_range": reach})
        if worst is None or m.margin < worst.margin:
            worst = m
    return worst
