"""Checks of the second fundamental form: finite differences and the Lipschitz-type bound

    |A(y)(Y,Y) − A(z)(Z,Z)|  <=  C [ (|Y|² + |Z|²)|y − z| + (|Y| + |Z|)|Y − Z| ].
"""

import math

import numpy as np

from ..geometry import TargetManifold
from ..models import InequalityMargin


CHUNK = 4096
DENOMINATOR_FLOOR = 1e-14


def sff_finite_difference(m: TargetManifold, y, Y, Z, h: float) -> np.ndarray:
    """Polarized central second difference of t ↦ Π(y + tV), normal part at y."""
    y = np.asarray(y, dtype=float)

    def second(V):
        plus = m.project_to_manifold(y + h * V)
        minus = m.project_to_manifold(y - h * V)
        acc = (plus - 2.0 * y + minus) / (h * h)
        nu = m.normal(y)
        return np.einsum("...i,...i->...", acc, nu)[..., None] * nu

    Y = np.asarray(Y, dtype=float)
    Z = np.asarray(Z, dtype=float)
    return 0.25 * (second(Y + Z) - second(Y - Z))


def sff_convergence_order(m: TargetManifold, hs: list[float], samples: int = 20, seed: int = 0) -> float:
    """Smallest observed order of the finite-difference error over consecutive step sizes."""
    rng = np.random.default_rng(seed)
    y = m.sample_points(rng, samples)
    Y = m.random_tangent(rng, y)
    Z = m.random_tangent(rng, y)
    exact = m.second_fundamental_form(y, Y, Z)
    errors = [float(np.max(np.linalg.norm(sff_finite_difference(m, y, Y, Z, h) - exact, axis=1))) for h in hs]
    orders = [math.log(e0 / e1) / math.log(h0 / h1)
              for (h0, e0), (h1, e1) in zip(zip(hs, errors), zip(hs[1:], errors[1:]))]
    return min(orders)


def _chunk(m: TargetManifold, rng: np.random.Generator, n: int):
    """n samples (y, z, Y, Z): half local pairs with Z ≈ c·Y, half independent."""
    y = m.sample_points(rng, n)
    far = m.sample_points(rng, n)
    step = m.random_tangent(rng, y)
    step /= np.linalg.norm(step, axis=1, keepdims=True)
    delta = 10.0 ** rng.uniform(-6.0, -1.0, n)
    local = rng.random(n) < 0.5
    Y = m.random_tangent(rng, y)
    Y *= (rng.uniform(0.1, 2.0, n) / np.linalg.norm(Y, axis=1))[:, None]
    free = m.random_tangent(rng, far)
    scale = rng.uniform(0.5, 1.5, n)
    paired = rng.random(n) < 0.5

    z = far.copy()
    z[local] = m.nearest_points(y[local] + delta[local, None] * step[local])
    Z = m.tangent_project(z, scale[:, None] * Y, check=False)
    Z[~paired] = m.tangent_project(z[~paired], free[~paired], check=False)
    return y, z, Y, Z


def _sides(m: TargetManifold, y, z, Y, Z):
    A_y = m.second_fundamental_form(y, Y, Y, check=False)
    A_z = m.second_fundamental_form(z, Z, Z, check=False)
    num = np.linalg.norm(A_y - A_z, axis=1)
    nY, nZ = np.linalg.norm(Y, axis=1), np.linalg.norm(Z, axis=1)
    den = (nY ** 2 + nZ ** 2) * np.linalg.norm(y - z, axis=1) + (nY + nZ) * np.linalg.norm(Y - Z, axis=1)
    return num, den


def sff_samples(m: TargetManifold, samples: int, seed: int):
    """The first `samples` draws of the seeded stream; a longer run extends a shorter one."""
    rng = np.random.default_rng(seed)
    parts = []
    drawn = 0
    while drawn < samples:
        parts.append(_chunk(m, rng, CHUNK))
        drawn += CHUNK
    return tuple(np.concatenate(cols)[:samples] for cols in zip(*parts))


def estimate_sff_constant(m: TargetManifold, samples: int, seed: int) -> float:
    """Largest observed ratio of the two sides (pairs with vanishing right side excluded)."""
    if samples < 1000:
        raise ValueError("estimate_sff_constant needs at least 1000 samples")
    num, den = _sides(m, *sff_samples(m, samples, seed))
    keep = den > DENOMINATOR_FLOOR
    return float(np.max(num[keep] / den[keep]))


def sff_pair_margin(m: TargetManifold, y, z, Y, Z, C: float) -> InequalityMargin:
    """Both sides of the bound for one explicit sample."""
    pts = [np.atleast_2d(np.asarray(a, dtype=float)) for a in (y, z, Y, Z)]
    num, den = _sides(m, *pts)
    lhs, rhs = float(num[0]), float(C * den[0])
    return InequalityMargin(name=f"sff {m.kind}", lhs=lhs, rhs=rhs, margin=rhs - lhs,
                            scale=max(lhs, rhs, 1.0), samples=1,
                            witness={"y": pts[0][0].tolist(), "z": pts[1][0].tolist(), "C": C})


def check_sff_inequality(m: TargetManifold, C: float, samples: int, seed: int,
                         headroom: float = 1.05) -> InequalityMargin:
    """Worst margin of the bound with constant headroom·C over a fresh sample stream."""
    y, z, Y, Z = sff_samples(m, samples, seed)
    num, den = _sides(m, y, z, Y, Z)
    rhs = headroom * C * den
    scale = np.maximum(np.maximum(num, rhs), 1.0)
    i = int(np.argmin((rhs - num) / scale))
    return InequalityMargin(
        name=f"sff {m.kind}",
        lhs=float(num[i]),
        rhs=float(rhs[i]),
        margin=float(rhs[i] - num[i]),
        scale=float(scale[i]),
        seed=seed,
        samples=samples,
        witness={"C": C, "headroom": headroom, "sample": i,
                 "y": y[i].tolist(), "z": z[i].tolist(), "Y": Y[i].tolist(), "Z": Z[i].tolist()},
    )
