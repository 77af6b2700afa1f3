"""Exact vector inequalities for the maps X ↦ |X|^q X.

    monotonicity:  ½(|X|^q + |Y|^q)|X − Y|²  <=  (|X|^q X − |Y|^q Y)·(X − Y)
    lipschitz:     ||X|^q X − |Y|^q Y|       <=  (q + 1)(|X|^q + |Y|^q)|X − Y|
"""

import numpy as np

from ..models import InequalityMargin


def _power_gap(nx: np.ndarray, ny: np.ndarray, d: np.ndarray, S: np.ndarray, q: float) -> np.ndarray:
    """|X|^q − |Y|^q without cancellation when |X| ≈ |Y|."""
    a, b = nx ** q, ny ** q
    with np.errstate(divide="ignore", invalid="ignore"):
        # |X| − |Y| = (X − Y)·(X + Y) / (|X| + |Y|)
        gap = np.einsum("...i,...i->...", d, S) / (nx + ny)
        stable = b * np.expm1(q * np.log1p(gap / ny))
    return np.where((nx > 0) & (ny > 0), stable, a - b)


def _both_sides(X: np.ndarray, Y: np.ndarray, q: float):
    nx = np.linalg.norm(X, axis=-1)
    ny = np.linalg.norm(Y, axis=-1)
    a, b = nx ** q, ny ** q
    d = X - Y
    dn = np.linalg.norm(d, axis=-1)
    gap = _power_gap(nx, ny, d, X + Y, q)
    # |X|^q X − |Y|^q Y = |X|^q (X − Y) + (|X|^q − |Y|^q) Y
    F = a[..., None] * d + gap[..., None] * Y
    mono = (0.5 * (a + b) * dn ** 2, a * dn ** 2 + gap * np.einsum("...i,...i->...", Y, d))
    lip = (np.linalg.norm(F, axis=-1), (q + 1.0) * (a + b) * dn)
    return mono, lip


def _margin(name: str, lhs: float, rhs: float, **witness) -> InequalityMargin:
    return InequalityMargin(name=name, lhs=lhs, rhs=rhs, margin=rhs - lhs,
                            scale=max(abs(lhs), abs(rhs), 1.0), witness=witness)


def _vectors(X, Y, q: float) -> tuple[np.ndarray, np.ndarray]:
    if q < 0:
        raise ValueError("q must be >= 0")
    X = np.atleast_1d(np.asarray(X, dtype=float))
    Y = np.atleast_1d(np.asarray(Y, dtype=float))
    if X.shape != Y.shape or X.ndim != 1:
        raise ValueError("X and Y must be vectors of the same dimension")
    return X, Y


def check_monotonicity_inequality(X, Y, q: float) -> InequalityMargin:
    X, Y = _vectors(X, Y, q)
    (lhs, rhs), _ = _both_sides(X, Y, q)
    return _margin("monotonicity", float(lhs), float(rhs), X=X.tolist(), Y=Y.tolist(), q=q)


def check_lipschitz_inequality(X, Y, q: float) -> InequalityMargin:
    X, Y = _vectors(X, Y, q)
    _, (lhs, rhs) = _both_sides(X, Y, q)
    return _margin("lipschitz", float(lhs), float(rhs), X=X.tolist(), Y=Y.tolist(), q=q)


def _sample_pairs(rng: np.random.Generator, dim: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian pairs with log-uniform scales; a quarter of them nearly equal."""
    X = rng.standard_normal((n, dim)) * 10.0 ** rng.uniform(-2, 2, (n, 1))
    Y = rng.standard_normal((n, dim)) * 10.0 ** rng.uniform(-2, 2, (n, 1))
    close = rng.random(n) < 0.25
    Y[close] = X[close] + rng.standard_normal((int(close.sum()), dim)) * 10.0 ** rng.uniform(-6, -1, (int(close.sum()), 1))
    return X, Y


def inequality_sweep(dims: list[int], qs: list[float], samples: int, seed: int) -> list[InequalityMargin]:
    """Worst margin of both inequalities in every (dim, q) cell over `samples` random pairs."""
    out = []
    cells = [(d, q) for d in dims for q in qs]
    streams = np.random.SeedSequence(seed).spawn(len(cells))
    for (dim, q), stream in zip(cells, streams):
        X, Y = _sample_pairs(np.random.default_rng(stream), dim, samples)
        for name, (lhs, rhs) in zip(("monotonicity", "lipschitz"), _both_sides(X, Y, q)):
            scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)
            i = int(np.argmin((rhs - lhs) / scale))
            m = _margin(f"{name} dim={dim} q={q:g}", float(lhs[i]), float(rhs[i]),
                        X=X[i].tolist(), Y=Y[i].tolist(), q=q, sample=i)
            out.append(m.model_copy(update={"seed": seed, "samples": samples}))
    return out
