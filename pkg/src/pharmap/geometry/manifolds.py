"""Embedded target manifolds N ⊂ R^k given as regular level sets F = 0.

All targets here are hypersurfaces, so the unit normal ν = ∇F/|∇F| spans the
normal space and the second fundamental form is

    A(y)(Y, Z) = -(Yᵀ H(y) Z) / |∇F(y)| · ν(y),      H = Hess F,

the normal part of the ambient acceleration of curves on N (sphere: -(Y·Z)y/R²).
Every point argument may be a single point of shape (k,) or a batch (m, k).
"""

import logging
import math
from abc import ABC, abstractmethod
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from ..errors import (
    DistanceNotComputable,
    NonTangentInput,
    OutsideTubularNeighborhood,
    PointNotOnManifold,
    ProjectionDidNotConverge,
)
from ..models import EllipsoidSpec, SphereSpec, TorusSpec


logger = logging.getLogger(__name__)

NEWTON_TOLERANCE = 1e-12
NEWTON_MAX_ITERATIONS = 50
NEWTON_MAX_HALVINGS = 30
TANGENT_TOLERANCE = 1e-8
SHOOTING_TOLERANCE = 1e-8


def _rows(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, x.shape[-1])


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", a, b)


class TargetManifold(ABC):
    """A compact hypersurface N = {F = 0} ⊂ R^k with its curvature constants."""

    kind = "manifold"

    def __init__(self, ambient_dim: int, projection_tolerance: float = 1e-10,
                 injectivity_radius: float | None = None):
        if ambient_dim < 2:
            raise ValueError("ambient dimension must be at least 2")
        self.ambient_dim = ambient_dim
        self.intrinsic_dim = ambient_dim - 1
        self.projection_tolerance = projection_tolerance
        self._injectivity_override = injectivity_radius

    # ---- level-set description ----

    @abstractmethod
    def level(self, x: np.ndarray) -> np.ndarray:
        """F at each row of x."""

    @abstractmethod
    def level_gradient(self, x: np.ndarray) -> np.ndarray:
        """∇F at each row of x."""

    @abstractmethod
    def level_hessian(self, x: np.ndarray) -> np.ndarray:
        """Hess F at each row of x, shape (m, k, k)."""

    @abstractmethod
    def sample_points(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """n points on N (not necessarily uniform in area)."""

    @abstractmethod
    def default_center(self) -> np.ndarray:
        """The point used as P0 when a configuration does not name one."""

    def parameter_grid(self) -> np.ndarray:
        """Dense sample of N used to start Newton projection."""
        raise NotImplementedError(f"{self.kind} has no parameter grid")

    # ---- constants ----

    @property
    @abstractmethod
    def default_injectivity_radius(self) -> float:
        """Documented (conservative where inexact) injectivity radius i_N."""

    @property
    @abstractmethod
    def sectional_curvature_bound(self) -> float:
        """Upper bound K >= 0 of the sectional curvature."""

    @property
    @abstractmethod
    def tubular_width(self) -> float:
        """Distance from N below which projection is accepted."""

    @property
    def injectivity_radius(self) -> float:
        if self._injectivity_override is not None:
            return self._injectivity_override
        return self.default_injectivity_radius

    @property
    def curvature_term_length(self) -> float:
        """π/(2√K) in length units; infinite for K = 0."""
        K = self.sectional_curvature_bound
        return math.inf if K <= 0 else math.pi / (2.0 * math.sqrt(K))

    def small_range_radius(self) -> float:
        """r_N = inf(i_N, π/(2√K))."""
        return min(self.injectivity_radius, self.curvature_term_length)

    def stationary_range_radius(self) -> float:
        """inf(i_N, π/(4√K)), the smaller radius known for stationary maps."""
        return min(self.injectivity_radius, self.curvature_term_length / 2.0)

    # ---- pointwise geometry ----

    def normal(self, y) -> np.ndarray:
        g = self.level_gradient(_rows(y))
        nu = g / np.linalg.norm(g, axis=1, keepdims=True)
        return nu.reshape(np.shape(y))

    def defect(self, y) -> np.ndarray:
        """First-order distance |F|/|∇F| of each point from N."""
        pts = _rows(y)
        return np.abs(self.level(pts)) / np.linalg.norm(self.level_gradient(pts), axis=1)

    def check_on_manifold(self, y) -> None:
        d = self.defect(y)
        if not np.all(np.isfinite(d)) or np.max(d) > self.projection_tolerance:
            raise PointNotOnManifold(
                f"on-manifold defect {np.nanmax(d):.3e} exceeds {self.projection_tolerance:.1e}"
            )

    def _check_tangent(self, y: np.ndarray, V: np.ndarray, name: str) -> None:
        nu = self.normal(y)
        off = np.abs(_dot(_rows(V), _rows(nu)))
        scale = np.maximum(1.0, np.linalg.norm(_rows(V), axis=1))
        if np.any(off > TANGENT_TOLERANCE * scale):
            raise NonTangentInput(f"{name} has normal component {np.max(off):.3e}")

    def project_to_manifold(self, x) -> np.ndarray:
        """Nearest point of N for every row of x inside the tubular neighborhood."""
        x = np.asarray(x, dtype=float)
        pts = _rows(x)
        y = self.nearest_points(pts)
        dist = np.linalg.norm(y - pts, axis=1)
        outside = ~np.isfinite(dist) | (dist >= self.tubular_width)
        if outside.any():
            raise OutsideTubularNeighborhood(
                f"{int(outside.sum())} point(s) beyond tubular width {self.tubular_width:.3g}"
            )
        return y.reshape(x.shape)

    def nearest_points(self, pts: np.ndarray) -> np.ndarray:
        """Unchecked nearest-point map; rows where it is undefined come back as NaN.

        Damped Newton on the Lagrange system y - x + λ∇F(y) = 0, F(y) = 0,
        started from the nearest parameter-grid sample.
        """
        pts = _rows(pts)
        k = self.ambient_dim
        _, idx = self._grid_tree.query(pts)
        y = self._grid[idx].copy()
        g = self.level_gradient(y)
        lam = _dot(pts - y, g) / _dot(g, g)
        scale = NEWTON_TOLERANCE * (1.0 + _dot(pts, pts))

        for _ in range(NEWTON_MAX_ITERATIONS):
            res = self._lagrange_residual(pts, y, lam)
            rnorm = np.linalg.norm(res, axis=1)
            active = rnorm > scale
            if not active.any():
                return y
            a = np.flatnonzero(active)
            J = self._lagrange_jacobian(y[a], lam[a])
            step = np.linalg.solve(J, -res[a][..., None])[..., 0]
            t = np.ones(len(a))
            for _ in range(NEWTON_MAX_HALVINGS):
                y_try = y[a] + t[:, None] * step[:, :k]
                lam_try = lam[a] + t * step[:, k]
                r_try = np.linalg.norm(self._lagrange_residual(pts[a], y_try, lam_try), axis=1)
                worse = ~(r_try < rnorm[a])
                if not worse.any():
                    break
                t[worse] *= 0.5
            y[a] = y_try
            lam[a] = lam_try

        res = np.linalg.norm(self._lagrange_residual(pts, y, lam), axis=1)
        if np.any(res > scale):
            raise ProjectionDidNotConverge(
                f"Newton projection residual {np.max(res):.3e} after {NEWTON_MAX_ITERATIONS} iterations"
            )
        return y

    def _lagrange_residual(self, x, y, lam):
        g = self.level_gradient(y)
        return np.concatenate([y - x + lam[:, None] * g, self.level(y)[:, None]], axis=1)

    def _lagrange_jacobian(self, y, lam):
        m, k = y.shape
        g = self.level_gradient(y)
        J = np.zeros((m, k + 1, k + 1))
        J[:, :k, :k] = np.eye(k) + lam[:, None, None] * self.level_hessian(y)
        J[:, :k, k] = g
        J[:, k, :k] = g
        return J

    @cached_property
    def _grid(self) -> np.ndarray:
        return self.parameter_grid()

    @cached_property
    def _grid_tree(self) -> cKDTree:
        return cKDTree(self._grid)

    def tangent_project(self, y, V, check: bool = True) -> np.ndarray:
        """Orthogonal projection of V onto T_yN; check=False skips the on-manifold test of y."""
        if check:
            self.check_on_manifold(y)
        return self._tangent(np.asarray(y, dtype=float), np.asarray(V, dtype=float))

    def _tangent(self, y: np.ndarray, V: np.ndarray) -> np.ndarray:
        nu = self.normal(y)
        return V - _dot(V, nu)[..., None] * nu

    def tangent_basis(self, y) -> np.ndarray:
        """Orthonormal basis of T_yN as the columns of a (k, n) matrix."""
        nu = self.normal(np.asarray(y, dtype=float).reshape(-1))
        P = np.eye(self.ambient_dim) - np.outer(nu, nu)
        _, vecs = np.linalg.eigh(P)
        return vecs[:, 1:]

    def random_tangent(self, rng: np.random.Generator, y: np.ndarray) -> np.ndarray:
        """A Gaussian tangent vector at each row of y."""
        y = np.asarray(y, dtype=float)
        return self._tangent(y, rng.standard_normal(y.shape))

    def second_fundamental_form(self, y, Y, Z, check: bool = True) -> np.ndarray:
        """A(y)(Y, Z), a normal vector at y; bilinear and symmetric.

        check=False trusts that y is on N and Y, Z are tangent (broadcast batches).
        """
        if check:
            self.check_on_manifold(y)
            self._check_tangent(y, Y, "Y")
            self._check_tangent(y, Z, "Z")
        return self._sff(np.asarray(y, dtype=float), np.asarray(Y, dtype=float),
                         np.asarray(Z, dtype=float))

    def _sff(self, y: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        shape = np.broadcast_shapes(y.shape, Y.shape, Z.shape)
        y, Y, Z = (np.broadcast_to(a, shape).reshape(-1, shape[-1]) for a in (y, Y, Z))
        g = self.level_gradient(y)
        gnorm = np.linalg.norm(g, axis=1)
        curv = np.einsum("mi,mij,mj->m", Y, self.level_hessian(y), Z)
        return (-(curv / gnorm ** 2)[:, None] * g).reshape(shape)

    # ---- geodesics ----

    def exponential_map(self, y, V) -> np.ndarray:
        """Endpoint of the geodesic t ↦ γ(t), γ(0) = y, γ'(0) = V, at t = 1."""
        y = np.asarray(y, dtype=float)
        V = np.asarray(V, dtype=float)
        self.check_on_manifold(y)
        self._check_tangent(y, V, "V")
        ends = [self._shoot(p, v) for p, v in zip(_rows(y), _rows(np.broadcast_to(V, y.shape)))]
        return np.array(ends).reshape(y.shape)

    def _shoot(self, y: np.ndarray, V: np.ndarray) -> np.ndarray:
        if not np.any(V):
            return y.copy()
        k = self.ambient_dim

        def rhs(_t, state):
            x, v = state[None, :k], state[None, k:]
            return np.concatenate([v[0], self._sff(x, v, v)[0]])

        sol = solve_ivp(rhs, (0.0, 1.0), np.concatenate([y, V]), method="DOP853",
                        rtol=1e-11, atol=1e-12)
        return self.nearest_points(sol.y[:k, -1])[0]

    def geodesic_distance(self, y, z) -> float:
        """Length of the minimizing geodesic, by shooting from y.

        Only supported while the chord |y - z| stays below half the injectivity
        radius; elsewhere DistanceNotComputable is raised.
        """
        y = np.asarray(y, dtype=float).reshape(-1)
        z = np.asarray(z, dtype=float).reshape(-1)
        self.check_on_manifold(y)
        self.check_on_manifold(z)
        chord = float(np.linalg.norm(y - z))
        if chord == 0.0:
            return 0.0
        if chord >= 0.5 * self.injectivity_radius:
            raise DistanceNotComputable(
                f"chord {chord:.3g} outside the supported region (< {0.5 * self.injectivity_radius:.3g})"
            )
        E = self.tangent_basis(y)
        fit = least_squares(lambda a: self._shoot(y, E @ a) - z, E.T @ (z - y),
                            xtol=1e-14, ftol=1e-14, gtol=1e-14)
        miss = float(np.linalg.norm(fit.fun))
        length = float(np.linalg.norm(fit.x))
        if miss > SHOOTING_TOLERANCE or length >= self.injectivity_radius:
            raise DistanceNotComputable(f"geodesic shooting missed by {miss:.3e}")
        return length

    def __repr__(self) -> str:
        return f"{type(self).__name__}(k={self.ambient_dim}, r_N={self.small_range_radius():.6g})"


class Sphere(TargetManifold):
    """Round sphere of radius R in R^k; every operation has a closed form."""

    kind = "sphere"

    def __init__(self, radius: float = 1.0, ambient_dim: int = 3,
                 projection_tolerance: float = 1e-10, injectivity_radius: float | None = None):
        super().__init__(ambient_dim, projection_tolerance, injectivity_radius)
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        self.radius = float(radius)

    def level(self, x):
        return _dot(x, x) - self.radius ** 2

    def level_gradient(self, x):
        return 2.0 * np.asarray(x, dtype=float)

    def level_hessian(self, x):
        return np.broadcast_to(2.0 * np.eye(self.ambient_dim), (len(x), self.ambient_dim, self.ambient_dim))

    def sample_points(self, rng, n):
        g = rng.standard_normal((n, self.ambient_dim))
        return self.radius * g / np.linalg.norm(g, axis=1, keepdims=True)

    def default_center(self):
        c = np.zeros(self.ambient_dim)
        c[-1] = self.radius
        return c

    @property
    def default_injectivity_radius(self):
        return math.pi * self.radius

    @property
    def sectional_curvature_bound(self):
        # a circle is intrinsically flat
        return 0.0 if self.intrinsic_dim == 1 else 1.0 / self.radius ** 2

    @property
    def tubular_width(self):
        return self.radius / 2.0

    def defect(self, y):
        return np.abs(np.linalg.norm(_rows(y), axis=1) - self.radius)

    def nearest_points(self, pts):
        pts = _rows(pts)
        norms = np.linalg.norm(pts, axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            y = self.radius * pts / norms
        y[norms[:, 0] < 1e-300] = np.nan
        return y

    def _sff(self, y, Y, Z):
        return -(_dot(Y, Z) / self.radius ** 2)[..., None] * y

    def _unit_angle(self, y, z):
        u, v = y / self.radius, z / self.radius
        return 2.0 * np.arctan2(np.linalg.norm(u - v, axis=-1), np.linalg.norm(u + v, axis=-1))

    def geodesic_distance(self, y, z) -> float:
        y = np.asarray(y, dtype=float)
        z = np.asarray(z, dtype=float)
        self.check_on_manifold(y)
        self.check_on_manifold(z)
        return float(self.radius * self._unit_angle(y, z))

    def geodesic_distances(self, y, z) -> np.ndarray:
        """Vectorized geodesic_distance over rows (no on-manifold check)."""
        return self.radius * self._unit_angle(_rows(y), _rows(z))

    def exponential_map(self, y, V):
        y = np.asarray(y, dtype=float)
        V = np.asarray(V, dtype=float)
        self.check_on_manifold(y)
        self._check_tangent(y, V, "V")
        return self._exp(y, np.broadcast_to(V, y.shape))

    def _exp(self, y, V):
        speed = np.linalg.norm(V, axis=-1, keepdims=True)
        t = speed / self.radius
        with np.errstate(divide="ignore", invalid="ignore"):
            direction = np.where(speed > 0, V / speed, 0.0)
        return np.cos(t) * y + self.radius * np.sin(t) * direction


class Ellipsoid(TargetManifold):
    """Ellipsoid with semi-axes (a, b, c) in R^3."""

    kind = "ellipsoid"

    def __init__(self, semi_axes=(2.0, 1.0, 1.0), projection_tolerance: float = 1e-10,
                 injectivity_radius: float | None = None):
        super().__init__(3, projection_tolerance, injectivity_radius)
        self.semi_axes = np.asarray(semi_axes, dtype=float)
        if self.semi_axes.shape != (3,) or np.any(self.semi_axes <= 0):
            raise ValueError("ellipsoid needs three positive semi-axes")
        self._inv2 = 1.0 / self.semi_axes ** 2

    def level(self, x):
        return _dot(x * self._inv2, x) - 1.0

    def level_gradient(self, x):
        return 2.0 * np.asarray(x, dtype=float) * self._inv2

    def level_hessian(self, x):
        return np.broadcast_to(np.diag(2.0 * self._inv2), (len(x), 3, 3))

    def sample_points(self, rng, n):
        g = rng.standard_normal((n, 3))
        return self.semi_axes * g / np.linalg.norm(g, axis=1, keepdims=True)

    def parameter_grid(self):
        theta, phi = np.meshgrid(np.linspace(0.0, math.pi, 65),
                                 np.linspace(0.0, 2.0 * math.pi, 128, endpoint=False), indexing="ij")
        unit = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
        return (self.semi_axes * unit).reshape(-1, 3)

    def default_center(self):
        return np.array([0.0, 0.0, self.semi_axes[2]])

    @property
    def sectional_curvature_bound(self):
        s1, s2, s3 = np.sort(self.semi_axes)
        return float(s3 ** 2 / (s1 ** 2 * s2 ** 2))

    @property
    def default_injectivity_radius(self):
        # Klingenberg: even dimension, simply connected, 0 < K <= K_max gives i_N >= π/√K_max
        return math.pi / math.sqrt(self.sectional_curvature_bound)

    @property
    def tubular_width(self):
        return float(self.semi_axes.min()) / 2.0


class Torus(TargetManifold):
    """Torus of revolution (√(x²+y²) - R)² + z² = r² in R^3."""

    kind = "torus"

    def __init__(self, major_radius: float = 2.0, minor_radius: float = 1.0,
                 projection_tolerance: float = 1e-10, injectivity_radius: float | None = None):
        super().__init__(3, projection_tolerance, injectivity_radius)
        if not 0 < minor_radius < major_radius:
            raise ValueError("torus needs 0 < minor_radius < major_radius")
        self.major_radius = float(major_radius)
        self.minor_radius = float(minor_radius)

    def level(self, x):
        x = np.asarray(x, dtype=float)
        rho = np.hypot(x[..., 0], x[..., 1])
        return (rho - self.major_radius) ** 2 + x[..., 2] ** 2 - self.minor_radius ** 2

    def level_gradient(self, x):
        x = np.asarray(x, dtype=float)
        rho = np.hypot(x[..., 0], x[..., 1])
        f = 2.0 * (rho - self.major_radius) / rho
        return np.stack([f * x[..., 0], f * x[..., 1], 2.0 * x[..., 2]], axis=-1)

    def level_hessian(self, x):
        x = np.asarray(x, dtype=float)
        rho = np.hypot(x[:, 0], x[:, 1])
        H = np.zeros((len(x), 3, 3))
        xy = x[:, :2]
        H[:, :2, :2] = (2.0 * (1.0 - self.major_radius / rho))[:, None, None] * np.eye(2) \
            + (2.0 * self.major_radius / rho ** 3)[:, None, None] * xy[:, :, None] * xy[:, None, :]
        H[:, 2, 2] = 2.0
        return H

    def _embed(self, u, v):
        R, r = self.major_radius, self.minor_radius
        return np.stack([(R + r * np.cos(v)) * np.cos(u), (R + r * np.cos(v)) * np.sin(u), r * np.sin(v)], axis=-1)

    def sample_points(self, rng, n):
        return self._embed(rng.uniform(0.0, 2.0 * math.pi, n), rng.uniform(0.0, 2.0 * math.pi, n))

    def parameter_grid(self):
        u, v = np.meshgrid(np.linspace(0.0, 2.0 * math.pi, 128, endpoint=False),
                           np.linspace(0.0, 2.0 * math.pi, 64, endpoint=False), indexing="ij")
        return self._embed(u, v).reshape(-1, 3)

    def default_center(self):
        return np.array([self.major_radius, 0.0, self.minor_radius])

    @property
    def sectional_curvature_bound(self):
        # Gaussian curvature cos v / (r (R + r cos v)) peaks on the outer equator
        return 1.0 / (self.minor_radius * (self.major_radius + self.minor_radius))

    @property
    def default_injectivity_radius(self):
        # half the shortest closed geodesic (meridian or inner equator)
        return math.pi * min(self.minor_radius, self.major_radius - self.minor_radius)

    @property
    def tubular_width(self):
        return self.minor_radius / 2.0


def build_manifold(spec: SphereSpec | EllipsoidSpec | TorusSpec) -> TargetManifold:
    """Instantiate the target described by a configuration block."""
    if isinstance(spec, SphereSpec):
        return Sphere(spec.radius, spec.ambient_dim, spec.projection_tolerance, spec.injectivity_radius)
    if isinstance(spec, EllipsoidSpec):
        return Ellipsoid(spec.semi_axes, spec.projection_tolerance, spec.injectivity_radius)
    if isinstance(spec, TorusSpec):
        return Torus(spec.major_radius, spec.minor_radius, spec.projection_tolerance, spec.injectivity_radius)
    raise ValueError(f"unknown manifold spec: {spec!r}")
