"""Triangulated flat 2-D source domains with P1 gradient tables."""

import math
from functools import cached_property

import numpy as np
from scipy import sparse

from ..errors import MeshInvalid


MIN_TRIANGLE_AREA = 1e-14


class DomainMesh:
    """A triangle mesh of a flat domain M with boundary tagging.

    The constant gradient of the P1 interpolant of vertex values f on
    triangle t is Σ_i gradient_coefficients[t, i] · f[triangles[t, i]].
    """

    def __init__(self, vertices, triangles, boundary=None):
        """
        vertices    (V, 2) coordinates
        triangles   (T, 3) zero-based, counterclockwise vertex indices
        boundary    optional boolean mask or index list; must agree with the
                    boundary found from edge incidence
        """
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MeshInvalid("vertices must have shape (V, 2)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3 or len(self.triangles) == 0:
            raise MeshInvalid("triangles must have shape (T, 3) with T >= 1")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices):
            raise MeshInvalid("triangle index out of range")

        p = self.vertices[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        twice_area = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        bad = np.flatnonzero(twice_area / 2.0 <= MIN_TRIANGLE_AREA)
        if len(bad):
            raise MeshInvalid(f"triangle {bad[0]} has area {twice_area[bad[0]] / 2.0:.3e} (needs > {MIN_TRIANGLE_AREA:g}, counterclockwise)")
        self.triangle_areas = twice_area / 2.0

        nxt, prv = np.roll(p, -1, axis=1), np.roll(p, 1, axis=1)
        self.gradient_coefficients = np.stack(
            [nxt[..., 1] - prv[..., 1], prv[..., 0] - nxt[..., 0]], axis=-1
        ) / twice_area[:, None, None]

        topo = np.zeros(len(self.vertices), dtype=bool)
        topo[self.boundary_edges.ravel()] = True
        if boundary is not None:
            mask = np.asarray(boundary)
            if mask.dtype != bool:
                given = np.zeros(len(self.vertices), dtype=bool)
                given[mask.astype(np.int64)] = True
                mask = given
            if not np.array_equal(mask, topo):
                raise MeshInvalid("boundary flags disagree with the boundary edges of the triangulation")
        self.boundary_mask = topo
        self.boundary_vertices = np.flatnonzero(topo)
        self.interior_vertices = np.flatnonzero(~topo)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def total_area(self) -> float:
        return math.fsum(self.triangle_areas)

    @cached_property
    def _edge_incidence(self):
        local = self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        edges, inverse, counts = np.unique(np.sort(local, axis=1), axis=0,
                                           return_inverse=True, return_counts=True)
        if counts.max() > 2:
            raise MeshInvalid("an edge is shared by more than two triangles")
        return local, edges, inverse.reshape(-1), counts

    @property
    def boundary_edges(self) -> np.ndarray:
        """Directed boundary edges (a, b), oriented counterclockwise around the domain."""
        local, _, inverse, counts = self._edge_incidence
        return local[counts[inverse] == 1]

    @cached_property
    def interior_edge_triangles(self) -> np.ndarray:
        """(E_int, 2) pairs of triangles sharing an interior edge."""
        _, _, inverse, counts = self._edge_incidence
        owner = np.repeat(np.arange(self.n_triangles), 3)
        shared = counts[inverse] == 2
        order = np.argsort(inverse[shared], kind="stable")
        return owner[shared][order].reshape(-1, 2)

    def boundary_loop(self) -> np.ndarray:
        """Boundary vertices in counterclockwise order, starting at the smallest polar angle."""
        succ = dict(self.boundary_edges.tolist())
        centroid = self.vertices.mean(axis=0)
        rel = self.vertices[self.boundary_vertices] - centroid
        angles = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2.0 * math.pi)
        angles[np.isclose(angles, 2.0 * math.pi)] = 0.0
        start = int(self.boundary_vertices[np.argmin(angles)])
        loop = [start]
        while True:
            nxt = succ[loop[-1]]
            if nxt == start:
                break
            loop.append(nxt)
            if len(loop) > len(succ):
                break
        if len(loop) != len(self.boundary_vertices):
            raise MeshInvalid("boundary is not a single closed loop")
        return np.array(loop)

    def gradients(self, values) -> np.ndarray:
        """Constant gradients of the P1 interpolant: (T, k, 2) for (V, k) values, (T, 2) for (V,)."""
        values = np.asarray(values, dtype=float)
        local = values[self.triangles]
        if values.ndim == 1:
            return np.einsum("ti,tia->ta", local, self.gradient_coefficients)
        return np.einsum("tik,tia->tka", local, self.gradient_coefficients)

    def triangle_gradient(self, t: int, vertex_values) -> np.ndarray:
        """Exact gradient on triangle t of the affine interpolant of the three vertex values."""
        vals = np.asarray(vertex_values, dtype=float)
        G = self.gradient_coefficients[t]
        if vals.ndim == 1:
            return vals @ G
        return np.einsum("ik,ia->ka", vals, G)

    @cached_property
    def stiffness(self) -> sparse.csr_matrix:
        """P1 stiffness matrix K_ij = ∫ ∇φ_i · ∇φ_j."""
        G = self.gradient_coefficients
        local = np.einsum("t,tia,tja->tij", self.triangle_areas, G, G)
        rows = np.repeat(self.triangles, 3, axis=1).ravel()
        cols = np.tile(self.triangles, (1, 3)).ravel()
        n = self.n_vertices
        return sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 vertex adjacency along edges."""
        _, edges, _, _ = self._edge_incidence
        n = self.n_vertices
        i = np.concatenate([edges[:, 0], edges[:, 1]])
        j = np.concatenate([edges[:, 1], edges[:, 0]])
        return sparse.csr_matrix((np.ones(len(i)), (i, j)), shape=(n, n))

    def __repr__(self) -> str:
        return f"DomainMesh(V={self.n_vertices}, T={self.n_triangles}, boundary={len(self.boundary_vertices)})"


def build_unit_square_grid(n_per_side: int) -> DomainMesh:
    """Unit square split into n×n cells, each cut along its rising diagonal."""
    if n_per_side < 2:
        raise ValueError("n_per_side must be at least 2")
    n = n_per_side
    xs = np.arange(n + 1) / n
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    a = (j * (n + 1) + i).ravel()
    b, c, d = a + 1, a + n + 2, a + n + 1
    triangles = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    return DomainMesh(vertices, triangles)


def build_unit_disk_mesh(refinement: int) -> DomainMesh:
    """Concentric-ring triangulation of the unit disk.

    Ring k (1 <= k <= refinement) has 6k vertices at radius k/refinement;
    neighbouring rings are zipped together by increasing angle.
    """
    if refinement < 1:
        raise ValueError("refinement must be at least 1")
    vertices = [np.zeros((1, 2))]
    rings = [np.array([0])]
    start = 1
    for k in range(1, refinement + 1):
        count = 6 * k
        theta = 2.0 * math.pi * np.arange(count) / count
        vertices.append((k / refinement) * np.column_stack([np.cos(theta), np.sin(theta)]))
        rings.append(np.arange(start, start + count))
        start += count

    triangles = []
    outer = rings[1]
    for j in range(len(outer)):
        triangles.append((0, outer[j], outer[(j + 1) % len(outer)]))
    for k in range(2, refinement + 1):
        inner, outer = rings[k - 1], rings[k]
        n_in, n_out = len(inner), len(outer)
        i = j = 0
        while i < n_in or j < n_out:
            # compare the next angles 2π(j+1)/n_out and 2π(i+1)/n_in exactly
            take_outer = j < n_out and (i == n_in or (j + 1) * n_in <= (i + 1) * n_out)
            if take_outer:
                triangles.append((inner[i % n_in], outer[j], outer[(j + 1) % n_out]))
                j += 1
            else:
                triangles.append((inner[i], outer[j % n_out], inner[(i + 1) % n_in]))
                i += 1
    return DomainMesh(np.concatenate(vertices), np.array(triangles))
