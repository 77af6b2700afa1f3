"""Piecewise-linear maps from a domain mesh into a target, and their file format."""

from pathlib import Path

import numpy as np

from ..errors import MapFileInvalid
from ..geometry import TargetManifold
from ..mesh import DomainMesh


class ManifoldMap:
    """Vertex values u_i ∈ N ⊂ R^k of a P1 map M → R^k."""

    def __init__(self, mesh: DomainMesh, target: TargetManifold, values, check: bool = True):
        values = np.array(values, dtype=float)
        if values.shape != (mesh.n_vertices, target.ambient_dim):
            raise ValueError(
                f"map values have shape {values.shape}, expected ({mesh.n_vertices}, {target.ambient_dim})"
            )
        if check:
            target.check_on_manifold(values)
        self.mesh = mesh
        self.target = target
        self.values = values

    def with_values(self, values) -> "ManifoldMap":
        """Same mesh and target, new values (caller guarantees they lie on N)."""
        return ManifoldMap(self.mesh, self.target, values, check=False)

    def gradients(self) -> np.ndarray:
        """(T, k, 2) constant triangle gradients."""
        return self.mesh.gradients(self.values)

    @property
    def boundary_values(self) -> np.ndarray:
        return self.values[self.mesh.boundary_vertices]

    def __repr__(self) -> str:
        return f"ManifoldMap({self.mesh!r} -> {self.target!r})"


def write_map(u: ManifoldMap, path: Path) -> None:
    V, k = u.values.shape
    lines = [f"{V} {k}"]
    lines += [" ".join(format(float(x), ".17g") for x in row) for row in u.values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_map_values(path: Path) -> np.ndarray:
    """Raw (V, k) array of a map file."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise MapFileInvalid(f"{path}: empty map file")
    try:
        V, k = (int(tok) for tok in lines[0].split())
        rows = [[float(tok) for tok in ln.split()] for ln in lines[1:]]
    except ValueError as e:
        raise MapFileInvalid(f"{path}: malformed map file ({e})")
    values = np.array(rows, dtype=float)
    if values.shape != (V, k):
        raise MapFileInvalid(f"{path}: header says {V}x{k}, body is {values.shape}")
    return values


def read_map(path: Path, mesh: DomainMesh, target: TargetManifold) -> ManifoldMap:
    return ManifoldMap(mesh, target, read_map_values(path))
