"""Plain-text mesh files.

Line 1 is `V T`, then V lines `x y b` (b = 1 on the boundary), then T lines
`i j k` of zero-based counterclockwise vertex indices.
"""

from pathlib import Path

import numpy as np

from ..errors import MeshInvalid
from .domain import DomainMesh


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_mesh(mesh: DomainMesh, path: Path) -> None:
    lines = [f"{mesh.n_vertices} {mesh.n_triangles}"]
    for (x, y), b in zip(mesh.vertices, mesh.boundary_mask):
        lines.append(f"{_fmt(x)} {_fmt(y)} {int(b)}")
    for i, j, k in mesh.triangles:
        lines.append(f"{i} {j} {k}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path: Path) -> DomainMesh:
    """Load a mesh file; malformed content raises MeshInvalid naming the line."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise MeshInvalid(f"{path}: empty mesh file")
    try:
        n_vertices, n_triangles = (int(tok) for tok in lines[0].split())
    except ValueError:
        raise MeshInvalid(f"{path}: line 1: expected 'V T'")
    if len(lines) != 1 + n_vertices + n_triangles:
        raise MeshInvalid(f"{path}: expected {1 + n_vertices + n_triangles} lines, found {len(lines)}")

    vertices = np.empty((n_vertices, 2))
    flags = np.empty(n_vertices, dtype=bool)
    for n, line in enumerate(lines[1:1 + n_vertices]):
        parts = line.split()
        if len(parts) != 3 or parts[2] not in ("0", "1"):
            raise MeshInvalid(f"{path}: line {n + 2}: expected 'x y b' with b in {{0,1}}")
        try:
            vertices[n] = float(parts[0]), float(parts[1])
        except ValueError:
            raise MeshInvalid(f"{path}: line {n + 2}: bad coordinate")
        flags[n] = parts[2] == "1"

    triangles = np.empty((n_triangles, 3), dtype=np.int64)
    for n, line in enumerate(lines[1 + n_vertices:]):
        try:
            triangles[n] = [int(tok) for tok in line.split()]
        except ValueError:
            raise MeshInvalid(f"{path}: line {n + 2 + n_vertices}: expected 'i j k'")
    return DomainMesh(vertices, triangles, flags)
