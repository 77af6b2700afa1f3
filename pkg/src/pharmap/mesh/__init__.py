from .domain import DomainMesh, build_unit_disk_mesh, build_unit_square_grid
from .io import read_mesh, write_mesh


def triangle_gradient(mesh: DomainMesh, t: int, vertex_values):
    """Exact constant gradient on triangle t of the affine interpolant of its vertex values."""
    return mesh.triangle_gradient(t, vertex_values)


__all__ = [
    "DomainMesh",
    "build_unit_disk_mesh",
    "build_unit_square_grid",
    "read_mesh",
    "triangle_gradient",
    "write_mesh",
]
