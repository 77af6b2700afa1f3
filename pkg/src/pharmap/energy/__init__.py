from .functional import energy_and_gradient, energy_gradient, gradient_norm, p_energy
from .maps import ManifoldMap, read_map, read_map_values, write_map
from .residual import el_residual, evaluate_map, gradient_continuity, residual_norm, vertex_residuals

__all__ = [
    "ManifoldMap",
    "el_residual",
    "energy_and_gradient",
    "energy_gradient",
    "evaluate_map",
    "gradient_continuity",
    "gradient_norm",
    "p_energy",
    "read_map",
    "read_map_values",
    "residual_norm",
    "vertex_residuals",
    "write_map",
]
