from .descent import SolveResult, solve, write_trace
from .experiment import (
    minimality_check,
    nonuniqueness_demo,
    pairwise_distances,
    radius_sweep,
    run_trials,
    sup_distance,
    uniqueness_experiment,
)
from .initialize import harmonic_extension, initialize_map, random_in_ball

__all__ = [
    "SolveResult",
    "harmonic_extension",
    "initialize_map",
    "minimality_check",
    "nonuniqueness_demo",
    "pairwise_distances",
    "radius_sweep",
    "random_in_ball",
    "run_trials",
    "solve",
    "sup_distance",
    "uniqueness_experiment",
    "write_trace",
]
