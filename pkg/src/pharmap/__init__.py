"""
pharmap

A desk-scale laboratory for p-harmonic maps with small range: discrete
p-energies of P1 maps from flat triangulated domains into embedded targets,
constrained descent, uniqueness experiments and inequality oracles.
"""

import logging

from .errors import PharmapError
from .models import RunConfig, SolverConfig

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"

__all__ = ["PharmapError", "RunConfig", "SolverConfig", "__version__"]
