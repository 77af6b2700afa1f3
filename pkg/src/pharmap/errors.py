"""Exception hierarchy for the laboratory.

Everything derives from ValueError so callers that catch ValueError keep working.
"""


class PharmapError(ValueError):
    """Base class for all laboratory errors."""


# Geometry

class OutsideTubularNeighborhood(PharmapError):
    """A point is too far from the target to be projected (usually a step that is too large)."""


class ProjectionDidNotConverge(PharmapError):
    """Newton projection onto an implicit target failed to converge."""


class PointNotOnManifold(PharmapError):
    """A point expected on the target has an on-manifold defect above tolerance."""


class NonTangentInput(PharmapError):
    """A vector expected in T_yN has a normal component above tolerance."""


class DistanceNotComputable(PharmapError):
    """Geodesic distance requested outside the supported region."""


class UnsupportedTarget(PharmapError):
    """The operation is only implemented for some target kinds."""


class BallTooLarge(PharmapError):
    """A geodesic ball constraint is not below the small-range radius."""


# Mesh

class MeshInvalid(PharmapError):
    """Mesh topology or geometry violates the construction invariants."""


# Energy

class DegenerateGradient(PharmapError):
    """The energy density is not differentiable at a vanishing gradient."""


class MapFileInvalid(PharmapError):
    """A map file is empty, unparsable or disagrees with its header."""


# Solver

class InfeasibleBoundary(PharmapError):
    """Boundary data is off the target or outside the active ball."""


class LineSearchStalled(PharmapError):
    """Backtracking shrank the step below its floor without decrease."""


# Oracles

class NotSmallRange(PharmapError):
    """The map's range is not inside the declared Euclidean ball."""


# CLI

class UnknownGenerator(PharmapError):
    """Boundary generator name is not known."""


class ParamOutOfRange(PharmapError):
    """A generator parameter is outside its admissible range."""


class ConfigInvalid(PharmapError):
    """The run configuration failed validation.

    `diagnostics` holds one "line N: field.path: message" string per failure.
    """

    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))
