"""Pydantic models for run configuration and reports."""

from typing import Annotated, Any, Literal

from pydantic import BaseModel, ConfigDict, Field, FiniteFloat, field_validator, model_validator


NonNegative = Annotated[FiniteFloat, Field(ge=0)]

MARGIN_SLACK = 1e-12


# ============ Targets ============

class SphereSpec(BaseModel):
    """Round sphere of the given radius in R^ambient_dim."""
    model_config = ConfigDict(extra="forbid")
    kind: Literal["sphere"] = "sphere"
    radius: float = Field(1.0, gt=0)
    ambient_dim: int = Field(3, ge=2)
    projection_tolerance: float = Field(1e-10, gt=0)
    injectivity_radius: float | None = Field(None, gt=0)  # override of the documented constant


class EllipsoidSpec(BaseModel):
    """Ellipsoid x²/a² + y²/b² + z²/c² = 1."""
    model_config = ConfigDict(extra="forbid")
    kind: Literal["ellipsoid"] = "ellipsoid"
    semi_axes: tuple[float, float, float] = (2.0, 1.0, 1.0)
    projection_tolerance: float = Field(1e-10, gt=0)
    injectivity_radius: float | None = Field(None, gt=0)

    @field_validator("semi_axes")
    @classmethod
    def _positive_axes(cls, v):
        if min(v) <= 0:
            raise ValueError("semi-axes must be positive")
        return v


class TorusSpec(BaseModel):
    """Torus of revolution around the z-axis."""
    model_config = ConfigDict(extra="forbid")
    kind: Literal["torus"] = "torus"
    major_radius: float = Field(2.0, gt=0)
    minor_radius: float = Field(1.0, gt=0)
    projection_tolerance: float = Field(1e-10, gt=0)
    injectivity_radius: float | None = Field(None, gt=0)

    @model_validator(mode="after")
    def _embedded(self):
        if self.minor_radius >= self.major_radius:
            raise ValueError("minor_radius must be smaller than major_radius")
        return self


ManifoldSpec = Annotated[SphereSpec | EllipsoidSpec | TorusSpec, Field(discriminator="kind")]


# ============ Domain and boundary ============

class MeshSpec(BaseModel):
    """Which source domain to build or load."""
    model_config = ConfigDict(extra="forbid")
    builder: Literal["square", "disk", "file"] = "disk"
    n_per_side: int = Field(16, ge=2)
    refinement: int = Field(4, ge=1)
    path: str | None = None

    @model_validator(mode="after")
    def _path_for_file(self):
        if self.builder == "file" and not self.path:
            raise ValueError("builder 'file' needs a path")
        return self


class BoundarySpec(BaseModel):
    """Named boundary generator and its parameters."""
    model_config = ConfigDict(extra="forbid")
    generator: str = "cap"  # "cap" | "equator" | "custom"
    radius: float = 0.3  # geodesic radius of the cap circle
    center: list[float] | None = None  # defaults to the target's north pole
    path: str | None = None  # map file for "custom"


# ============ Solver ============

class BallSpec(BaseModel):
    """Closed geodesic ball B(P0, r); missing values are filled from the target."""
    model_config = ConfigDict(extra="forbid")
    center: list[float] | None = None
    radius: float | None = Field(None, ge=0)


class ArmijoConfig(BaseModel):
    """Backtracking parameters."""
    model_config = ConfigDict(extra="forbid")
    initial_step: float = Field(1.0, gt=0)
    shrink: float = Field(0.5, gt=0, lt=1)
    slope: float = Field(1e-4, gt=0, lt=1)
    step_floor: float = Field(1e-14, gt=0)


class SolverConfig(BaseModel):
    """Exponent, constraint, continuation and stopping parameters of one solve."""
    model_config = ConfigDict(extra="forbid")
    p: float = Field(ge=2)
    ball: BallSpec | None = None
    eps_schedule: list[float] = Field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 0.0])
    grad_tolerance: float = Field(1e-8, gt=0)
    max_iterations: int = Field(20000, ge=1)  # per continuation stage
    armijo: ArmijoConfig = Field(default_factory=ArmijoConfig)
    seed: int = 0
    init: Literal["harmonic_extension", "random_in_ball", "constant"] = "harmonic_extension"
    init_point: list[float] | None = None  # for init = "constant"
    deterministic: bool = True  # compensated summation of reported figures

    @field_validator("eps_schedule")
    @classmethod
    def _decreasing(cls, v):
        if not v:
            raise ValueError("eps_schedule must not be empty")
        if any(e < 0 for e in v):
            raise ValueError("eps_schedule entries must be >= 0")
        if any(b > a for a, b in zip(v, v[1:])):
            raise ValueError("eps_schedule must be non-increasing")
        return v


# ============ Experiments ============

class ExperimentSpec(BaseModel):
    """Knobs of the uniqueness, non-uniqueness and sweep experiments."""
    model_config = ConfigDict(extra="forbid")
    trials: int = Field(10, ge=2)
    seed: int = 0
    distance_threshold: float = Field(1e-5, gt=0)
    energy_threshold: float = Field(1e-8, gt=0)
    init_points: list[list[float]] = Field(default_factory=list)  # nonuniqueness-demo
    radii: list[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5])  # sweep
    p_values: list[float] = Field(default_factory=lambda: [2.0, 3.0, 4.0])  # sweep
    stability_trials: int = Field(100, ge=0)
    minimality_trials: int = Field(20, ge=0)
    minimality_amplitude: float = Field(0.05, gt=0)


def _default_sff_targets() -> list:
    return [SphereSpec(), EllipsoidSpec()]


class OracleSpec(BaseModel):
    """Sample sizes and seeds of the inequality oracles."""
    model_config = ConfigDict(extra="forbid")
    samples: int = Field(100_000, ge=1000)
    dims: list[int] = Field(default_factory=lambda: [1, 2, 3, 8])
    qs: list[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 6.0])
    estimate_seed: int = 1
    verify_seed: int = 2
    headroom: float = Field(1.05, ge=1)
    sff_targets: list[ManifoldSpec] = Field(default_factory=_default_sff_targets)
    fd_steps: list[float] = Field(default_factory=lambda: [1e-2, 1e-3])


class RunConfig(BaseModel):
    """One experiment: everything needed to reproduce it."""
    model_config = ConfigDict(extra="forbid")
    command: Literal["solve", "uniqueness", "nonuniqueness-demo", "oracles", "sweep"] = "solve"
    manifold: ManifoldSpec = Field(default_factory=SphereSpec)
    mesh: MeshSpec = Field(default_factory=MeshSpec)
    boundary: BoundarySpec = Field(default_factory=BoundarySpec)
    solver: SolverConfig | None = None
    experiment: ExperimentSpec = Field(default_factory=ExperimentSpec)
    oracles: OracleSpec = Field(default_factory=OracleSpec)
    output: str = "out"

    @model_validator(mode="after")
    def _solver_needed(self):
        if self.command != "oracles" and self.solver is None:
            raise ValueError(f"command '{self.command}' needs a solver section")
        return self


# ============ Reports ============

class GradientContinuity(BaseModel):
    """Jumps of the piecewise-constant gradient across interior edges (inspection only)."""
    max_jump: NonNegative = 0.0
    mean_jump: NonNegative = 0.0
    relative_max_jump: NonNegative = 0.0


class EnergyReport(BaseModel):
    """Energy, stationarity and range figures of one map."""
    p_energy: NonNegative
    riemannian_gradient_norm: NonNegative
    el_residual_norm: NonNegative
    max_triangle_gradient: NonNegative
    range_radius: NonNegative = 0.0  # geodesic, from the ball center
    euclidean_range_radius: NonNegative = 0.0
    continuity: GradientContinuity = Field(default_factory=GradientContinuity)


class InequalityMargin(BaseModel):
    """Both sides of one inequality check, oriented so margin >= 0 means it holds."""
    name: str
    lhs: float
    rhs: float
    margin: float
    scale: float = 1.0
    seed: int | None = None
    samples: int = 1
    witness: dict[str, Any] = Field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.margin >= -MARGIN_SLACK * self.scale

    @property
    def ratio(self) -> float:
        if self.rhs != 0:
            return self.lhs / self.rhs
        return float("inf") if self.lhs > 0 else 0.0


class TrialSummary(BaseModel):
    """Outcome of one solve inside an experiment."""
    trial: int
    init: str  # "random_in_ball" | "harmonic_extension" | "constant"
    seed: int | None = None
    converged: bool
    stalled: bool = False
    iterations: int
    eps_final: float
    constraint_active_count: int
    report: EnergyReport
    wall_clock: float = 0.0


class ExperimentReport(BaseModel):
    """Pairwise comparison of the solutions of one experiment."""
    model_config = ConfigDict(arbitrary_types_allowed=True)
    trials: list[TrialSummary] = []
    converged_count: int = 0
    max_pairwise_distance: NonNegative = 0.0
    energy_spread: NonNegative = 0.0
    distances: list[list[float]] = []  # symmetric, over all trials
    oracle_margins: list[InequalityMargin] = []
    solutions: list[Any] = Field(default_factory=list, exclude=True, repr=False)


class SweepRow(BaseModel):
    """One (p, cap radius) cell of a radius sweep."""
    p: float
    cap_radius: float
    ball_radius: float
    trials: int
    converged_count: int
    max_pairwise_distance: float
    energy_spread: float
