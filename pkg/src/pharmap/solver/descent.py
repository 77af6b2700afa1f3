"""Projected gradient descent on the regularized p-energy.

Each step moves interior values against the Riemannian gradient, retracts to N
by nearest-point projection and, when a ball is active, back into the ball.
Steps are Armijo-backtracked; boundary values are never touched.
"""

import csv
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..boundary import BoundaryData
from ..energy import ManifoldMap, energy_and_gradient, evaluate_map, gradient_norm, p_energy
from ..errors import (
    InfeasibleBoundary,
    LineSearchStalled,
    OutsideTubularNeighborhood,
    ProjectionDidNotConverge,
)
from ..geometry import GeodesicBall, TargetManifold, clamp_to_ball, resolve_ball
from ..mesh import DomainMesh
from ..models import ArmijoConfig, EnergyReport, SolverConfig


logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("iteration", "eps", "energy", "grad_norm", "step")


@dataclass
class SolveResult:
    """Final map of one descent run and how it got there."""
    map: ManifoldMap
    report: EnergyReport
    iterations: int
    converged: bool
    eps_final: float
    constraint_active_count: int
    stalled: bool = False
    trace: list[tuple[int, float, float, float, float]] = field(default_factory=list, repr=False)


@dataclass
class _Step:
    values: np.ndarray
    energy: float
    tau: float
    moved: int


def _retract(target: TargetManifold, ball: GeodesicBall | None, interior: np.ndarray,
             values: np.ndarray, direction: np.ndarray, tau: float) -> tuple[np.ndarray, int]:
    out = values.copy()
    pts = target.project_to_manifold(values[interior] - tau * direction[interior])
    moved = 0
    if ball is not None:
        pts, mask = clamp_to_ball(target, ball, pts)
        moved = int(mask.sum())
    out[interior] = pts
    return out, moved


def _line_search(u: ManifoldMap, grad: np.ndarray, energy: float, p: float, eps: float,
                 ball: GeodesicBall | None, tau: float, armijo: ArmijoConfig) -> _Step:
    interior = u.mesh.interior_vertices
    while tau >= armijo.step_floor:
        try:
            trial, moved = _retract(u.target, ball, interior, u.values, grad, tau)
        except (OutsideTubularNeighborhood, ProjectionDidNotConverge):
            tau *= armijo.shrink
            continue
        trial_energy = p_energy(u.with_values(trial), p, eps)
        decrease = float(np.sum(grad * (trial - u.values)))
        if trial_energy <= energy + armijo.slope * decrease and trial_energy <= energy:
            return _Step(trial, trial_energy, tau, moved)
        tau *= armijo.shrink
    raise LineSearchStalled(f"no decrease down to step {armijo.step_floor:g} (eps = {eps:g})")


def _check_init(init: ManifoldMap, boundary: BoundaryData, target: TargetManifold,
                ball: GeodesicBall | None) -> None:
    target.check_on_manifold(init.values)
    if not np.array_equal(init.values[boundary.vertices], boundary.values):
        raise InfeasibleBoundary("initial map does not match the boundary data")
    if ball is not None:
        _, outside = clamp_to_ball(target, ball, init.values)
        if outside.any():
            raise InfeasibleBoundary(f"{int(outside.sum())} initial value(s) outside the ball")


def solve(mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold,
          config: SolverConfig, init: ManifoldMap, *,
          callback: Callable[[int, ManifoldMap], None] | None = None) -> SolveResult:
    """Minimize E_p over maps with the given boundary data, stage by stage over config.eps_schedule.

    Intermediate stages stop once the gradient norm reaches max(grad_tolerance, eps²);
    the last stage must reach grad_tolerance. max_iterations applies per stage.
    `callback(iteration, u)` sees every accepted iterate.
    """
    ball = resolve_ball(target, config.ball)
    if ball is not None:
        ball.validate_for(target)
    boundary.validate(target, ball)
    _check_init(init, boundary, target, ball)

    u = ManifoldMap(mesh, target, init.values, check=False)
    armijo = config.armijo
    trace: list[tuple[int, float, float, float, float]] = []
    iterations = 0
    moved = 0
    stalled = False
    stage_converged = False
    tau = armijo.initial_step
    eps = config.eps_schedule[0]

    for stage, eps in enumerate(config.eps_schedule):
        last = stage == len(config.eps_schedule) - 1
        tol = config.grad_tolerance if last else max(config.grad_tolerance, eps * eps)
        energy, grad = energy_and_gradient(u, config.p, eps)
        gnorm = gradient_norm(u, grad)
        trace.append((iterations, eps, energy, gnorm, 0.0))
        logger.info("stage %d: eps=%g energy=%.12g grad=%.3e", stage, eps, energy, gnorm)
        stage_converged = gnorm <= tol
        for _ in range(config.max_iterations):
            if stage_converged:
                break
            try:
                step = _line_search(u, grad, energy, config.p, eps, ball,
                                    min(armijo.initial_step, tau / armijo.shrink), armijo)
            except LineSearchStalled as e:
                logger.warning("line search stalled at iteration %d: %s", iterations, e)
                stalled = True
                break
            u = u.with_values(step.values)
            tau, moved = step.tau, step.moved
            iterations += 1
            if callback is not None:
                callback(iterations, u)
            energy, grad = energy_and_gradient(u, config.p, eps)
            gnorm = gradient_norm(u, grad)
            trace.append((iterations, eps, energy, gnorm, tau))
            stage_converged = gnorm <= tol
        logger.info("stage %d done: %d iterations, grad=%.3e, reached=%s", stage, iterations, gnorm, stage_converged)
        if stalled:
            break

    report = evaluate_map(u, config.p, ball, compensated=config.deterministic)
    converged = (stage_converged and not stalled
                 and report.riemannian_gradient_norm <= config.grad_tolerance)
    logger.info("solve finished: converged=%s energy=%.15g iterations=%d", converged, report.p_energy, iterations)
    return SolveResult(
        map=u,
        report=report,
        iterations=iterations,
        converged=converged,
        eps_final=eps,
        constraint_active_count=moved,
        stalled=stalled,
        trace=trace,
    )


def write_trace(result: SolveResult, path: Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for it, eps, energy, gnorm, step in result.trace:
            writer.writerow([it] + [format(float(x), ".17g") for x in (eps, energy, gnorm, step)])
