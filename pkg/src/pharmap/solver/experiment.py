"""Repeated solves from different starting maps, compared against each other."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..boundary import BoundaryData, boundary_generator
from ..errors import ParamOutOfRange, PharmapError
from ..geometry import TargetManifold, clamp_to_ball, resolve_ball
from ..mesh import DomainMesh
from ..models import (
    BoundarySpec,
    ExperimentReport,
    InequalityMargin,
    SolverConfig,
    SweepRow,
    TrialSummary,
)
from ..energy import p_energy
from .descent import SolveResult, solve
from .initialize import initialize_map


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialPlan:
    index: int
    mode: str
    seed: int | None = None
    point: tuple[float, ...] | None = None


def sup_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest Euclidean distance between corresponding vertex values."""
    return float(np.max(np.linalg.norm(a - b, axis=1)))


def pairwise_distances(results: list[SolveResult]) -> np.ndarray:
    n = len(results)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            D[i, j] = D[j, i] = sup_distance(results[i].map.values, results[j].map.values)
    return D


def _run_trial(plan: TrialPlan, mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold,
               config: SolverConfig) -> tuple[TrialSummary, SolveResult]:
    start = time.perf_counter()
    init = initialize_map(mesh, boundary, target, config, plan.mode, point=plan.point, seed=plan.seed)
    result = solve(mesh, boundary, target, config, init)
    elapsed = time.perf_counter() - start
    logger.info("trial %d (%s, seed=%s): converged=%s in %.2fs", plan.index, plan.mode, plan.seed,
                result.converged, elapsed)
    summary = TrialSummary(
        trial=plan.index,
        init=plan.mode,
        seed=plan.seed,
        converged=result.converged,
        stalled=result.stalled,
        iterations=result.iterations,
        eps_final=result.eps_final,
        constraint_active_count=result.constraint_active_count,
        report=result.report,
        wall_clock=elapsed,
    )
    return summary, result


def run_trials(plans: list[TrialPlan], mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold,
               config: SolverConfig, threads: int = 1) -> ExperimentReport:
    """Solve once per plan (concurrently when threads > 1) and compare converged solutions."""
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        outcomes = list(pool.map(lambda plan: _run_trial(plan, mesh, boundary, target, config), plans))
    summaries = [s for s, _ in outcomes]
    results = [r for _, r in outcomes]

    D = pairwise_distances(results)
    ok = [i for i, r in enumerate(results) if r.converged]
    max_dist = float(D[np.ix_(ok, ok)].max()) if len(ok) > 1 else 0.0
    energies = [results[i].report.p_energy for i in ok]
    spread = float(max(energies) - min(energies)) if energies else 0.0
    return ExperimentReport(
        trials=summaries,
        converged_count=len(ok),
        max_pairwise_distance=max_dist,
        energy_spread=spread,
        distances=D.tolist(),
        solutions=results,
    )


def uniqueness_experiment(mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold,
                          config: SolverConfig, trials: int, seeds: list[int] | None = None,
                          threads: int = 1) -> ExperimentReport:
    """`trials` random_in_ball starts (seeds config.seed, config.seed + 1, ...) plus one harmonic extension."""
    if trials < 2:
        raise ParamOutOfRange("uniqueness experiment needs at least 2 trials")
    ball = resolve_ball(target, config.ball)
    if ball is None:
        raise ParamOutOfRange("uniqueness experiment needs a ball constraint")
    ball.validate_for(target)
    if seeds is None:
        seeds = [config.seed + i for i in range(trials)]
    if len(seeds) != trials:
        raise ParamOutOfRange(f"got {len(seeds)} seeds for {trials} trials")
    plans = [TrialPlan(i, "random_in_ball", seed=s) for i, s in enumerate(seeds)]
    plans.append(TrialPlan(trials, "harmonic_extension"))
    return run_trials(plans, mesh, boundary, target, config, threads)


def nonuniqueness_demo(mesh: DomainMesh, boundary: BoundaryData, target: TargetManifold,
                       config: SolverConfig, init_points: list, threads: int = 1) -> ExperimentReport:
    """Unconstrained solves from constant maps at the given points (e.g. both poles)."""
    if len(init_points) < 2:
        raise ParamOutOfRange("nonuniqueness demo needs at least two initial points")
    free = config.model_copy(update={"ball": None})
    plans = [TrialPlan(i, "constant", point=tuple(pt)) for i, pt in enumerate(init_points)]
    return run_trials(plans, mesh, boundary, target, free, threads)


def radius_sweep(mesh: DomainMesh, target: TargetManifold, config: SolverConfig,
                 boundary_spec: BoundarySpec, radii: list[float], p_values: list[float],
                 trials: int, threads: int = 1) -> list[SweepRow]:
    """Uniqueness experiments over a grid of cap radii and exponents."""
    ball = resolve_ball(target, config.ball)
    if ball is None:
        raise ParamOutOfRange("radius sweep needs a ball constraint")
    ball.validate_for(target)
    rows = []
    for p in p_values:
        cfg = config.model_copy(update={"p": p})
        for rho in radii:
            spec = boundary_spec.model_copy(update={"generator": "cap", "radius": rho})
            try:
                boundary = boundary_generator("cap", spec, mesh, target, ball)
                report = uniqueness_experiment(mesh, boundary, target, cfg, trials, threads=threads)
            except PharmapError as e:
                logger.warning("sweep cell p=%g rho=%g skipped: %s", p, rho, e)
                rows.append(SweepRow(p=p, cap_radius=rho, ball_radius=ball.radius,
                                     trials=0, converged_count=0,
                                     max_pairwise_distance=math.nan, energy_spread=math.nan))
                continue
            rows.append(SweepRow(
                p=p,
                cap_radius=rho,
                ball_radius=ball.radius,
                trials=len(report.trials),
                converged_count=report.converged_count,
                max_pairwise_distance=report.max_pairwise_distance,
                energy_spread=report.energy_spread,
            ))
    return rows


def minimality_check(result: SolveResult, config: SolverConfig, trials: int,
                     amplitude: float, seed: int) -> InequalityMargin:
    """Worst energy gap E(competitor) - E(solution) over random feasible interior perturbations."""
    u = result.map
    target, mesh = u.target, u.mesh
    ball = resolve_ball(target, config.ball)
    interior = mesh.interior_vertices
    base = p_energy(u, config.p)
    rng = np.random.default_rng(seed)
    worst = None
    for t in range(trials):
        delta = target.tangent_project(u.values[interior], rng.standard_normal((len(interior), target.ambient_dim)))
        pts = target.project_to_manifold(u.values[interior] + amplitude * delta)
        if ball is not None:
            pts = clamp_to_ball(target, ball, pts)[0]
        values = u.values.copy()
        values[interior] = pts
        energy = p_energy(u.with_values(values), config.p)
        margin = InequalityMargin(
            name="minimality",
            lhs=base,
            rhs=energy,
            margin=energy - base,
            scale=max(base, energy, 1.0),
            seed=seed,
            samples=trials,
            witness={"trial": t, "amplitude": amplitude},
        )
        if worst is None or margin.margin < worst.margin:
            worst = margin
    if worst is None:
        return InequalityMargin(name="minimality", lhs=base, rhs=base, margin=0.0, seed=seed, samples=0)
    return worst
