"""
pharmap CLI

Run p-harmonic map experiments described by a YAML configuration file.
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .boundary import BoundaryData, boundary_generator
from .config import build_mesh, build_target, canonical_dump, load_config
from .energy import write_map
from .errors import ConfigInvalid, PharmapError
from .geometry import GeodesicBall, Sphere, TargetManifold, resolve_ball
from .mesh import DomainMesh, write_mesh
from .models import ExperimentReport, InequalityMargin, RunConfig
from .oracles import run_default_oracles, stability_check
from .reports import write_oracles, write_report, write_sweep, write_timing
from .solver import (
    minimality_check,
    nonuniqueness_demo,
    radius_sweep,
    run_trials,
    uniqueness_experiment,
    write_trace,
)
from .solver.experiment import TrialPlan

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

COMMANDS = ("solve", "uniqueness", "nonuniqueness-demo", "oracles", "sweep")

logger = logging.getLogger(__name__)


@dataclass
class RunContext:
    config: RunConfig
    outdir: Path
    strict: bool = False
    threads: int = 1

    @property
    def target(self) -> TargetManifold:
        return build_target(self.config)


# ============ Helpers ============

def print_table(headers, rows):
    """Print a simple table"""
    widths = [max(len(str(row[i])) for row in [headers] + rows) for i in range(len(headers))]
    header_line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    print(f"\n  {header_line}")
    print(f"  {'-' * len(header_line)}")
    for row in rows:
        print(f"  {'  '.join(str(c).ljust(w) for c, w in zip(row, widths))}")
    print()


def _setup(ctx: RunContext) -> tuple[TargetManifold, DomainMesh, GeodesicBall | None, BoundaryData]:
    cfg = ctx.config
    target = ctx.target
    mesh = build_mesh(cfg.mesh)
    ball = resolve_ball(target, cfg.solver.ball) if cfg.solver else None
    if ball is not None:
        ball.validate_for(target)
    boundary = boundary_generator(cfg.boundary.generator, cfg.boundary, mesh, target, ball)
    write_mesh(mesh, ctx.outdir / "mesh.txt")
    return target, mesh, ball, boundary


def _write_trials(ctx: RunContext, report: ExperimentReport) -> None:
    for summary, result in zip(report.trials, report.solutions):
        write_map(result.map, ctx.outdir / f"map_trial_{summary.trial}.txt")
        write_trace(result, ctx.outdir / f"trace_trial_{summary.trial}.csv")
    write_report(report, ctx.outdir / "report.csv")
    write_timing(report, ctx.outdir / "timing.csv")


def _print_trials(report: ExperimentReport) -> None:
    rows = [[t.trial, t.init, "-" if t.seed is None else t.seed, "yes" if t.converged else "no",
             t.iterations, f"{t.report.p_energy:.12g}", f"{t.report.riemannian_gradient_norm:.2e}",
             f"{t.report.range_radius:.6g}", t.constraint_active_count]
            for t in report.trials]
    print_table(["trial", "init", "seed", "conv", "iters", "energy", "grad", "range", "active"], rows)
    print(f"  Converged:         {report.converged_count}/{len(report.trials)}")
    print(f"  Max distance:      {report.max_pairwise_distance:.17g}")
    print(f"  Energy spread:     {report.energy_spread:.17g}")


def _solution_oracles(ctx: RunContext, report: ExperimentReport, ball: GeodesicBall) -> list[InequalityMargin]:
    """Stability and minimality margins of every converged solution."""
    cfg, exp = ctx.config, ctx.config.experiment
    margins = []
    for summary, result in zip(report.trials, report.solutions):
        if not result.converged:
            continue
        if exp.stability_trials:
            reach = GeodesicBall(ball.center, result.report.euclidean_range_radius)
            m = stability_check(result.map, reach, cfg.solver.p, trials=exp.stability_trials, seed=exp.seed)
            margins.append(m.model_copy(update={"name": f"stability trial={summary.trial}"}))
        if exp.minimality_trials:
            m = minimality_check(result, cfg.solver, exp.minimality_trials, exp.minimality_amplitude, exp.seed)
            margins.append(m.model_copy(update={"name": f"minimality trial={summary.trial}"}))
    return margins


def _finish(ctx: RunContext, report: ExperimentReport) -> int:
    if ctx.strict and report.converged_count < len(report.trials):
        print(f"  Not converged: {len(report.trials) - report.converged_count} trial(s)\n")
        return EXIT_NOT_CONVERGED
    print(f"\n  Output: {ctx.outdir}\n")
    return EXIT_OK


# ============ Commands ============

def cmd_solve(ctx: RunContext) -> int:
    """Single solve from the configured initialization"""
    target, mesh, ball, boundary = _setup(ctx)
    cfg = ctx.config.solver
    print(f"\n  Solving p = {cfg.p:g} on {mesh!r} into {target!r}")
    report = run_trials([TrialPlan(0, cfg.init, seed=cfg.seed)], mesh, boundary, target, cfg)
    _write_trials(ctx, report)
    _print_trials(report)
    return _finish(ctx, report)


def cmd_uniqueness(ctx: RunContext) -> int:
    """Random and harmonic-extension starts inside the ball, compared pairwise"""
    target, mesh, ball, boundary = _setup(ctx)
    cfg, exp = ctx.config.solver, ctx.config.experiment
    if ball is None:
        raise PharmapError("uniqueness needs solver.ball")
    print(f"\n  Uniqueness: p = {cfg.p:g}, ball radius {ball.radius:.6g}, {exp.trials} random starts + 1 harmonic")
    report = uniqueness_experiment(mesh, boundary, target, cfg, exp.trials, threads=ctx.threads)
    report.oracle_margins = _solution_oracles(ctx, report, ball)
    _write_trials(ctx, report)
    write_oracles(report.oracle_margins, ctx.outdir / "oracles.csv")
    _print_trials(report)
    unique = report.max_pairwise_distance <= exp.distance_threshold and report.energy_spread <= exp.energy_threshold
    print(f"  Unique (within thresholds): {'yes' if unique else 'no'}")
    failed = [m.name for m in report.oracle_margins if not m.holds]
    print(f"  Solution oracles:  {len(report.oracle_margins) - len(failed)}/{len(report.oracle_margins)} hold")
    return _finish(ctx, report)


def _default_init_points(target: TargetManifold) -> list[list[float]]:
    c = target.default_center()
    if isinstance(target, Sphere):
        return [c.tolist(), (-c).tolist()]
    raise PharmapError("experiment.init_points is required for non-sphere targets")


def cmd_nonuniqueness_demo(ctx: RunContext) -> int:
    """Unconstrained solves from constant maps at different points"""
    cfg, exp = ctx.config.solver, ctx.config.experiment
    free = ctx.config.model_copy(update={"solver": cfg.model_copy(update={"ball": None})})
    target, mesh, _, boundary = _setup(RunContext(free, ctx.outdir, ctx.strict, ctx.threads))
    points = exp.init_points or _default_init_points(target)
    print(f"\n  Non-uniqueness demo: p = {cfg.p:g}, {len(points)} constant starts, no ball")
    report = nonuniqueness_demo(mesh, boundary, target, cfg, points, threads=ctx.threads)
    _write_trials(ctx, report)
    _print_trials(report)
    return _finish(ctx, report)


def cmd_oracles(ctx: RunContext) -> int:
    """Randomized checks of the vector and second-fundamental-form inequalities"""
    spec = ctx.config.oracles
    print(f"\n  Oracles: {spec.samples} samples per cell, seeds {spec.estimate_seed}/{spec.verify_seed}")
    margins = run_default_oracles(spec)
    write_oracles(margins, ctx.outdir / "oracles.csv")
    failed = [m for m in margins if not m.holds]
    print(f"  Checks:   {len(margins)}")
    print(f"  Hold:     {len(margins) - len(failed)}")
    for m in failed:
        print(f"    - {m.name}: margin {m.margin:.3e}")
    print(f"\n  Output: {ctx.outdir / 'oracles.csv'}\n")
    return EXIT_OK


def cmd_sweep(ctx: RunContext) -> int:
    """Uniqueness experiments over cap radii and exponents"""
    cfg, exp = ctx.config.solver, ctx.config.experiment
    target = ctx.target
    mesh = build_mesh(ctx.config.mesh)
    write_mesh(mesh, ctx.outdir / "mesh.txt")
    print(f"\n  Sweep: radii {exp.radii}, p {exp.p_values}, {exp.trials} trials per cell")
    rows = radius_sweep(mesh, target, cfg, ctx.config.boundary, exp.radii, exp.p_values, exp.trials, ctx.threads)
    write_sweep(rows, ctx.outdir / "sweep.csv")
    print_table(["p", "rho", "conv", "distance", "spread"],
                [[f"{r.p:g}", f"{r.cap_radius:g}", f"{r.converged_count}/{r.trials}",
                  f"{r.max_pairwise_distance:.3e}", f"{r.energy_spread:.3e}"] for r in rows])
    if ctx.strict and any(r.converged_count < r.trials or r.trials == 0 for r in rows):
        return EXIT_NOT_CONVERGED
    print(f"  Output: {ctx.outdir}\n")
    return EXIT_OK


commands = {
    "solve": cmd_solve,
    "uniqueness": cmd_uniqueness,
    "nonuniqueness-demo": cmd_nonuniqueness_demo,
    "oracles": cmd_oracles,
    "sweep": cmd_sweep,
}


def run(config_path, command: str | None = None, outdir=None, strict: bool = False, threads: int = 1) -> int:
    """Execute one configuration file and return the exit status."""
    try:
        config = load_config(Path(config_path), command)
    except ConfigInvalid as e:
        print("  Invalid configuration:")
        for d in e.diagnostics:
            print(f"    {d}")
        return EXIT_INVALID
    except OSError as e:
        print(f"  Error: {e}\n")
        return EXIT_IO

    out = Path(outdir) if outdir else Path(config.output)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.canonical").write_text(canonical_dump(config), encoding="utf-8")
        return commands[config.command](RunContext(config, out, strict, threads))
    except PharmapError as e:
        print(f"  Error: {e}\n")
        return EXIT_INVALID
    except OSError as e:
        print(f"  Error: {e}\n")
        return EXIT_IO


def main(argv=None):
    parser = argparse.ArgumentParser(description="p-harmonic map laboratory")
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="Overrides the command in the config")
    parser.add_argument("-c", "--config", required=True, help="YAML run configuration")
    parser.add_argument("-o", "--outdir", help="Output directory (default: the config's output)")
    parser.add_argument("--strict", action="store_true", help="Exit 3 when any solve does not converge")
    parser.add_argument("-j", "--threads", type=int, default=1, help="Concurrent trials")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run(args.config, args.command, args.outdir, args.strict, args.threads))


if __name__ == "__main__":
    main()
