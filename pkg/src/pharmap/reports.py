"""CSV reports. Numbers are written with 17 significant digits and no timestamps,
so identical runs produce identical files (wall clock goes to timing.csv)."""

import csv
import json
from pathlib import Path

from .models import ExperimentReport, InequalityMargin, SweepRow


REPORT_COLUMNS = [
    "trial", "init", "seed", "converged", "stalled", "iterations", "eps_final",
    "constraint_active_count", "p_energy", "riemannian_gradient_norm", "el_residual_norm",
    "max_triangle_gradient", "range_radius", "euclidean_range_radius",
    "gradient_jump_max", "gradient_jump_mean", "gradient_jump_relative",
    "converged_count", "max_pairwise_distance", "energy_spread",
]

ORACLE_COLUMNS = ["name", "seed", "samples", "lhs", "rhs", "margin", "holds", "witness"]

SWEEP_COLUMNS = ["p", "cap_radius", "ball_radius", "trials", "converged_count",
                 "max_pairwise_distance", "energy_spread"]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write(path: Path, columns: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_report(report: ExperimentReport, path: Path) -> None:
    """One row per trial, then an `all` row with the pairwise comparison."""
    rows = []
    for t in report.trials:
        r = t.report
        rows.append([t.trial, t.init, t.seed, t.converged, t.stalled, t.iterations, t.eps_final,
                     t.constraint_active_count, r.p_energy, r.riemannian_gradient_norm, r.el_residual_norm,
                     r.max_triangle_gradient, r.range_radius, r.euclidean_range_radius,
                     r.continuity.max_jump, r.continuity.mean_jump, r.continuity.relative_max_jump,
                     None, None, None])
    rows.append(["all"] + [None] * 16 + [report.converged_count, report.max_pairwise_distance,
                                         report.energy_spread])
    _write(path, REPORT_COLUMNS, rows)


def write_timing(report: ExperimentReport, path: Path) -> None:
    _write(path, ["trial", "wall_clock"], [[t.trial, t.wall_clock] for t in report.trials])


def write_oracles(margins: list[InequalityMargin], path: Path) -> None:
    rows = [[m.name, m.seed, m.samples, m.lhs, m.rhs, m.margin, m.holds,
             json.dumps(m.witness, sort_keys=True)] for m in margins]
    _write(path, ORACLE_COLUMNS, rows)


def write_sweep(rows: list[SweepRow], path: Path) -> None:
    _write(path, SWEEP_COLUMNS, [[getattr(r, c) for c in SWEEP_COLUMNS] for r in rows])
