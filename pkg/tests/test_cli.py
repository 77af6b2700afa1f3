import csv

import pytest

from pharmap.cli import EXIT_INVALID, EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, main, run


QUICK_SOLVE = """\
command: solve
mesh:
  builder: disk
  refinement: 3
boundary:
  generator: cap
  radius: 0.3
solver:
  p: 2
  ball:
    radius: 0.5
  eps_schedule: [0.01, 0]
  grad_tolerance: 1.0e-7
  max_iterations: 5000
experiment:
  stability_trials: 5
  minimality_trials: 3
"""


def write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_solve_writes_outputs(tmp_path):
    out = tmp_path / "out"
    assert run(write(tmp_path, QUICK_SOLVE), outdir=out) == EXIT_OK
    for name in ("config.canonical", "mesh.txt", "map_trial_0.txt", "trace_trial_0.csv",
                 "report.csv", "timing.csv"):
        assert (out / name).exists(), name
    rows = read_csv(out / "report.csv")
    assert rows[0]["converged"] == "true"
    assert rows[-1]["trial"] == "all"
    assert rows[-1]["converged_count"] == "1"
    jump_max, jump_mean, jump_relative = (float(rows[0][c]) for c in
                                         ("gradient_jump_max", "gradient_jump_mean", "gradient_jump_relative"))
    assert jump_max >= jump_mean > 0.0
    assert 0.0 < jump_relative <= 2.0
    assert rows[-1]["gradient_jump_max"] == ""


def test_report_is_byte_identical_on_rerun(tmp_path):
    config = write(tmp_path, QUICK_SOLVE)
    run(config, outdir=tmp_path / "a")
    run(config, outdir=tmp_path / "b")
    for name in ("report.csv", "map_trial_0.txt", "trace_trial_0.csv", "config.canonical"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_strict_mode_flags_non_convergence(tmp_path):
    text = QUICK_SOLVE.replace("max_iterations: 5000", "max_iterations: 1")
    assert run(write(tmp_path, text), outdir=tmp_path / "out", strict=True) == EXIT_NOT_CONVERGED
    assert run(write(tmp_path, text), outdir=tmp_path / "out") == EXIT_OK


def test_missing_exponent_is_invalid(tmp_path, capsys):
    text = QUICK_SOLVE.replace("  p: 2\n", "")
    assert run(write(tmp_path, text), outdir=tmp_path / "out") == EXIT_INVALID
    printed = capsys.readouterr().out
    assert "solver.p" in printed
    assert "line 8:" in printed


def test_missing_config_file_is_io_error(tmp_path):
    assert run(tmp_path / "nope.yaml") == EXIT_IO


def test_infeasible_boundary_is_invalid(tmp_path):
    text = QUICK_SOLVE.replace("radius: 0.5", "radius: 0.2")
    assert run(write(tmp_path, text), outdir=tmp_path / "out") == EXIT_INVALID


def test_sweep_without_ball_is_invalid(tmp_path, capsys):
    text = QUICK_SOLVE.replace("command: solve", "command: sweep").replace("  ball:\n    radius: 0.5\n", "")
    assert run(write(tmp_path, text), outdir=tmp_path / "out") == EXIT_INVALID
    assert "solver.ball" in capsys.readouterr().out


def test_demo_with_one_init_point_is_invalid(tmp_path, capsys):
    text = (QUICK_SOLVE.replace("command: solve", "command: nonuniqueness-demo")
            + "  init_points:\n    - [0, 0, 1]\n")
    assert run(write(tmp_path, text), outdir=tmp_path / "out") == EXIT_INVALID
    assert "experiment.init_points" in capsys.readouterr().out


def test_malformed_custom_boundary_file_is_invalid(tmp_path):
    bad = write(tmp_path, "3 three\n0 0 1\n", name="boundary.txt")
    text = QUICK_SOLVE.replace("  generator: cap\n  radius: 0.3\n", f"  generator: custom\n  path: {bad}\n")
    assert run(write(tmp_path, text), outdir=tmp_path / "out") == EXIT_INVALID


def test_oracles_command(tmp_path):
    text = """\
command: oracles
oracles:
  samples: 1000
  dims: [2]
  qs: [1.0]
  sff_targets:
    - kind: sphere
"""
    out = tmp_path / "out"
    assert run(write(tmp_path, text), outdir=out) == EXIT_OK
    rows = read_csv(out / "oracles.csv")
    assert [r["name"] for r in rows] == ["monotonicity dim=2 q=1", "lipschitz dim=2 q=1",
                                         "sff sphere", "sff_fd_order sphere"]
    assert all(r["holds"] == "true" for r in rows)


def test_uniqueness_command(tmp_path):
    text = QUICK_SOLVE.replace("command: solve", "command: uniqueness") + "  trials: 2\n"
    out = tmp_path / "out"
    assert run(write(tmp_path, text), outdir=out) == EXIT_OK
    rows = read_csv(out / "report.csv")
    assert [r["init"] for r in rows[:-1]] == ["random_in_ball", "random_in_ball", "harmonic_extension"]
    assert float(rows[-1]["max_pairwise_distance"]) <= 1e-5
    margins = read_csv(out / "oracles.csv")
    assert len(margins) == 6
    assert all(m["holds"] == "true" for m in margins)


def test_command_line_overrides_command(tmp_path):
    config = write(tmp_path, QUICK_SOLVE + "  trials: 2\n")
    with pytest.raises(SystemExit) as info:
        main(["uniqueness", "-c", str(config), "-o", str(tmp_path / "out")])
    assert info.value.code == EXIT_OK
    assert "command: uniqueness" in (tmp_path / "out" / "config.canonical").read_text()
