import math

import numpy as np
import pytest

from pharmap.boundary import BoundaryData, boundary_generator, polar_cap_boundary
from pharmap.energy import ManifoldMap
from pharmap.energy.residual import hat_norms
from pharmap.errors import InfeasibleBoundary, ParamOutOfRange
from pharmap.geometry import Sphere
from pharmap.mesh import build_unit_disk_mesh
from pharmap.models import BallSpec, BoundarySpec, SolverConfig
from pharmap.solver import (
    harmonic_extension,
    initialize_map,
    minimality_check,
    nonuniqueness_demo,
    radius_sweep,
    solve,
    sup_distance,
    uniqueness_experiment,
    write_trace,
)

NORTH = np.array([0.0, 0.0, 1.0])

FAST = dict(eps_schedule=[1e-2, 0.0], grad_tolerance=1e-7, max_iterations=5000)


def fast_config(p=2.0, radius=0.5, **overrides):
    ball = None if radius is None else BallSpec(center=NORTH.tolist(), radius=radius)
    return SolverConfig(p=p, ball=ball, **{**FAST, **overrides})


def constant_boundary(mesh, point=NORTH):
    return BoundaryData(mesh.boundary_vertices.copy(), np.tile(point, (len(mesh.boundary_vertices), 1)))


# ============ Initialization ============

def test_constant_init_keeps_boundary_data(disk4, sphere, cap_boundary, small_range_config):
    u = initialize_map(disk4, cap_boundary, sphere, small_range_config, "constant")
    assert np.array_equal(u.values[cap_boundary.vertices], cap_boundary.values)
    assert np.allclose(u.values[disk4.interior_vertices], NORTH)


def test_random_init_is_seeded(disk4, sphere, cap_boundary, small_range_config):
    a = initialize_map(disk4, cap_boundary, sphere, small_range_config, "random_in_ball", seed=7)
    b = initialize_map(disk4, cap_boundary, sphere, small_range_config, "random_in_ball", seed=7)
    c = initialize_map(disk4, cap_boundary, sphere, small_range_config, "random_in_ball", seed=8)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_random_init_stays_in_ball(disk4, sphere, cap_boundary, small_range_config):
    u = initialize_map(disk4, cap_boundary, sphere, small_range_config, "random_in_ball", seed=3)
    d = sphere.geodesic_distances(u.values, np.tile(NORTH, (disk4.n_vertices, 1)))
    assert d.max() <= 0.5 + 1e-12
    sphere.check_on_manifold(u.values)


def test_random_init_needs_a_ball(disk4, sphere, cap_boundary):
    with pytest.raises(ValueError):
        initialize_map(disk4, cap_boundary, sphere, SolverConfig(p=2.0), "random_in_ball")


def test_harmonic_extension_of_equator_stays_in_plane(disk4, sphere):
    boundary = boundary_generator("equator", BoundarySpec(generator="equator"), disk4, sphere)
    u = harmonic_extension(disk4, boundary, sphere)
    sphere.check_on_manifold(u.values)
    assert np.max(np.abs(u.values[:, 2])) < 1e-10


def test_harmonic_extension_of_cap_is_near_the_pole(disk4, sphere, cap_boundary):
    u = harmonic_extension(disk4, cap_boundary, sphere)
    assert u.values[0] @ NORTH > np.cos(0.3) - 1e-12


def test_boundary_outside_ball_is_infeasible(disk4, sphere):
    boundary = polar_cap_boundary(disk4, sphere, 0.6, NORTH)
    with pytest.raises(InfeasibleBoundary):
        initialize_map(disk4, boundary, sphere, fast_config(radius=0.5), "constant")


def test_unknown_init_mode(disk4, sphere, cap_boundary, small_range_config):
    with pytest.raises(ValueError):
        initialize_map(disk4, cap_boundary, sphere, small_range_config, "spiral")


# ============ Descent ============

def test_constant_boundary_gives_constant_map(disk4, sphere):
    boundary = constant_boundary(disk4)
    config = fast_config()
    init = initialize_map(disk4, boundary, sphere, config, "random_in_ball", seed=1)
    result = solve(disk4, boundary, sphere, config, init)
    assert result.converged
    assert result.report.p_energy <= 1e-10
    assert sup_distance(result.map.values, np.tile(NORTH, (disk4.n_vertices, 1))) < 1e-4


def test_cap_solution_stays_inside(disk4, sphere, cap_boundary):
    config = fast_config()
    init = initialize_map(disk4, cap_boundary, sphere, config, "harmonic_extension")
    result = solve(disk4, cap_boundary, sphere, config, init)
    assert result.converged
    assert result.report.range_radius < 0.3 + 1e-9
    interior = result.map.values[disk4.interior_vertices]
    assert sphere.geodesic_distances(interior, np.tile(NORTH, (len(interior), 1))).max() < 0.3
    assert result.constraint_active_count == 0
    assert result.report.riemannian_gradient_norm <= config.grad_tolerance
    assert np.array_equal(result.map.values[cap_boundary.vertices], cap_boundary.values)


def test_trace_energy_is_monotone_within_a_stage(disk4, sphere, cap_boundary):
    config = fast_config(p=3.0)
    init = initialize_map(disk4, cap_boundary, sphere, config, "random_in_ball", seed=4)
    result = solve(disk4, cap_boundary, sphere, config, init)
    for eps in config.eps_schedule:
        energies = [e for _, s, e, _, _ in result.trace if s == eps]
        assert all(b <= a for a, b in zip(energies, energies[1:]))
    assert result.eps_final == 0.0


def test_stalled_solve_is_reported(disk4, sphere, cap_boundary):
    config = fast_config(armijo={"initial_step": 1e-12, "step_floor": 1e-10})
    init = initialize_map(disk4, cap_boundary, sphere, config, "random_in_ball", seed=2)
    result = solve(disk4, cap_boundary, sphere, config, init)
    assert result.stalled
    assert not result.converged
    assert result.iterations == 0


def test_every_iterate_is_feasible(disk4, sphere, cap_boundary):
    config = fast_config(p=3.0, radius=0.35)
    init = initialize_map(disk4, cap_boundary, sphere, config, "random_in_ball", seed=4)
    seen = []

    def check(iteration, u):
        sphere.check_on_manifold(u.values)
        d = sphere.geodesic_distances(u.values, np.tile(NORTH, (disk4.n_vertices, 1)))
        assert d.max() <= 0.35 + 1e-9, iteration
        assert np.array_equal(u.values[cap_boundary.vertices], cap_boundary.values), iteration
        seen.append(iteration)

    result = solve(disk4, cap_boundary, sphere, config, init, callback=check)
    assert result.iterations > 0
    assert seen == list(range(1, result.iterations + 1))


def test_initial_map_must_match_boundary(disk4, sphere, cap_boundary):
    config = fast_config()
    init = ManifoldMap(disk4, sphere, np.tile(NORTH, (disk4.n_vertices, 1)))
    with pytest.raises(InfeasibleBoundary):
        solve(disk4, cap_boundary, sphere, config, init)


def test_trace_file(tmp_path, disk4, sphere, cap_boundary):
    config = fast_config()
    result = solve(disk4, cap_boundary, sphere, config,
                   initialize_map(disk4, cap_boundary, sphere, config, "harmonic_extension"))
    write_trace(result, tmp_path / "trace.csv")
    lines = (tmp_path / "trace.csv").read_text().splitlines()
    assert lines[0] == "iteration,eps,energy,grad_norm,step"
    assert len(lines) == len(result.trace) + 1


# ============ Experiments ============

def test_identical_seeds_give_identical_solutions(disk4, sphere, cap_boundary):
    report = uniqueness_experiment(disk4, cap_boundary, sphere, fast_config(), 2, seeds=[5, 5])
    assert len(report.trials) == 3
    assert report.distances[0][1] == 0.0
    assert report.trials[-1].init == "harmonic_extension"


def test_uniqueness_needs_a_ball(disk4, sphere, cap_boundary):
    with pytest.raises(ParamOutOfRange):
        uniqueness_experiment(disk4, cap_boundary, sphere, fast_config(radius=None), 3)


def test_sweep_marks_infeasible_cells(disk4, sphere):
    config = fast_config(radius=0.2)
    rows = radius_sweep(disk4, sphere, config, BoundarySpec(), [0.1, 0.4], [2.0], trials=2)
    assert [r.cap_radius for r in rows] == [0.1, 0.4]
    assert rows[0].trials == 3 and rows[0].converged_count == 3
    assert rows[1].trials == 0 and np.isnan(rows[1].max_pairwise_distance)


def test_sweep_needs_a_ball(disk4, sphere):
    with pytest.raises(ParamOutOfRange):
        radius_sweep(disk4, sphere, fast_config(radius=None), BoundarySpec(), [0.1], [2.0], trials=2)


def test_minimality_of_cap_solution(disk4, sphere, cap_boundary):
    config = fast_config()
    result = solve(disk4, cap_boundary, sphere, config,
                   initialize_map(disk4, cap_boundary, sphere, config, "harmonic_extension"))
    margin = minimality_check(result, config, trials=10, amplitude=0.05, seed=0)
    assert margin.holds
    assert margin.samples == 10


@pytest.mark.slow
@pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
def test_uniqueness_in_small_range(disk4, sphere, cap_boundary, p):
    config = SolverConfig(p=p, ball=BallSpec(center=NORTH.tolist(), radius=0.5), seed=0)
    report = uniqueness_experiment(disk4, cap_boundary, sphere, config, 10)
    assert report.converged_count == 11
    assert report.max_pairwise_distance <= 1e-5
    assert report.energy_spread <= 1e-8
    assert all(t.constraint_active_count == 0 for t in report.trials)
    assert all(t.report.range_radius < 0.5 - 1e-3 for t in report.trials)


@pytest.mark.slow
def test_equator_data_has_two_minimizers(disk4, sphere):
    boundary = boundary_generator("equator", BoundarySpec(generator="equator"), disk4, sphere)
    config = SolverConfig(p=2.0)
    report = nonuniqueness_demo(disk4, boundary, sphere, config, [NORTH.tolist(), (-NORTH).tolist()])
    assert report.converged_count == 2
    assert report.max_pairwise_distance >= 1.0
    assert report.energy_spread <= 1e-4


@pytest.mark.slow
def test_solve_is_reproducible(disk4, sphere, cap_boundary):
    config = SolverConfig(p=3.0, ball=BallSpec(center=NORTH.tolist(), radius=0.5), init="random_in_ball", seed=11)
    runs = [solve(disk4, cap_boundary, sphere, config, initialize_map(disk4, cap_boundary, sphere, config))
            for _ in range(2)]
    assert np.array_equal(runs[0].map.values, runs[1].map.values)
    assert runs[0].report == runs[1].report


def _cap_solve(mesh, sphere, **overrides):
    boundary = polar_cap_boundary(mesh, sphere, 0.3, NORTH)
    config = fast_config(**overrides)
    return solve(mesh, boundary, sphere, config, initialize_map(mesh, boundary, sphere, config, "harmonic_extension"))


@pytest.mark.slow
def test_residual_is_bounded_by_solver_tolerance(disk4, sphere, record_property):
    tight = _cap_solve(disk4, sphere, grad_tolerance=1e-8, max_iterations=20000)
    assert tight.converged
    floor = tight.report.el_residual_norm
    interior = disk4.interior_vertices
    C = math.sqrt(len(interior)) / hat_norms(tight.map, 2.0)[interior].min()
    record_property("residual_constant", C)
    for tol in (1e-4, 1e-6):
        loose = _cap_solve(disk4, sphere, grad_tolerance=tol, max_iterations=20000)
        assert loose.converged
        assert loose.report.el_residual_norm <= C * tol + 2.0 * floor


@pytest.mark.slow
def test_cap_residual_decreases_under_refinement(sphere):
    residuals = []
    for refinement in (4, 8, 16):
        result = _cap_solve(build_unit_disk_mesh(refinement), sphere, max_iterations=20000)
        assert result.converged
        assert result.report.range_radius < 0.3 + 1e-9
        residuals.append(result.report.el_residual_norm)
    assert residuals[0] > residuals[1] > residuals[2]
