import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pharmap.boundary import polar_cap_boundary
from pharmap.energy import ManifoldMap
from pharmap.errors import NotSmallRange
from pharmap.geometry import Ellipsoid, GeodesicBall, Sphere
from pharmap.models import BallSpec, OracleSpec, SolverConfig, SphereSpec
from pharmap.oracles import (
    check_lipschitz_inequality,
    check_monotonicity_inequality,
    check_sff_inequality,
    estimate_sff_constant,
    inequality_sweep,
    random_test_field,
    run_default_oracles,
    sff_convergence_order,
    sff_pair_margin,
    stability_check,
)
from pharmap.oracles.sff import sff_samples
from pharmap.solver import initialize_map, solve

NORTH = np.array([0.0, 0.0, 1.0])


# ============ Vector inequalities ============

def test_equal_vectors_give_zero_sides():
    X = [0.3, -1.2, 2.0]
    for check in (check_monotonicity_inequality, check_lipschitz_inequality):
        m = check(X, X, 2.0)
        assert m.lhs == 0.0 and m.rhs == 0.0 and m.margin == 0.0


def test_exponent_zero_collapses_monotonicity():
    m = check_monotonicity_inequality([1.0, 2.0], [-0.5, 0.25], 0.0)
    assert m.lhs == pytest.approx(m.rhs, rel=1e-14)
    assert m.holds


def test_unit_vectors_are_an_equality_case():
    m = check_monotonicity_inequality([1.0, 0.0], [0.0, 1.0], 2.0)
    assert m.lhs == pytest.approx(2.0)
    assert m.rhs == pytest.approx(2.0)
    assert abs(m.margin) <= 1e-12


def test_lipschitz_against_zero():
    X = np.array([0.6, 0.8, 1.5])
    q = 1.5
    m = check_lipschitz_inequality(X, np.zeros(3), q)
    size = np.linalg.norm(X) ** (q + 1)
    assert m.lhs == pytest.approx(size)
    assert m.rhs == pytest.approx((q + 1) * size)
    assert m.margin == pytest.approx(q * size)


def test_negative_exponent_is_rejected():
    with pytest.raises(ValueError):
        check_monotonicity_inequality([1.0], [2.0], -0.5)


def test_mismatched_dimensions_are_rejected():
    with pytest.raises(ValueError):
        check_lipschitz_inequality([1.0, 2.0], [1.0], 1.0)


finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


@given(
    X=arrays(np.float64, 3, elements=finite),
    Y=arrays(np.float64, 3, elements=finite),
    q=st.floats(min_value=0.0, max_value=6.0),
)
@settings(max_examples=300, deadline=None)
def test_both_inequalities_hold(X, Y, q):
    assert check_monotonicity_inequality(X, Y, q).holds
    assert check_lipschitz_inequality(X, Y, q).holds


def test_inequality_sweep_holds_in_every_cell():
    margins = inequality_sweep([1, 2, 3, 8], [0.0, 0.5, 1.0, 2.0, 6.0], samples=20000, seed=1)
    assert len(margins) == 2 * 4 * 5
    assert all(m.holds for m in margins), [m.name for m in margins if not m.holds]
    assert margins[0].name == "monotonicity dim=1 q=0"


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_inequality_sweep_holds_at_full_scale(seed):
    margins = inequality_sweep([1, 2, 3, 8], [0.0, 0.5, 1.0, 2.0, 6.0], samples=100_000, seed=seed)
    assert all(m.samples == 100_000 for m in margins)
    assert all(m.holds for m in margins), [m.name for m in margins if not m.holds]


def test_inequality_sweep_is_seeded():
    a = inequality_sweep([2], [1.0], samples=1000, seed=3)
    b = inequality_sweep([2], [1.0], samples=1000, seed=3)
    assert [m.witness for m in a] == [m.witness for m in b]


# ============ Second fundamental form ============

def test_sff_estimate_is_deterministic(sphere):
    assert estimate_sff_constant(sphere, 5000, seed=1) == estimate_sff_constant(sphere, 5000, seed=1)


def test_sff_estimate_grows_with_nested_samples(sphere):
    small = estimate_sff_constant(sphere, 2000, seed=4)
    large = estimate_sff_constant(sphere, 10000, seed=4)
    assert large >= small


def test_sff_samples_are_nested(ellipsoid):
    short = sff_samples(ellipsoid, 1000, seed=9)
    long = sff_samples(ellipsoid, 5000, seed=9)
    for a, b in zip(short, long):
        assert np.array_equal(a, b[:1000])


def test_sff_estimate_needs_enough_samples(sphere):
    with pytest.raises(ValueError):
        estimate_sff_constant(sphere, 999, seed=1)


@pytest.mark.slow
def test_sff_estimate_is_stable_across_seeds(sphere):
    a = estimate_sff_constant(sphere, 100_000, seed=1)
    b = estimate_sff_constant(sphere, 100_000, seed=2)
    assert abs(a - b) <= 0.1 * max(a, b)


@pytest.mark.parametrize("target", [Sphere(), Ellipsoid((2.0, 1.0, 1.0))], ids=["sphere", "ellipsoid"])
def test_sff_bound_holds_on_fresh_samples(target):
    C = estimate_sff_constant(target, 20000, seed=1)
    assert np.isfinite(C) and C > 0
    assert check_sff_inequality(target, C, 20000, seed=2).holds


@pytest.mark.slow
@pytest.mark.parametrize("target", [Sphere(), Ellipsoid((2.0, 1.0, 1.0))], ids=["sphere", "ellipsoid"])
def test_sff_bound_with_headroom_holds_at_full_scale(target):
    C = 1.05 * estimate_sff_constant(target, 100_000, seed=1)
    assert check_sff_inequality(target, C, 100_000, seed=2).holds


def test_sff_bound_fails_without_a_constant(sphere):
    assert not check_sff_inequality(sphere, 0.0, 1000, seed=2).holds


def test_sff_pair_with_equal_arguments_holds(sphere, rng):
    y = sphere.sample_points(rng, 1)[0]
    Y = sphere.random_tangent(rng, y)
    m = sff_pair_margin(sphere, y, y, Y, Y, 1.0)
    assert m.lhs == 0.0 and m.holds


def test_sff_finite_differences_converge_quadratically(sphere):
    assert sff_convergence_order(sphere, [1e-2, 1e-3], seed=0) >= 1.8


# ============ Stability ============

def test_stability_of_zero_field(disk4, sphere, cap_boundary):
    u = ManifoldMap(disk4, sphere, cap_boundary.apply(np.tile(NORTH, (disk4.n_vertices, 1))))
    m = stability_check(u, GeodesicBall(NORTH, 0.5), 2.0, phi=np.zeros_like(u.values))
    assert m.lhs == 0.0 and m.rhs == 0.0


def test_stability_of_constant_map(disk4, sphere, rng):
    u = ManifoldMap(disk4, sphere, np.tile(NORTH, (disk4.n_vertices, 1)))
    phi = random_test_field(disk4, 3, 3.0, rng)
    m = stability_check(u, GeodesicBall(NORTH, 0.1), 3.0, phi=phi)
    assert m.lhs == 0.0 and m.rhs == 0.0 and m.holds


def test_random_test_fields_vanish_on_boundary(disk4, rng):
    phi = random_test_field(disk4, 3, 2.0, rng)
    assert np.all(phi[disk4.boundary_mask] == 0.0)
    assert np.any(phi[disk4.interior_vertices] != 0.0)


def test_map_outside_ball_is_rejected(disk4, sphere, cap_boundary):
    u = ManifoldMap(disk4, sphere, cap_boundary.apply(np.tile(NORTH, (disk4.n_vertices, 1))))
    with pytest.raises(NotSmallRange):
        stability_check(u, GeodesicBall(NORTH, 0.1), 2.0, trials=1)


@pytest.fixture(scope="module")
def small_cap_solution():
    sphere = Sphere()
    from pharmap.mesh import build_unit_disk_mesh

    mesh = build_unit_disk_mesh(4)
    boundary = polar_cap_boundary(mesh, sphere, 0.2, NORTH)
    config = SolverConfig(p=2.0, ball=BallSpec(center=NORTH.tolist(), radius=0.5),
                          eps_schedule=[1e-2, 0.0], grad_tolerance=1e-7, max_iterations=5000)
    init = initialize_map(mesh, boundary, sphere, config, "harmonic_extension")
    return solve(mesh, boundary, sphere, config, init)


def test_stability_margin_sign_is_scale_invariant(small_cap_solution, rng):
    u = small_cap_solution.map
    phi = random_test_field(u.mesh, 3, 2.0, rng)
    ball = GeodesicBall(NORTH, 0.25)
    base = stability_check(u, ball, 2.0, phi=phi)
    for lam in (0.1, 10.0):
        scaled = stability_check(u, ball, 2.0, phi=lam * phi)
        assert scaled.lhs == pytest.approx(lam * lam * base.lhs, rel=1e-12)
        assert scaled.rhs == pytest.approx(lam * lam * base.rhs, rel=1e-12)
        assert (scaled.margin >= 0) == (base.margin >= 0)


def test_stability_holds_for_small_range_solution(small_cap_solution):
    assert small_cap_solution.converged
    m = stability_check(small_cap_solution.map, GeodesicBall(NORTH, 0.25), 2.0, trials=100, seed=0)
    assert m.holds
    assert m.samples == 100
    assert m.witness["max_ratio"] <= 1.0


@pytest.mark.slow
@pytest.mark.parametrize("p", [2.0, 3.0, 4.0])
def test_stability_holds_for_cap_solutions(disk4, sphere, cap_boundary, p):
    config = SolverConfig(p=p, ball=BallSpec(center=NORTH.tolist(), radius=0.5))
    init = initialize_map(disk4, cap_boundary, sphere, config, "harmonic_extension")
    result = solve(disk4, cap_boundary, sphere, config, init)
    assert result.converged
    reach = GeodesicBall(NORTH, result.report.euclidean_range_radius)
    m = stability_check(result.map, reach, p, trials=100, seed=0)
    assert m.holds
    assert m.witness["max_ratio"] <= 1.0


# ============ Default run ============

def test_default_oracles_hold():
    spec = OracleSpec(samples=2000, dims=[2], qs=[0.0, 2.0], sff_targets=[SphereSpec()])
    margins = run_default_oracles(spec)
    names = [m.name for m in margins]
    assert names[:4] == ["monotonicity dim=2 q=0", "lipschitz dim=2 q=0",
                         "monotonicity dim=2 q=2", "lipschitz dim=2 q=2"]
    assert "sff sphere" in names and "sff_fd_order sphere" in names
    assert all(m.holds for m in margins)
