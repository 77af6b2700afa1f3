import math

import numpy as np
import pytest

from pharmap.boundary import GENERATORS, boundary_generator, polar_cap_boundary
from pharmap.energy import ManifoldMap, write_map
from pharmap.errors import (
    InfeasibleBoundary,
    ParamOutOfRange,
    UnknownGenerator,
    UnsupportedTarget,
)
from pharmap.geometry import GeodesicBall
from pharmap.models import BoundarySpec

NORTH = np.array([0.0, 0.0, 1.0])


def test_generators():
    assert GENERATORS == ("cap", "equator", "custom")


def test_zero_cap_is_the_center(disk4, sphere):
    b = polar_cap_boundary(disk4, sphere, 0.0, NORTH)
    assert np.allclose(b.values, NORTH, atol=1e-15)
    assert np.array_equal(b.vertices, disk4.boundary_vertices)


def test_cap_values_at_exact_distance(disk4, sphere):
    b = polar_cap_boundary(disk4, sphere, 0.3, NORTH)
    d = sphere.geodesic_distances(b.values, np.tile(NORTH, (len(b.values), 1)))
    assert np.max(np.abs(d - 0.3)) <= 1e-12


def test_cap_winds_once(disk4, sphere):
    b = polar_cap_boundary(disk4, sphere, 0.3, NORTH)
    loop = disk4.boundary_loop()
    order = np.searchsorted(b.vertices, loop)
    angles = np.unwrap(np.arctan2(b.values[order, 1], b.values[order, 0]))
    steps = np.diff(angles)
    assert np.all(steps > 0) or np.all(steps < 0)
    assert abs(angles[-1] - angles[0]) < 2 * math.pi


def test_cap_on_square_follows_arc_length(square16, sphere):
    b = polar_cap_boundary(square16, sphere, 0.2, NORTH)
    d = sphere.geodesic_distances(b.values, np.tile(NORTH, (len(b.values), 1)))
    assert np.allclose(d, 0.2, atol=1e-12)


def test_equator_is_orthogonal_to_center(disk4, sphere):
    b = boundary_generator("equator", BoundarySpec(generator="equator"), disk4, sphere)
    assert np.max(np.abs(b.values @ NORTH)) <= 1e-12
    sphere.check_on_manifold(b.values)


def test_equator_needs_a_sphere(disk4, ellipsoid):
    with pytest.raises(UnsupportedTarget):
        boundary_generator("equator", BoundarySpec(generator="equator"), disk4, ellipsoid)


def test_unknown_generator(disk4, sphere):
    with pytest.raises(UnknownGenerator):
        boundary_generator("spiral", BoundarySpec(), disk4, sphere)


def test_cap_beyond_small_range_with_ball(disk4, sphere):
    ball = GeodesicBall(NORTH, 0.5)
    with pytest.raises(ParamOutOfRange):
        boundary_generator("cap", BoundarySpec(radius=2.0), disk4, sphere, ball)
    # without a ball constraint any radius is allowed
    boundary_generator("cap", BoundarySpec(radius=2.0), disk4, sphere)


def test_negative_cap_radius(disk4, sphere):
    with pytest.raises(ParamOutOfRange):
        polar_cap_boundary(disk4, sphere, -0.1, NORTH)


def test_cap_on_other_targets(disk4, any_target):
    b = boundary_generator("cap", BoundarySpec(radius=0.1), disk4, any_target)
    any_target.check_on_manifold(b.values)
    assert np.max(np.linalg.norm(b.values - any_target.default_center(), axis=1)) <= 0.1 + 1e-9


def test_validate_against_ball(disk4, sphere, cap_boundary):
    cap_boundary.validate(sphere, GeodesicBall(NORTH, 0.3))
    with pytest.raises(InfeasibleBoundary):
        cap_boundary.validate(sphere, GeodesicBall(NORTH, 0.25))


def test_custom_boundary_from_map_file(tmp_path, disk4, sphere, cap_boundary):
    u = ManifoldMap(disk4, sphere, cap_boundary.apply(np.tile(NORTH, (disk4.n_vertices, 1))))
    write_map(u, tmp_path / "bc.txt")
    b = boundary_generator("custom", BoundarySpec(generator="custom", path=str(tmp_path / "bc.txt")), disk4, sphere)
    assert np.array_equal(b.values, cap_boundary.values)


def test_custom_boundary_needs_path(disk4, sphere):
    with pytest.raises(ParamOutOfRange):
        boundary_generator("custom", BoundarySpec(generator="custom"), disk4, sphere)
