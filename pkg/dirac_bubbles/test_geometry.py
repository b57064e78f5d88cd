import math

import numpy as np
import pytest

from dirac_bubbles.errors import DimensionError, DomainError, GridError, QuadratureError
from dirac_bubbles.geometry import (
    Grid,
    ball_midpoint_cells,
    ball_polar_quadrature,
    conformal_factor,
    metric_pullback_ratio,
    radial_integral,
    sphere_quadrature,
    sphere_volume,
    stereo_to_plane,
    stereo_to_sphere,
)


def test_sphere_volumes():
    assert sphere_volume(1) == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_volume(2) == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_volume(3) == pytest.approx(2 * math.pi ** 2, rel=1e-15)
    assert sphere_volume(4) == pytest.approx(8 * math.pi ** 2 / 3, rel=1e-14)
    with pytest.raises(DimensionError):
        sphere_volume(0)


def test_origin_maps_to_south_pole():
    assert np.allclose(stereo_to_sphere(np.zeros(3)), [0, 0, 0, -1])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_stereographic_round_trip(n):
    x = np.random.default_rng(n).standard_normal((500, n)) * 5
    y = stereo_to_sphere(x)
    assert np.allclose(np.linalg.norm(y, axis=-1), 1.0, atol=1e-15)
    assert np.max(np.abs(stereo_to_plane(y) - x)) <= 1e-12 * 50


def test_north_pole_has_no_image():
    with pytest.raises(DomainError):
        stereo_to_plane(np.array([0.0, 0.0, 1.0]))


@pytest.mark.parametrize("n", [2, 3])
def test_metric_pullback_is_conformal(n):
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = rng.standard_normal(n)
        v = rng.standard_normal(n)
        assert metric_pullback_ratio(x, v) == pytest.approx(conformal_factor(x) ** 2, rel=1e-8)


def test_grid_geometry():
    grid = Grid(n=2, L=1.0, m=9, center=(1.0, -1.0))
    assert grid.h == pytest.approx(0.25)
    assert grid.shape == (9, 9)
    points = grid.points()
    assert points.shape == (9, 9, 2)
    assert np.allclose(points[4, 4], [1.0, -1.0])
    inner = grid.interior(1)
    assert inner.m == 7
    assert inner.h == pytest.approx(grid.h)
    assert np.allclose(inner.points(), points[1:-1, 1:-1])


@pytest.mark.parametrize("kwargs", [
    dict(n=2, L=1.0, m=6),
    dict(n=2, L=1.0, m=3),
    dict(n=2, L=0.0, m=7),
    dict(n=2, L=1.0, m=7, center=(0.0,)),
])
def test_grid_rejects_bad_parameters(kwargs):
    with pytest.raises(GridError):
        Grid(**kwargs)


def test_interior_too_small():
    with pytest.raises(GridError):
        Grid(n=2, L=1.0, m=7).interior(2)


@pytest.mark.parametrize("m, volume", [(1, 2 * math.pi), (2, 4 * math.pi), (3, 2 * math.pi ** 2)])
def test_sphere_rule_weights_sum_to_volume(m, volume):
    quad = sphere_quadrature(m, 20)
    assert quad.integrate(np.ones(quad.weights.shape)) == pytest.approx(volume, rel=1e-13)
    assert np.allclose(np.linalg.norm(quad.nodes, axis=-1), 1.0)


def test_sphere_rules_integrate_quadratics():
    assert sphere_quadrature(1, 4).integrate(sphere_quadrature(1, 4).nodes[:, 0] ** 2) == pytest.approx(math.pi)
    s2 = sphere_quadrature(2, 10)
    assert s2.integrate(s2.nodes[:, 2] ** 2) == pytest.approx(4 * math.pi / 3, rel=1e-13)
    s3 = sphere_quadrature(3, 10)
    assert s3.integrate(s3.nodes[:, 0] ** 2 * s3.nodes[:, 3] ** 2) == pytest.approx(math.pi ** 2 / 12, rel=1e-12)


def test_sphere_rule_limits():
    with pytest.raises(QuadratureError):
        sphere_quadrature(4, 10)
    with pytest.raises(QuadratureError):
        sphere_quadrature(2, 500)


def test_radial_gaussian():
    value = radial_integral(lambda r: math.exp(-r * r), 3)
    assert value == pytest.approx(math.pi ** 1.5, rel=1e-10)


def test_radial_divergence_is_reported():
    with pytest.raises(QuadratureError):
        radial_integral(lambda r: 1.0 / (1.0 + r * r), 3)


@pytest.mark.parametrize("n, volume", [(2, math.pi), (3, 4 * math.pi / 3)])
def test_polar_ball_rule_volume(n, volume):
    x = np.full(n, 0.25)
    ball = ball_polar_quadrature(x, sphere_quadrature(n - 1, 60), 10)
    assert np.sum(ball.weights) == pytest.approx(volume, rel=1e-8)
    assert np.all(np.linalg.norm(ball.points, axis=-1) <= 1.0 + 1e-12)


def test_polar_ball_rule_rejects_outside_point():
    with pytest.raises(DomainError):
        ball_polar_quadrature(np.array([1.0, 0.0]), sphere_quadrature(1, 10), 5)


def test_midpoint_cells_drop_singular_cell():
    x = np.array([0.1, -0.2])
    cells = ball_midpoint_cells(0.05, x)
    assert np.min(np.max(np.abs(cells.points - x), axis=-1)) > 0.025
    coarse = abs(np.sum(ball_midpoint_cells(0.2, x).weights) - math.pi)
    fine = abs(np.sum(ball_midpoint_cells(0.01, x).weights) - math.pi)
    assert fine < coarse
