import math

import numpy as np
import pytest
from scipy.special import eval_chebyt, eval_gegenbauer

from dirac_bubbles.calculus import GridField, dirac_apply, stencil
from dirac_bubbles.clifford import build_rep, clifford_mul
from dirac_bubbles.errors import DimensionError, DomainError, QuadratureError
from dirac_bubbles.fields import bubble_field, constant_field, standard_bubble
from dirac_bubbles.geometry import Grid, sphere_quadrature, sphere_volume
from dirac_bubbles.greenkernel import (
    GegenbauerEvaluator,
    KernelTerm,
    derivative_growth_exponent,
    gegenbauer,
    gegenbauer_derivative,
    harmonic_projection,
    kernel_G,
    linear_harmonic_field,
    pole_field,
    representation_reconstruct,
    series_expand_kernel,
    xi_matrix,
)


T = np.linspace(-1.0, 1.0, 101)


@pytest.mark.parametrize("tau", [0.5, 1.0, 1.5, 2.5])
@pytest.mark.parametrize("k", [0, 1, 2, 7, 30, 60])
def test_gegenbauer_matches_scipy(tau, k):
    ours = gegenbauer(tau, k, T)
    ref = eval_gegenbauer(k, tau, T)
    assert np.allclose(ours, ref, rtol=1e-10, atol=1e-10 * np.max(np.abs(ref)))


@pytest.mark.parametrize("tau", [0.5, 1.0, 1.5])
def test_generating_function(tau):
    r = 0.3
    values = GegenbauerEvaluator(tau, 80).values(T)
    series = np.sum(values * r ** np.arange(81)[:, None], axis=0)
    assert np.allclose(series, (1.0 - 2.0 * T * r + r * r) ** (-tau), rtol=1e-13)


def test_gegenbauer_rejects_bad_indices():
    with pytest.raises(DomainError):
        gegenbauer(0.5, -1, T)
    with pytest.raises(DomainError):
        gegenbauer(0.0, 3, T)
    with pytest.raises(DomainError):
        GegenbauerEvaluator(1.0, 121)
    with pytest.raises(DomainError):
        gegenbauer_derivative(1.0, 3, T, j=-1)


@pytest.mark.parametrize("tau, k, j", [(0.5, 6, 1), (1.0, 9, 2), (1.5, 4, 1)])
def test_derivative_matches_difference_quotient(tau, k, j):
    t = np.linspace(-0.9, 0.9, 13)
    step = 1e-4
    lower = gegenbauer_derivative(tau, k, t - step, j - 1)
    upper = gegenbauer_derivative(tau, k, t + step, j - 1)
    expected = (upper - lower) / (2 * step)
    assert np.allclose(gegenbauer_derivative(tau, k, t, j), expected, rtol=1e-6, atol=1e-6)


def test_derivative_above_degree_vanishes():
    assert np.all(gegenbauer_derivative(1.0, 2, T, j=3) == 0.0)


@pytest.mark.parametrize("j", [1, 2])
def test_derivative_growth_in_degree(j):
    slope = derivative_growth_exponent(0.5, j, [20, 40, 60, 80, 100, 120])
    assert slope <= 2 * j + 0.3
    assert slope >= 2 * j - 0.3


def test_kernel_values():
    rep = build_rep(2)
    d = np.array([2.0, 0.0])
    assert np.allclose(kernel_G(d, rep), rep.gamma[0] / (2 * math.pi * 2.0))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_kernel_is_odd_with_known_norm(n):
    rep = build_rep(n)
    d = np.random.default_rng(n).standard_normal((20, n))
    G = kernel_G(d, rep)
    assert np.allclose(kernel_G(-d, rep), -G)
    norms = np.linalg.norm(G, ord=2, axis=(-2, -1))
    r = np.linalg.norm(d, axis=-1)
    assert np.allclose(norms, 1.0 / (sphere_volume(n - 1) * r ** (n - 1)))


def test_kernel_pole():
    with pytest.raises(DomainError):
        kernel_G(np.zeros((2, 3)), build_rep(3))
    with pytest.raises(DimensionError):
        kernel_G(np.ones(2), build_rep(3))


@pytest.mark.parametrize("n", [2, 3])
def test_kernel_is_dirac_harmonic_away_from_pole(n):
    rep = build_rep(n)
    e = np.zeros(rep.N, dtype=complex)
    e[0] = 1.0
    grid = Grid(n=n, L=0.1, m=11, center=(1.0,) * n)
    f = GridField.sample(grid, lambda x: np.einsum('...ab,b->...a', kernel_G(x, rep), e))
    d = dirac_apply(f, rep, stencil(4)).values
    assert np.max(np.abs(d)) <= 1e-4 * np.max(np.abs(f.values))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_series_at_origin(n):
    rep = build_rep(n)
    y = np.linspace(0.5, 1.5, n)
    assert np.allclose(series_expand_kernel(np.zeros(n), y, 2, rep), kernel_G(-y, rep), atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_series_converges(n):
    rep = build_rep(n)
    rng = np.random.default_rng(10 + n)
    y = rng.standard_normal(n)
    x = rng.standard_normal(n)
    x *= 0.3 * np.linalg.norm(y) / np.linalg.norm(x)
    exact = kernel_G(x - y, rep)
    errors = [np.linalg.norm(series_expand_kernel(x, y, K, rep) - exact) / np.linalg.norm(exact)
              for K in (5, 10, 20, 60)]
    assert errors[-1] <= 1e-10
    assert all(a > b for a, b in zip(errors, errors[1:]))


def test_series_needs_inner_point():
    rep = build_rep(3)
    with pytest.raises(DomainError):
        series_expand_kernel(np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), 10, rep)
    with pytest.raises(DomainError):
        series_expand_kernel(np.zeros(3), np.ones(3), 121, rep)


@pytest.mark.parametrize("n", [2, 3])
def test_low_degree_kernels(n):
    rep = build_rep(n)
    y = np.linspace(1.0, 2.0, n)
    x = np.full(n, 0.2)
    assert np.allclose(xi_matrix(0, x, y, rep), 0.0)
    assert np.allclose(xi_matrix(1, x, y, rep), -rep.matrix(y / np.linalg.norm(y)))
    assert np.allclose(xi_matrix(4, np.zeros(n), y, rep), 0.0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_kernel_terms_sum_to_series(n):
    rep = build_rep(n)
    x = np.full(n, 0.15)
    y = np.linspace(0.5, 1.5, n)
    terms = [KernelTerm(k, rep) for k in range(31)]
    total = sum(t.weight(y) * t(x, y) for t in terms) / sphere_volume(n - 1)
    assert np.allclose(total, series_expand_kernel(x, y, 30, rep), rtol=1e-12, atol=1e-14)
    with pytest.raises(DomainError):
        KernelTerm(-1, rep)


@pytest.mark.parametrize("k", [2, 4, 7])
def test_plane_kernel_pieces_follow_chebyshev(k):
    rep = build_rep(2)
    y = np.array([0.6, 0.8])
    x = np.array([0.3, -0.2])

    def h(p):
        rho = np.linalg.norm(p)
        return -rho ** k * eval_chebyt(k, p @ y / rho) / k

    step = 1e-6
    grad = np.array([(h(x + step * e) - h(x - step * e)) / (2 * step) for e in np.eye(2)])
    assert np.allclose(xi_matrix(k, x, y, rep), rep.matrix(grad), atol=1e-8)


@pytest.mark.parametrize("n, k", [(2, 3), (2, 7), (3, 2), (3, 5), (4, 4)])
def test_kernel_pieces_are_homogeneous(n, k):
    rep = build_rep(n)
    rng = np.random.default_rng(k)
    x, y = rng.standard_normal(n), rng.standard_normal(n)
    assert np.allclose(xi_matrix(k, 2.5 * x, y, rep), 2.5 ** (k - 1) * xi_matrix(k, x, y, rep))


@pytest.mark.parametrize("n, k", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 3)])
def test_kernel_pieces_are_dirac_harmonic(n, k):
    rep = build_rep(n)
    y = np.linspace(-1.0, 1.0, n) + 0.3
    phi = np.ones(rep.N, dtype=complex)
    grid = Grid(n=n, L=0.5, m=9, center=(0.1,) * n)
    f = GridField.sample(grid, lambda x: np.einsum('...ab,b->...a', xi_matrix(k, x, y, rep), phi))
    assert np.max(np.abs(dirac_apply(f, rep).values)) <= 1e-10 * max(1.0, np.max(np.abs(f.values)))


@pytest.mark.parametrize("n", [2, 3])
def test_reconstruct_constant(n):
    rep = build_rep(n)
    c = np.arange(1, rep.N + 1) * (1 + 0.5j)
    f = constant_field(c, n)
    assert np.max(np.abs(representation_reconstruct(f, np.zeros(n), rep) - c)) <= 1e-12
    inner = np.full(n, 0.3) / math.sqrt(n)
    assert np.max(np.abs(representation_reconstruct(f, inner, rep) - c)) <= 1e-8


@pytest.mark.parametrize("n", [2, 3])
def test_reconstruct_harmonic_field(n):
    rep = build_rep(n)
    f = linear_harmonic_field(np.ones(rep.N), rep)
    x = np.linspace(-0.4, 0.3, n)
    assert np.allclose(representation_reconstruct(f, x, rep), f(x), atol=1e-9)


@pytest.mark.parametrize("n", [2, 3])
def test_reconstruct_bubble_with_polar_rule(n):
    rep = build_rep(n)
    f = bubble_field(standard_bubble(n, lam=0.8, center=np.full(n, 0.1)))
    x = np.full(n, 0.2)
    rebuilt = representation_reconstruct(f, x, rep, sphere_quadrature(n - 1, 40), radial_nodes=40)
    assert np.linalg.norm(rebuilt - f(x)) <= 1e-8 * np.linalg.norm(f(x))


def test_midpoint_rule_improves_with_refinement():
    rep = build_rep(2)
    f = bubble_field(standard_bubble(2))
    x = np.array([0.15, -0.1])
    errors = [np.linalg.norm(representation_reconstruct(f, x, rep, volume="midpoint", h=h) - f(x))
              for h in (0.1, 0.025)]
    assert errors[1] < errors[0]


def test_reconstruct_rejects_bad_input():
    rep = build_rep(2)
    f = constant_field(np.ones(2), 2)
    with pytest.raises(QuadratureError):
        representation_reconstruct(f, np.zeros(2), rep, volume="simpson")
    with pytest.raises(DomainError):
        representation_reconstruct(f, np.array([1.0, 0.0]), rep)
    with pytest.raises(DimensionError):
        representation_reconstruct(f, np.zeros(2), rep, sphere_quadrature(2, 10))


def _sample_points(n):
    return np.random.default_rng(5).uniform(-0.4, 0.4, (15, n))


@pytest.mark.parametrize("n", [2, 3])
def test_projection_of_constant(n):
    rep = build_rep(n)
    surface = sphere_quadrature(n - 1, 30)
    c = np.ones(rep.N) * (2 - 1j)
    x = _sample_points(n)
    assert np.allclose(harmonic_projection(constant_field(c, n), 1, rep, surface)(x), c, atol=1e-12)
    for k in (0, 2, 3):
        assert np.allclose(harmonic_projection(constant_field(c, n), k, rep, surface)(x), 0.0, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_projection_of_clifford_multiple(n):
    rep = build_rep(n)
    surface = sphere_quadrature(n - 1, 30)
    phi = np.ones(rep.N, dtype=complex)
    samples = clifford_mul(rep, surface.nodes, np.broadcast_to(phi, (surface.nodes.shape[0], rep.N)))
    x = _sample_points(n)
    for k in (1, 2, 3):
        assert np.allclose(harmonic_projection(samples, k, rep, surface)(x), 0.0, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_projection_recovers_linear_part(n):
    rep = build_rep(n)
    surface = sphere_quadrature(n - 1, 30)
    f = linear_harmonic_field(np.arange(1, rep.N + 1), rep)
    x = _sample_points(n)
    assert np.allclose(harmonic_projection(f, 2, rep, surface)(x), f(x), atol=1e-10)
    assert np.allclose(harmonic_projection(f, 1, rep, surface)(x), 0.0, atol=1e-12)
    assert np.allclose(harmonic_projection(f, 3, rep, surface)(x), 0.0, atol=1e-10)


@pytest.mark.parametrize("n", [2, 3])
def test_projections_sum_to_harmonic_field(n):
    rep = build_rep(n)
    surface = sphere_quadrature(n - 1, 60)
    y0 = np.zeros(n)
    y0[-1] = 2.0
    f = pole_field(y0, np.ones(rep.N), rep)
    x = _sample_points(n)
    partial = {}
    total = np.zeros((x.shape[0], rep.N), dtype=complex)
    for k in range(21):
        total = total + harmonic_projection(f, k, rep, surface)(x)
        if k in (5, 20):
            partial[k] = np.max(np.abs(total - f(x)))
    assert partial[20] < partial[5]
    assert partial[20] <= 1e-8


def test_projection_is_dirac_harmonic():
    rep = build_rep(3)
    surface = sphere_quadrature(2, 20)
    q = harmonic_projection(bubble_field(standard_bubble(3)), 3, rep, surface)
    grid = Grid(n=3, L=0.2, m=7, center=(0.1, 0.0, -0.1))
    f = GridField.sample(grid, q)
    assert np.max(np.abs(dirac_apply(f, rep).values)) <= 1e-9 * max(1.0, np.max(np.abs(f.values)))


def test_projection_input_checks():
    rep = build_rep(3)
    surface = sphere_quadrature(2, 10)
    with pytest.raises(DimensionError):
        harmonic_projection(np.zeros((3, 2)), 1, rep, surface)
    with pytest.raises(DimensionError):
        harmonic_projection(np.zeros((surface.nodes.shape[0], 2)), 1, rep, sphere_quadrature(1, 10))
    with pytest.raises(DomainError):
        harmonic_projection(np.zeros((surface.nodes.shape[0], 2)), 200, rep, surface)
