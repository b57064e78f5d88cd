"""
Spheres, stereographic maps, Cartesian grids and quadrature

The inverse stereographic projection
    pi(x) = (2x / (|x|^2 + 1), (|x|^2 - 1) / (|x|^2 + 1))
sends 0 to the south pole and pulls the round metric back to
(2 / (1 + |x|^2))^2 times the Euclidean one. Its exact inverse is
    p(y) = y' / (1 - y^{n+1}).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn
from scipy.special import roots_jacobi, roots_legendre

from .errors import DimensionError, DomainError, GridError, QuadratureError

logger = logging.getLogger(__name__)

MAX_QUADRATURE_ORDER = 128
NORTH_POLE_GAP = 1e-14


def sphere_volume(m: int) -> float:
    """Volume of the round unit m-sphere S^m in R^(m+1)"""
    if m < 1:
        raise DimensionError(f"sphere dimension must be >= 1, got {m}")
    return float(2.0 * math.pi ** ((m + 1) / 2) / gamma_fn((m + 1) / 2))


def stereo_to_sphere(x) -> np.ndarray:
    """Inverse stereographic projection R^n -> S^n; leading axes are batch axes"""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    denom = r2 + 1.0
    return np.concatenate([2.0 * x / denom, (r2 - 1.0) / denom], axis=-1)


def stereo_to_plane(y) -> np.ndarray:
    """Stereographic projection S^n minus the north pole -> R^n"""
    y = np.asarray(y, dtype=float)
    gap = 1.0 - y[..., -1:]
    if np.any(gap <= NORTH_POLE_GAP):
        raise DomainError("north pole has no finite stereographic image")
    return y[..., :-1] / gap


def conformal_factor(x) -> np.ndarray:
    """2 / (1 + |x|^2), the length scale of the pulled-back round metric"""
    x = np.asarray(x, dtype=float)
    return 2.0 / (1.0 + np.sum(x * x, axis=-1))


def metric_pullback_ratio(x, v, step: float = 1e-5) -> float:
    """|d pi(v)|^2 / |v|^2 by central differences of stereo_to_sphere"""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    unit = v / np.linalg.norm(v)
    d_pi = (stereo_to_sphere(x + step * unit) - stereo_to_sphere(x - step * unit)) / (2.0 * step)
    return float(np.dot(d_pi, d_pi))


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian box [c - L, c + L]^n with m nodes per axis

    Attributes:
        n: dimension
        L: half-width of the box
        m: points per axis, odd so the center is a node
        center: box center (defaults to the origin)
    """
    n: int
    L: float
    m: int
    center: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.n < 1:
            raise GridError(f"grid dimension must be >= 1, got {self.n}")
        if self.m < 5 or self.m % 2 == 0:
            raise GridError(f"points per axis must be odd and >= 5, got {self.m}")
        if not self.L > 0:
            raise GridError(f"half-width must be positive, got {self.L}")
        if self.center is None:
            object.__setattr__(self, 'center', (0.0,) * self.n)
        elif len(self.center) != self.n:
            raise GridError(f"center has {len(self.center)} components, grid has n={self.n}")
        else:
            object.__setattr__(self, 'center', tuple(float(c) for c in self.center))

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.m - 1)

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.m,) * self.n

    def axis(self, j: int) -> np.ndarray:
        return self.center[j] + (-self.L + np.arange(self.m) * self.h)

    def points(self) -> np.ndarray:
        """Node coordinates, shape (m, ..., m, n)"""
        axes = np.meshgrid(*[self.axis(j) for j in range(self.n)], indexing='ij')
        return np.stack(axes, axis=-1)

    def interior(self, r: int) -> 'Grid':
        """Grid left after trimming r nodes from each side of every axis"""
        if self.m - 2 * r < 5:
            raise GridError(f"grid with m={self.m} too small to trim {r} nodes per side")
        return Grid(n=self.n, L=self.L - r * self.h, m=self.m - 2 * r, center=self.center)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Product quadrature on S^dim in R^(dim+1), exact up to `order`"""
    dim: int
    order: int
    nodes: np.ndarray
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values) -> np.ndarray:
        """Weighted sum over the first axis of `values`"""
        values = np.asarray(values)
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return np.sum(w * values, axis=0)


def _circle_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    k = order + 1
    phi = 2.0 * np.pi * np.arange(k) / k
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1), np.full(k, 2.0 * np.pi / k)


def _two_sphere_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    z, wz = roots_legendre(order // 2 + 1)
    ring, wring = _circle_rule(order)
    s = np.sqrt(1.0 - z * z)
    nodes = np.concatenate(
        [s[:, None, None] * ring[None, :, :], np.broadcast_to(z[:, None, None], (z.size, ring.shape[0], 1))],
        axis=-1,
    ).reshape(-1, 3)
    return nodes, (wz[:, None] * wring[None, :]).reshape(-1)


def _three_sphere_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    t, wt = roots_jacobi(order // 2 + 1, 0.5, 0.5)
    base, wbase = _two_sphere_rule(order)
    s = np.sqrt(1.0 - t * t)
    nodes = np.concatenate(
        [s[:, None, None] * base[None, :, :], np.broadcast_to(t[:, None, None], (t.size, base.shape[0], 1))],
        axis=-1,
    ).reshape(-1, 4)
    return nodes, (wt[:, None] * wbase[None, :]).reshape(-1)


_SPHERE_RULES = {1: _circle_rule, 2: _two_sphere_rule, 3: _three_sphere_rule}


def sphere_quadrature(m: int, order: int) -> SphereQuadrature:
    """Quadrature on S^m (m in 1..3) exact for polynomials of degree <= order

    S^1 uses equally spaced nodes. S^2 takes Gauss-Legendre in the height
    coordinate times uniform azimuth. S^3 adds a Gauss-Jacobi(1/2, 1/2) factor
    in the last coordinate.
    """
    if m not in _SPHERE_RULES:
        raise QuadratureError(f"sphere quadrature supports S^1..S^3, got S^{m}")
    if not 0 <= order <= MAX_QUADRATURE_ORDER:
        raise QuadratureError(f"quadrature order must be in 0..{MAX_QUADRATURE_ORDER}, got {order}")
    nodes, weights = _SPHERE_RULES[m](order)
    return SphereQuadrature(dim=m, order=order, nodes=np.ascontiguousarray(nodes), weights=weights)


def radial_integral(f: Callable, n: int, scale: float = 1.0, rel_tol: float = 1e-10) -> float:
    """Integral over R^n of the radial function f(|x|)

    Evaluates Vol(S^(n-1)) * int_0^inf r^(n-1) f(r) dr with r = scale * tan(theta),
    so the infinite endpoint maps to theta = pi/2 exactly.

    Raises:
        QuadratureError: when r^n f(r) does not decay (divergent integral)
    """
    if n < 1:
        raise DimensionError(f"dimension must be >= 1, got {n}")
    shell = sphere_volume(n - 1) if n >= 2 else 2.0

    with np.errstate(over='ignore', under='ignore'):
        near, far = 1e3 * scale, 1e6 * scale
        tail_near = abs(near ** n * float(f(near)))
        tail_far = abs(far ** n * float(f(far)))
    if not np.isfinite(tail_far) or (tail_far > 1e-12 and tail_far >= 0.5 * tail_near):
        raise QuadratureError(
            f"radial integrand does not decay faster than r^-{n}: r^n f(r) = {tail_near:.3e} at r={near:.0e}, "
            f"{tail_far:.3e} at r={far:.0e}"
        )

    def integrand(theta: float) -> float:
        r = scale * math.tan(theta)
        jac = scale / math.cos(theta) ** 2
        with np.errstate(over='ignore', under='ignore'):
            value = r ** (n - 1) * float(f(r)) * jac
        return value if np.isfinite(value) else 0.0

    value, abserr = integrate.quad(integrand, 0.0, 0.5 * math.pi, epsabs=0.0, epsrel=rel_tol, limit=400)
    if abserr > 100.0 * rel_tol * abs(value) + 1e-300:
        logger.warning(f"radial quadrature error estimate {abserr:.2e} exceeds target for value {value:.6e}")
    return shell * value


@dataclass(frozen=True, eq=False)
class BallQuadrature:
    """Volume quadrature over the unit ball: points (Q, n) and weights (Q,)"""
    points: np.ndarray
    weights: np.ndarray


def ball_polar_quadrature(x, surface: SphereQuadrature, radial_nodes: int) -> BallQuadrature:
    """Polar rule over B_1 centered at the interior point x

    Along each direction w the segment from x to the sphere has length
    rho(w) = -<x,w> + sqrt(<x,w>^2 + 1 - |x|^2). The rho^(n-1) Jacobian is
    folded into the weights, so kernels singular like |y - x|^(1-n) become
    smooth integrands.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if surface.dim != n - 1:
        raise DimensionError(f"surface rule is on S^{surface.dim}, ball is in R^{n}")
    if np.dot(x, x) >= 1.0:
        raise DomainError(f"center {x} is not inside the unit ball")
    t, wt = roots_legendre(radial_nodes)
    proj = surface.nodes @ x
    rho_max = -proj + np.sqrt(proj * proj + 1.0 - np.dot(x, x))
    rho = 0.5 * rho_max[:, None] * (t[None, :] + 1.0)
    weights = surface.weights[:, None] * (0.5 * rho_max[:, None] * wt[None, :]) * rho ** (n - 1)
    points = x + rho[:, :, None] * surface.nodes[:, None, :]
    return BallQuadrature(points=points.reshape(-1, n), weights=weights.reshape(-1))


def ball_midpoint_cells(h: float, x, n: Optional[int] = None) -> BallQuadrature:
    """Midpoint cells of side h with centers inside B_1, minus the cell containing x"""
    x = np.asarray(x, dtype=float)
    n = n or x.shape[-1]
    count = int(math.ceil(2.0 / h))
    centers_1d = -1.0 + (np.arange(count) + 0.5) * h
    mesh = np.stack(np.meshgrid(*([centers_1d] * n), indexing='ij'), axis=-1).reshape(-1, n)
    inside = np.sum(mesh * mesh, axis=-1) < 1.0
    singular = np.max(np.abs(mesh - x), axis=-1) <= 0.5 * h
    keep = inside & ~singular
    return BallQuadrature(points=mesh[keep], weights=np.full(int(keep.sum()), h ** n))
