"""
Dirac Green kernel on R^n, its Gegenbauer series, and ball reconstruction

    G(d) = gamma(d) / (Vol(S^(n-1)) |d|^n),   D_x G(x - y) = -delta_y

For |x| < |y| the kernel expands as
    G(x - y) = (1 / Vol(S^(n-1))) sum_k |y|^-(n-2+k) Xi_k(x, y)
with Xi_k = D_x h_k, h_k(x) = |x|^k Z_k(<x, y/|y|> / |x|) and
    Z_k = -C_k^tau / (2 tau),  tau = (n - 2)/2   (n >= 3)
    Z_k = -T_k / k                               (n = 2)
so that h_k is a harmonic polynomial homogeneous of degree k and Xi_k has
entries homogeneous of degree k - 1.

On the unit ball a smooth psi is rebuilt from its boundary values and D psi:
    psi(x) = int_{S^(n-1)} G(x - y) gamma(y) psi(y) dS - int_B G(x - y) D psi(y) dy
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import poch

from .clifford import CliffordRep, build_rep
from .errors import DimensionError, DomainError, QuadratureError
from .fields import SpinorField
from .geometry import (
    SphereQuadrature,
    ball_midpoint_cells,
    ball_polar_quadrature,
    sphere_quadrature,
    sphere_volume,
)

logger = logging.getLogger(__name__)

MAX_DEGREE = 120
VOLUME_RULES = ("polar", "midpoint")
PAIR_BLOCK = 200_000


@dataclass
class GegenbauerEvaluator:
    """Forward three-term recurrence for C_k^tau, k = 0..K

    C_k = (2 t (k + tau - 1) C_{k-1} - (k + 2 tau - 2) C_{k-2}) / k
    """
    tau: float
    K: int
    _a: np.ndarray = field(init=False, repr=False)
    _b: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError(f"Gegenbauer index must be positive, got tau={self.tau}")
        if not 0 <= self.K <= MAX_DEGREE:
            raise DomainError(f"Gegenbauer degree must be in 0..{MAX_DEGREE}, got {self.K}")
        k = np.arange(2, self.K + 1, dtype=float)
        self._a = 2.0 * (k + self.tau - 1.0) / k
        self._b = (k + 2.0 * self.tau - 2.0) / k

    def values(self, t) -> np.ndarray:
        """All degrees at once, shape (K + 1,) + t.shape"""
        t = np.asarray(t, dtype=float)
        out = np.empty((self.K + 1,) + t.shape)
        out[0] = 1.0
        if self.K >= 1:
            out[1] = 2.0 * self.tau * t
        for i in range(2, self.K + 1):
            out[i] = self._a[i - 2] * t * out[i - 1] - self._b[i - 2] * out[i - 2]
        return out


def gegenbauer(tau: float, k: int, t) -> np.ndarray:
    """C_k^tau(t)"""
    if k < 0:
        raise DomainError(f"Gegenbauer degree must be >= 0, got {k}")
    return GegenbauerEvaluator(tau, k).values(t)[k]


def gegenbauer_derivative(tau: float, k: int, t, j: int = 1) -> np.ndarray:
    """d^j/dt^j C_k^tau = 2^j (tau)_j C_{k-j}^{tau+j}"""
    if j < 0:
        raise DomainError(f"derivative order must be >= 0, got {j}")
    if j > k:
        return np.zeros_like(np.asarray(t, dtype=float))
    return 2.0 ** j * poch(tau, j) * gegenbauer(tau + j, k - j, t)


def derivative_growth_exponent(tau: float, j: int, degrees) -> float:
    """Log-log slope in k of max_{[-1, 1]} |d^j C_k^tau|"""
    t = np.linspace(-1.0, 1.0, 2001)
    degrees = np.asarray(degrees, dtype=int)
    peaks = [float(np.max(np.abs(gegenbauer_derivative(tau, int(k), t, j)))) for k in degrees]
    slope, _ = np.polyfit(np.log(degrees), np.log(peaks), 1)
    return float(slope)


def _chebyshev_pair(K: int, c: np.ndarray):
    """T_k(c) and U_k(c) for k = 0..K"""
    T = np.empty((K + 1,) + c.shape)
    U = np.empty((K + 1,) + c.shape)
    T[0], U[0] = 1.0, 1.0
    if K >= 1:
        T[1], U[1] = c, 2.0 * c
    for k in range(2, K + 1):
        T[k] = 2.0 * c * T[k - 1] - T[k - 2]
        U[k] = 2.0 * c * U[k - 1] - U[k - 2]
    return T, U


def _zonal(n: int, K: int, c: np.ndarray):
    """Z_k(c) and Z_k'(c) for k = 0..K"""
    Z = np.zeros((K + 1,) + c.shape)
    dZ = np.zeros((K + 1,) + c.shape)
    if K == 0:
        return Z, dZ
    if n == 2:
        T, U = _chebyshev_pair(K, c)
        k = np.arange(1, K + 1).reshape((-1,) + (1,) * c.ndim)
        Z[1:] = -T[1:] / k
        dZ[1:] = -U[:-1]
        return Z, dZ
    tau = (n - 2) / 2.0
    Z[:] = -GegenbauerEvaluator(tau, K).values(c) / (2.0 * tau)
    dZ[1:] = -GegenbauerEvaluator(tau + 1.0, K - 1).values(c)
    return Z, dZ


def _harmonic_gradients(n: int, K: int, x: np.ndarray, y_unit: np.ndarray) -> np.ndarray:
    """grad_x h_k for k = 0..K, shape (K + 1,) + broadcast(x, y).shape

    grad h_k = rho^(k-2) ((k Z_k - c Z_k') x + rho Z_k' y_unit), rho = |x|
    """
    x, y_unit = np.broadcast_arrays(x, y_unit)
    rho = np.linalg.norm(x, axis=-1)
    safe = np.where(rho > 0, rho, 1.0)
    c = np.clip(np.sum(x * y_unit, axis=-1) / safe, -1.0, 1.0)
    Z, dZ = _zonal(n, K, c)
    grads = np.zeros((K + 1,) + x.shape)
    origin = rho == 0
    for k in range(1, K + 1):
        radial = (k * Z[k] - c * dZ[k])[..., None] * x
        tangential = (safe * dZ[k])[..., None] * y_unit
        g = (safe ** (k - 2))[..., None] * (radial + tangential)
        if k == 1:
            g = np.where(origin[..., None], -y_unit, g)
        else:
            g = np.where(origin[..., None], 0.0, g)
        grads[k] = g
    return grads


def _check_dimension(rep: CliffordRep, *vectors) -> None:
    for v in vectors:
        if np.shape(v)[-1] != rep.n:
            raise DimensionError(f"vector has {np.shape(v)[-1]} components, rep has n={rep.n}")
    if rep.n < 2:
        raise DimensionError(f"the Dirac Green kernel needs n >= 2, got {rep.n}")


def kernel_G(d, rep: Optional[CliffordRep] = None) -> np.ndarray:
    """G(d) = gamma(d) / (Vol(S^(n-1)) |d|^n); d may carry batch axes"""
    d = np.asarray(d, dtype=float)
    rep = rep or build_rep(d.shape[-1])
    _check_dimension(rep, d)
    r = np.linalg.norm(d, axis=-1)
    if np.any(r == 0):
        raise DomainError("Green kernel is singular at d = 0")
    scale = 1.0 / (sphere_volume(rep.n - 1) * r ** rep.n)
    return scale[..., None, None] * rep.matrix(d)


def xi_matrix(k: int, x, y, rep: Optional[CliffordRep] = None) -> np.ndarray:
    """Xi_k(x, y) = D_x h_k, entries homogeneous of degree k - 1 in x"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rep = rep or build_rep(x.shape[-1])
    _check_dimension(rep, x, y)
    if not 0 <= k <= MAX_DEGREE:
        raise DomainError(f"kernel degree must be in 0..{MAX_DEGREE}, got {k}")
    y_unit = y / np.linalg.norm(y, axis=-1, keepdims=True)
    return rep.matrix(_harmonic_gradients(rep.n, k, x, y_unit)[k])


@dataclass(frozen=True, eq=False)
class KernelTerm:
    """Degree-k term Xi_k of the kernel series, bound to a representation"""
    k: int
    rep: CliffordRep

    def __post_init__(self):
        if not 0 <= self.k <= MAX_DEGREE:
            raise DomainError(f"kernel degree must be in 0..{MAX_DEGREE}, got {self.k}")

    def __call__(self, x, y) -> np.ndarray:
        return xi_matrix(self.k, x, y, self.rep)

    def weight(self, y) -> np.ndarray:
        """|y|^-(n-2+k), the factor the term carries in the series"""
        return np.linalg.norm(np.asarray(y, dtype=float), axis=-1) ** (-(self.rep.n - 2 + self.k))


def series_expand_kernel(x, y, K: int, rep: Optional[CliffordRep] = None) -> np.ndarray:
    """Partial sum through degree K of the Gegenbauer series of G(x - y)"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rep = rep or build_rep(x.shape[-1])
    _check_dimension(rep, x, y)
    if not 0 <= K <= MAX_DEGREE:
        raise DomainError(f"series degree must be in 0..{MAX_DEGREE}, got {K}")
    rx = np.linalg.norm(x, axis=-1)
    ry = np.linalg.norm(y, axis=-1)
    if np.any(rx >= ry):
        raise DomainError("kernel series only converges for |x| < |y|")
    grads = _harmonic_gradients(rep.n, K, x, y / ry[..., None])
    k = np.arange(K + 1).reshape((-1,) + (1,) * (grads.ndim - 1))
    weighted = np.sum(grads * ry[None, ..., None] ** (-(rep.n - 2 + k)), axis=0)
    return rep.matrix(weighted) / sphere_volume(rep.n - 1)


def representation_reconstruct(f: SpinorField, x, rep: Optional[CliffordRep] = None,
                               surface: Optional[SphereQuadrature] = None, volume: str = "polar",
                               radial_nodes: int = 40, h: float = 0.05) -> np.ndarray:
    """Rebuild f(x), |x| < 1, from boundary values of f and D f inside the ball

    The volume term uses a polar rule centered at x, or midpoint cells of side
    h with the cell holding x dropped. It is skipped when f is D-harmonic.
    """
    x = np.asarray(x, dtype=float)
    rep = rep or build_rep(f.n)
    _check_dimension(rep, x)
    if volume not in VOLUME_RULES:
        raise QuadratureError(f"unknown volume rule {volume!r}; expected one of {VOLUME_RULES}")
    if np.dot(x, x) >= 1.0:
        raise DomainError(f"point {x} is not inside the unit ball")
    surface = surface or sphere_quadrature(rep.n - 1, 40)
    if surface.dim != rep.n - 1:
        raise DimensionError(f"surface rule is on S^{surface.dim}, ball is in R^{rep.n}")

    y = surface.nodes
    boundary = np.einsum('qab,qbc,qc->qa', kernel_G(x - y, rep), rep.matrix(y), f(y))
    total = surface.integrate(boundary)

    if f.dirac is not None:
        if volume == "polar":
            ball = ball_polar_quadrature(x, surface, radial_nodes)
        else:
            ball = ball_midpoint_cells(h, x, rep.n)
        inner = np.einsum('qab,qb->qa', kernel_G(x - ball.points, rep), f.dirac(ball.points))
        total = total - np.sum(ball.weights[:, None] * inner, axis=0)
    logger.debug(f"reconstructed {f.name} at {x} with {volume} volume rule")
    return total


@dataclass(frozen=True, eq=False)
class HarmonicProjection:
    """Q_k(x) = (1/Vol(S^(n-1))) sum_i w_i Xi_k(x, y_i) gamma(y_i) psi(y_i)

    Entries are harmonic polynomials of degree k - 1 and D Q_k = 0.
    """
    k: int
    rep: CliffordRep
    nodes: np.ndarray
    moments: np.ndarray

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        batch = x.shape[:-1]
        flat = x.reshape(-1, 1, self.rep.n)
        step = max(1, PAIR_BLOCK // self.nodes.shape[0])
        values = np.concatenate([
            np.einsum('pqj,jab,qb->pa',
                      _harmonic_gradients(self.rep.n, self.k, flat[i:i + step], self.nodes[None, :, :])[self.k],
                      self.rep.gamma, self.moments)
            for i in range(0, flat.shape[0], step)
        ])
        return values.reshape(batch + (self.rep.N,)) / sphere_volume(self.rep.n - 1)


def harmonic_projection(boundary, k: int, rep: CliffordRep, surface: SphereQuadrature) -> HarmonicProjection:
    """Degree-k piece of the boundary integral

    `boundary` is a SpinorField or its samples on surface.nodes, shape (Q, N).
    """
    if surface.dim != rep.n - 1:
        raise DimensionError(f"surface rule is on S^{surface.dim}, ball is in R^{rep.n}")
    if not 0 <= k <= MAX_DEGREE:
        raise DomainError(f"projection degree must be in 0..{MAX_DEGREE}, got {k}")
    y = surface.nodes
    samples = boundary(y) if callable(boundary) else np.asarray(boundary, dtype=np.complex128)
    if samples.shape != (y.shape[0], rep.N):
        raise DimensionError(f"boundary samples have shape {samples.shape}, expected {(y.shape[0], rep.N)}")
    moments = surface.weights[:, None] * np.einsum('qab,qb->qa', rep.matrix(y), samples)
    return HarmonicProjection(k=k, rep=rep, nodes=y, moments=moments)


def linear_harmonic_field(phi, rep: CliffordRep) -> SpinorField:
    """(x_1 - x_2 gamma_1 gamma_2) Phi, a degree-one D-harmonic field"""
    if rep.n < 2:
        raise DimensionError(f"linear harmonic field needs n >= 2, got {rep.n}")
    phi = np.asarray(phi, dtype=np.complex128)
    rotated = rep.gamma[0] @ rep.gamma[1] @ phi

    def evaluate(x):
        return x[..., 0:1] * phi - x[..., 1:2] * rotated

    return SpinorField(n=rep.n, N=rep.N, evaluate=evaluate, name="linear-harmonic")


def pole_field(y0, phi, rep: CliffordRep) -> SpinorField:
    """G(x - y0) Phi, D-harmonic away from y0"""
    y0 = np.asarray(y0, dtype=float)
    phi = np.asarray(phi, dtype=np.complex128)

    def evaluate(x):
        return np.einsum('...ab,b->...a', kernel_G(x - y0, rep), phi)

    return SpinorField(n=rep.n, N=rep.N, evaluate=evaluate, decay_exponent=float(rep.n - 1), name="pole")
