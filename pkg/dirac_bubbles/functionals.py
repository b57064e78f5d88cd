"""
Action, quotients and the ground-state lower bound, plus the scalar
equations the bubble length feeds into: the flat Yamabe equation for n >= 3
and the Liouville equation for n = 2.

Every integral over R^n is radial and goes through geometry.radial_integral.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .calculus import DerivativeStencil, ResidualNorms, laplacian_apply, residual_norms, stencil
from .errors import DimensionError, QuadratureError
from .fields import BubbleParams, bubble_length, critical_exponent, sphere_trace_length
from .geometry import Grid, conformal_factor, radial_integral, sphere_volume, stereo_to_plane

logger = logging.getLogger(__name__)

RELATIVE_FLOOR = 1e-300
LOWER_BOUND_RTOL = 1e-8
YAMABE_POINTS = {3: 81, 4: 21, 5: 11}
SPHERE_SAMPLE_CAP = 0.99


@dataclass(frozen=True)
class FunctionalReport:
    """A measured functional value next to its closed-form reference"""
    name: str
    measured: float
    reference: float
    identity: str

    @property
    def relative_error(self) -> float:
        return abs(self.measured - self.reference) / max(abs(self.reference), RELATIVE_FLOOR)


def ground_state_level(n: int) -> float:
    """(1/2n) (n/2)^n Vol(S^n), the least action of a non-zero solution"""
    return (n / 2.0) ** n * sphere_volume(n) / (2.0 * n)


def conformal_eigenvalue_bound(n: int) -> float:
    """(n/2) Vol(S^n)^(1/n)"""
    return 0.5 * n * sphere_volume(n) ** (1.0 / n)


def _critical_mass(p: BubbleParams) -> float:
    exponent = critical_exponent(p.n)
    return radial_integral(lambda r: bubble_length(p, r) ** exponent, p.n, scale=p.lam)


def action(p: BubbleParams) -> float:
    """On-shell action (1/2n) int |psi|^(2n/(n-1)) of a bubble"""
    value = _critical_mass(p) / (2.0 * p.n)
    logger.debug(f"action n={p.n} lam={p.lam}: {value:.15g}")
    return value


def sobolev_quotient(p: BubbleParams) -> float:
    """(int |psi|^(2n/(n-1)))^(1/n)"""
    return _critical_mass(p) ** (1.0 / p.n)


def profile_quotient(profile: Callable, n: int, scale: float = 1.0) -> float:
    """(int profile(|x|)^(2n/(n-1)))^(1/n) for any radial length profile"""
    exponent = critical_exponent(n)
    return radial_integral(lambda r: profile(r) ** exponent, n, scale=scale) ** (1.0 / n)


@dataclass(frozen=True)
class LowerBoundVerdict:
    value: float
    bound: float
    tolerance: float

    @property
    def passes(self) -> bool:
        return self.value >= self.bound - self.tolerance

    @property
    def ground_state(self) -> bool:
        return abs(self.value - self.bound) <= self.tolerance

    def __str__(self) -> str:
        if not self.passes:
            return f"violates bound: {self.value:.12g} < {self.bound:.12g}"
        if self.ground_state:
            return f"ground state: {self.value:.12g} = {self.bound:.12g}"
        return f"above bound: {self.value:.12g} > {self.bound:.12g}"


def lower_bound_check(value: float, n: int, rtol: float = LOWER_BOUND_RTOL) -> LowerBoundVerdict:
    """Compare an action value with the ground-state level"""
    bound = ground_state_level(n)
    return LowerBoundVerdict(value=float(value), bound=bound, tolerance=rtol * bound)


def talenti_profile(lam: float, center, x) -> np.ndarray:
    """u(x) = (2 lam / (lam^2 + |x - x0|^2))^((n-2)/2)"""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    d = x - np.asarray(center, dtype=float)
    return (2.0 * lam / (lam * lam + np.sum(d * d, axis=-1))) ** ((n - 2) / 2.0)


def yamabe_constant(n: int) -> float:
    """c_n = 4(n-1)/(n-2)"""
    if n < 3:
        raise DimensionError(f"the conformal Laplacian constant needs n >= 3, got {n}")
    return 4.0 * (n - 1) / (n - 2)


def yamabe_grid(n: int, lam: float, center=None, m: Optional[int] = None) -> Grid:
    center = tuple(np.zeros(n) if center is None else np.asarray(center, dtype=float))
    return Grid(n=n, L=2.0 * lam, m=m or YAMABE_POINTS.get(n, 9), center=center)


def yamabe_residual(lam: float, center, n: int, grid: Optional[Grid] = None,
                    st: Optional[DerivativeStencil] = None,
                    profile: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> ResidualNorms:
    """Residual of -c_n Delta u = n(n-1) u^((n+2)/(n-2)) on interior nodes

    `profile` replaces the Talenti bubble by another scalar field.
    """
    c_n = yamabe_constant(n)
    st = st or stencil(2)
    grid = grid or yamabe_grid(n, lam, center)
    if grid.n != n:
        raise DimensionError(f"grid is {grid.n}-dimensional, equation is in R^{n}")
    points = grid.points()
    u = profile(points) if profile is not None else talenti_profile(lam, center, points)
    u = np.broadcast_to(np.asarray(u, dtype=float), grid.shape)
    r = st.radius
    inner = u[tuple(slice(r, -r) for _ in range(n))]
    lhs = -c_n * laplacian_apply(u, grid, st)
    rhs = n * (n - 1) * inner ** ((n + 2) / (n - 2))
    return residual_norms(lhs, rhs)


def _sphere_samples(dim: int, count: int, seed: int) -> np.ndarray:
    """Uniform points on S^dim with last coordinate <= SPHERE_SAMPLE_CAP"""
    rng = np.random.default_rng(seed)
    kept = []
    total = 0
    while total < count:
        y = rng.standard_normal((2 * count, dim + 1))
        y /= np.linalg.norm(y, axis=-1, keepdims=True)
        y = y[y[:, -1] <= SPHERE_SAMPLE_CAP]
        kept.append(y)
        total += y.shape[0]
    return np.concatenate(kept)[:count]


def length_coupling_check(p: BubbleParams, samples=1000, talenti_lam: Optional[float] = None,
                          talenti_center=None, seed: int = 0) -> float:
    """Max relative gap between the rescaled bubble length and the Talenti bubble

    The length is read off the sphere trace and carried back to R^n with the
    conformal weight, h = (2/n)^((n-2)/2) f^((n-2)/2) |phi|^((n-2)/(n-1)) with
    f = 2 / (1 + |x|^2).
    """
    n = p.n
    if n < 3:
        raise DimensionError(f"length coupling to the Yamabe equation needs n >= 3, got {n}")
    talenti_lam = p.lam if talenti_lam is None else talenti_lam
    talenti_center = p.center if talenti_center is None else np.asarray(talenti_center, dtype=float)
    y = _sphere_samples(n, int(samples), seed) if np.isscalar(samples) else np.asarray(samples, dtype=float)
    x = stereo_to_plane(y)
    trace = sphere_trace_length(p, y)
    h = (2.0 / n) ** ((n - 2) / 2.0) * conformal_factor(x) ** ((n - 2) / 2.0) * trace ** ((n - 2) / (n - 1))
    u = talenti_profile(talenti_lam, talenti_center, x)
    return float(np.max(np.abs(h - u) / u))


def yamabe_invariant_check(n: int, lam: float = 1.0) -> FunctionalReport:
    """Flat Yamabe quotient at the Talenti bubble against n(n-1) Vol(S^n)^(2/n)

    The Dirichlet energy is integrated from the closed-form u'(r); the
    integrated-by-parts form n(n-1) int u^(2n/(n-2)) must agree with it, which
    needs r^(n-1) u u' -> 0 at infinity.
    """
    c_n = yamabe_constant(n)
    a = (n - 2) / 2.0
    p_crit = 2.0 * n / (n - 2)

    def u(r):
        return (2.0 * lam / (lam * lam + r * r)) ** a

    def du(r):
        return -2.0 * a * r * u(r) / (lam * lam + r * r)

    def boundary(r):
        return r ** (n - 1) * u(r) * du(r)

    near, far = abs(boundary(1e3 * lam)), abs(boundary(1e6 * lam))
    if not far < 1e-3 * near:
        raise QuadratureError(f"boundary term r^(n-1) u u' does not vanish: {near:.3e} -> {far:.3e}")

    energy = c_n * radial_integral(lambda r: du(r) ** 2, n, scale=lam)
    mass = radial_integral(lambda r: u(r) ** p_crit, n, scale=lam)
    by_parts = n * (n - 1) * mass
    if abs(energy - by_parts) > 1e-8 * by_parts:
        logger.warning(f"Yamabe energy {energy:.12g} and its by-parts form {by_parts:.12g} disagree")
    return FunctionalReport(
        name=f"yamabe_quotient_n{n}",
        measured=energy / mass ** ((n - 2) / n),
        reference=n * (n - 1) * sphere_volume(n) ** (2.0 / n),
        identity="c_n int |grad u|^2 / (int u^(2n/(n-2)))^((n-2)/n) = n(n-1) Vol(S^n)^(2/n)",
    )


def liouville_profile(lam: float, z0, z) -> np.ndarray:
    """v(z) = ln(4 lam / (4 + lam^2 |z - z0|^2))"""
    z = np.asarray(z, dtype=float)
    d = z - np.asarray(z0, dtype=float)
    return np.log(4.0 * lam / (4.0 + lam * lam * np.sum(d * d, axis=-1)))


def liouville_grid(lam: float, z0=None, m: int = 201) -> Grid:
    z0 = (0.0, 0.0) if z0 is None else tuple(float(c) for c in z0)
    return Grid(n=2, L=2.0 / lam, m=m, center=z0)


def liouville_residual(lam: float, z0, grid: Optional[Grid] = None,
                       st: Optional[DerivativeStencil] = None) -> ResidualNorms:
    """Residual of -Delta v = e^(2v) on interior nodes"""
    st = st or stencil(2)
    grid = grid or liouville_grid(lam, z0)
    if grid.n != 2:
        raise DimensionError(f"the Liouville equation lives in R^2, grid is {grid.n}-dimensional")
    v = liouville_profile(lam, z0, grid.points())
    r = st.radius
    inner = v[r:-r, r:-r]
    return residual_norms(-laplacian_apply(v, grid, st), np.exp(2.0 * inner))


def liouville_total_curvature(lam: float) -> float:
    """int_{R^2} e^(2v) = 4 pi for every lam"""
    return radial_integral(lambda r: (4.0 * lam / (4.0 + lam * lam * r * r)) ** 2, 2, scale=2.0 / lam)


def liouville_sphere_length(lam: float, z0, y) -> np.ndarray:
    """(e^v (1 + |z|^2) / 2)^(1/2) at z = p(y); identically 1 for (lam, z0) = (2, 0)"""
    z = stereo_to_plane(y)
    d = z - np.asarray(z0, dtype=float)
    return np.sqrt(2.0 * lam * (1.0 + np.sum(z * z, axis=-1)) / (4.0 + lam * lam * np.sum(d * d, axis=-1)))


def action_report(p: BubbleParams) -> FunctionalReport:
    return FunctionalReport(
        name=f"action_n{p.n}",
        measured=action(p),
        reference=ground_state_level(p.n),
        identity="(1/2n) int |psi|^(2n/(n-1)) = (1/2n) (n/2)^n Vol(S^n)",
    )


def sobolev_report(p: BubbleParams) -> FunctionalReport:
    return FunctionalReport(
        name=f"sobolev_quotient_n{p.n}",
        measured=sobolev_quotient(p),
        reference=conformal_eigenvalue_bound(p.n),
        identity="(int |psi|^(2n/(n-1)))^(1/n) = (n/2) Vol(S^n)^(1/n)",
    )


def liouville_curvature_report(lam: float = 1.0) -> FunctionalReport:
    return FunctionalReport(
        name="liouville_total_curvature",
        measured=liouville_total_curvature(lam),
        reference=4.0 * math.pi,
        identity="int e^(2v) = 4 pi = Vol(S^2)",
    )
