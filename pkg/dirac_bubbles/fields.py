"""
Closed-form spinor fields

The ground-state bubbles of D psi = |psi|^(2/(n-1)) psi on R^n,
    psi(x) = lam^(-(n-1)/2) (2 / (1 + |y|^2))^(n/2) (1 - gamma(y)) Phi0,  y = (x - x0) / lam,
their Moebius action, their traces on S^n, and ambient fields on R^(n+1)
whose restrictions to the sphere are Killing spinors.
"""

import logging
import math
from dataclasses import InitVar, dataclass
from typing import Callable, Optional

import numpy as np

from .clifford import CliffordRep, build_rep, clifford_mul
from .errors import DimensionError, DomainError
from .geometry import sphere_quadrature, stereo_to_plane

logger = logging.getLogger(__name__)

CONVENTIONS = ("scaling", "corollary")
NORMALIZATION_RTOL = 1e-12


def amplitude_norm(n: int) -> float:
    """|Phi0| = (1/sqrt 2) (n/2)^((n-1)/2) for ground states"""
    return (n / 2.0) ** ((n - 1) / 2.0) / math.sqrt(2.0)


def critical_exponent(n: int) -> float:
    """2# = 2n / (n - 1)"""
    return 2.0 * n / (n - 1)


def family_dimension(n: int) -> int:
    """Free real parameters of the bubble family: amplitude (2N - 1), center (n), scale (1)"""
    return 2 ** (n // 2 + 1) + n


@dataclass(frozen=True, eq=False)
class BubbleParams:
    """Scale, center and amplitude of a ground-state bubble

    Set strict=False to build deliberately mis-normalized amplitudes
    (fault injection); lam > 0 is always enforced.
    """
    n: int
    lam: float
    center: np.ndarray
    amplitude: np.ndarray
    strict: InitVar[bool] = True

    def __post_init__(self, strict: bool):
        if self.n < 2:
            raise DimensionError(f"bubbles need n >= 2, got {self.n}")
        if not self.lam > 0:
            raise DomainError(f"scale must be positive, got {self.lam}")
        center = np.asarray(self.center, dtype=float).copy()
        amplitude = np.asarray(self.amplitude, dtype=np.complex128).copy()
        if center.shape != (self.n,):
            raise DimensionError(f"center has shape {center.shape}, expected ({self.n},)")
        rank = 2 ** (self.n // 2)
        if amplitude.shape != (rank,):
            raise DimensionError(f"amplitude has shape {amplitude.shape}, expected ({rank},)")
        center.setflags(write=False)
        amplitude.setflags(write=False)
        object.__setattr__(self, 'center', center)
        object.__setattr__(self, 'amplitude', amplitude)
        if strict and abs(self.amplitude_ratio - 1.0) > NORMALIZATION_RTOL:
            raise DomainError(
                f"|Phi0| = {np.linalg.norm(amplitude):.15g} differs from the ground-state norm {amplitude_norm(self.n):.15g}"
            )

    @property
    def N(self) -> int:
        return self.amplitude.shape[0]

    @property
    def amplitude_ratio(self) -> float:
        """|Phi0| relative to the ground-state normalization"""
        return float(np.linalg.norm(self.amplitude)) / amplitude_norm(self.n)


def standard_bubble(n: int, lam: float = 1.0, center=None, amplitude=None,
                    amplitude_scale: float = 1.0) -> BubbleParams:
    """Bubble with the given scale and center

    The default amplitude is the first basis spinor at the ground-state norm.
    An explicit amplitude is rescaled to that norm. amplitude_scale != 1
    multiplies the result and turns off normalization checks.
    """
    rank = 2 ** (n // 2)
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    if amplitude is None:
        direction = np.zeros(rank, dtype=np.complex128)
        direction[0] = 1.0
    else:
        direction = np.asarray(amplitude, dtype=np.complex128)
        direction = direction / np.linalg.norm(direction)
    phi0 = amplitude_scale * amplitude_norm(n) * direction
    return BubbleParams(n=n, lam=float(lam), center=center, amplitude=phi0, strict=amplitude_scale == 1.0)


def bubble_eval(p: BubbleParams, x, rep: Optional[CliffordRep] = None, convention: str = "scaling") -> np.ndarray:
    """Bubble value at x (shape (..., n)), returning shape (..., N)

    convention="scaling" is the exact solution family. "corollary" is the
    displayed closed form (2 lam / (lam^2 + |x - x0|^2))^(n/2) (1 - gamma(y)) Phi0,
    which differs from it by the factor lam^(-1/2).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown bubble convention {convention!r}; expected one of {CONVENTIONS}")
    rep = rep or build_rep(p.n)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != p.n:
        raise DimensionError(f"point has {x.shape[-1]} components, bubble has n={p.n}")
    y = (x - p.center) / p.lam
    profile = (2.0 / (1.0 + np.sum(y * y, axis=-1))) ** (p.n / 2.0)
    spinor = p.amplitude - clifford_mul(rep, y, np.broadcast_to(p.amplitude, y.shape[:-1] + (p.N,)))
    weight = p.lam ** (-(p.n - 1) / 2.0) if convention == "scaling" else p.lam ** (-p.n / 2.0)
    return weight * profile[..., None] * spinor


def bubble_length(p: BubbleParams, r) -> np.ndarray:
    """|psi| at distance r from the center: (n lam / (lam^2 + r^2))^((n-1)/2)"""
    r = np.asarray(r, dtype=float)
    return p.amplitude_ratio * (p.n * p.lam / (p.lam ** 2 + r * r)) ** ((p.n - 1) / 2.0)


def nonlinearity(values, n: int) -> np.ndarray:
    """|psi|^(2/(n-1)) psi, taken as 0 where psi vanishes"""
    values = np.asarray(values)
    mag = np.linalg.norm(values, axis=-1)
    with np.errstate(divide='ignore'):
        weight = np.where(mag > 0, np.exp((2.0 / (n - 1)) * np.log(np.where(mag > 0, mag, 1.0))), 0.0)
    return weight[..., None] * values


@dataclass(frozen=True, eq=False)
class MobiusMap:
    """x -> scale * x + shift, the translation-dilation part of the conformal group"""
    shift: np.ndarray
    scale: float

    def __post_init__(self):
        if not self.scale > 0:
            raise DomainError(f"dilation factor must be positive, got {self.scale}")
        object.__setattr__(self, 'shift', np.asarray(self.shift, dtype=float))

    def apply(self, x) -> np.ndarray:
        return self.scale * np.asarray(x, dtype=float) + self.shift

    def then(self, other: 'MobiusMap') -> 'MobiusMap':
        """Composite map: apply self first, then other"""
        return MobiusMap(shift=other.scale * self.shift + other.shift, scale=self.scale * other.scale)


def mobius_transform(p: BubbleParams, shift, scale: float) -> BubbleParams:
    """Parameters of the bubble moved by x -> scale * x + shift

    The new field is scale^(-(n-1)/2) psi((x - shift) / scale), which is again
    a bubble, with center scale * x0 + shift and scale lam * scale.
    """
    move = MobiusMap(shift=shift, scale=scale)
    return BubbleParams(n=p.n, lam=p.lam * move.scale, center=move.apply(p.center),
                        amplitude=p.amplitude, strict=False)


def mobius_pullback(p: BubbleParams, shift, scale: float, x, rep: Optional[CliffordRep] = None) -> np.ndarray:
    """Conformal-weight pullback scale^(-(n-1)/2) psi((x - shift) / scale)"""
    x = np.asarray(x, dtype=float)
    return scale ** (-(p.n - 1) / 2.0) * bubble_eval(p, (x - np.asarray(shift, dtype=float)) / scale, rep)


@dataclass(frozen=True)
class SpinorField:
    """Closed-form C^N-valued field on R^n

    Attributes:
        evaluate: maps points (..., n) to values (..., N)
        dirac: exact D psi evaluator when known (None means D-harmonic)
        decay_exponent: declared p with |psi| ~ |x|^-p along rays
    """
    n: int
    N: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    dirac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    decay_exponent: Optional[float] = None
    name: str = "field"

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(np.asarray(x, dtype=float))


def bubble_field(p: BubbleParams, convention: str = "scaling") -> SpinorField:
    """Bubble as a SpinorField whose Dirac image is the nonlinearity"""
    rep = build_rep(p.n)

    def evaluate(x):
        return bubble_eval(p, x, rep, convention)

    def dirac(x):
        return nonlinearity(evaluate(x), p.n)

    return SpinorField(n=p.n, N=p.N, evaluate=evaluate, dirac=dirac,
                       decay_exponent=float(p.n - 1), name=f"bubble(n={p.n}, lam={p.lam})")


def constant_field(c, n: int) -> SpinorField:
    c = np.asarray(c, dtype=np.complex128)

    def evaluate(x):
        return np.broadcast_to(c, np.shape(x)[:-1] + c.shape).copy()

    def dirac(x):
        return np.zeros(np.shape(x)[:-1] + c.shape, dtype=np.complex128)

    return SpinorField(n=n, N=c.shape[0], evaluate=evaluate, dirac=dirac, decay_exponent=0.0, name="constant")


def measured_decay_exponent(f: SpinorField, direction, r_near: float = 1e2, r_far: float = 1e3) -> float:
    """Log-log slope of |f| between two radii along a ray"""
    unit = np.asarray(direction, dtype=float)
    unit = unit / np.linalg.norm(unit)
    near = np.linalg.norm(f(r_near * unit))
    far = np.linalg.norm(f(r_far * unit))
    return float(-math.log(far / near) / math.log(r_far / r_near))


def sphere_trace_length(p: BubbleParams, y) -> np.ndarray:
    """|phi| on S^n for phi = (1 / (1 - y^(n+1)))^((n-1)/2) p^* psi

    Constant (n/2)^((n-1)/2) exactly when (lam, x0) = (1, 0).
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != p.n + 1:
        raise DimensionError(f"sphere point has {y.shape[-1]} components, expected {p.n + 1}")
    x = stereo_to_plane(y)
    weight = (1.0 / (1.0 - y[..., -1])) ** ((p.n - 1) / 2.0)
    return weight * bubble_length(p, np.linalg.norm(x - p.center, axis=-1))


def conformal_volume(p: BubbleParams, order: int = 40) -> float:
    """(2/n)^n times the integral over S^n of |phi|^(2#); equals Vol(S^n) for bubbles"""
    quad = sphere_quadrature(p.n, order)
    density = sphere_trace_length(p, quad.nodes) ** critical_exponent(p.n)
    return float((2.0 / p.n) ** p.n * quad.integrate(density))


@dataclass(frozen=True)
class AmbientField:
    """Field on R^(n+1) with exact first derivatives

    Attributes:
        value: points (..., m) -> spinors (..., N)
        jacobian: points (..., m) -> partials (..., m, N), row j = d_j Psi
    """
    dim: int
    N: int
    value: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    name: str = "ambient"


def ambient_twistor_eval(phi, x, rep: CliffordRep) -> np.ndarray:
    """Psi(x) = gamma(x) Phi on R^(n+1)"""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != rep.n:
        raise DimensionError(f"ambient point has {x.shape[-1]} components, rep has n={rep.n}")
    phi = np.asarray(phi, dtype=np.complex128)
    return clifford_mul(rep, x, np.broadcast_to(phi, x.shape[:-1] + phi.shape))


def twistor_field(phi, rep: CliffordRep) -> AmbientField:
    phi = np.asarray(phi, dtype=np.complex128)
    columns = np.einsum('jab,b->ja', rep.gamma, phi)

    def jacobian(x):
        return np.broadcast_to(columns, np.shape(x)[:-1] + columns.shape).copy()

    return AmbientField(dim=rep.n, N=rep.N, value=lambda x: ambient_twistor_eval(phi, x, rep),
                        jacobian=jacobian, name="twistor")


def constant_spinor_field(phi, dim: int) -> AmbientField:
    phi = np.asarray(phi, dtype=np.complex128)
    return AmbientField(
        dim=dim, N=phi.shape[0],
        value=lambda x: np.broadcast_to(phi, np.shape(x)[:-1] + phi.shape).copy(),
        jacobian=lambda x: np.zeros(np.shape(x)[:-1] + (dim,) + phi.shape, dtype=np.complex128),
        name="constant",
    )


def radial_quadratic_field(phi, dim: int) -> AmbientField:
    """|x|^2 Phi; its Penrose part does not vanish"""
    phi = np.asarray(phi, dtype=np.complex128)
    return AmbientField(
        dim=dim, N=phi.shape[0],
        value=lambda x: np.sum(np.asarray(x) ** 2, axis=-1)[..., None] * phi,
        jacobian=lambda x: 2.0 * np.asarray(x, dtype=float)[..., :, None] * phi,
        name="radial-quadratic",
    )


def ambient_dirac(f: AmbientField, rep: CliffordRep, x) -> np.ndarray:
    """D Psi = sum_j gamma_j d_j Psi from exact derivatives"""
    return np.einsum('jab,...jb->...a', rep.gamma, f.jacobian(np.asarray(x, dtype=float)))


def penrose_components(f: AmbientField, rep: CliffordRep, x) -> np.ndarray:
    """P_j Psi = d_j Psi + (1/m) gamma_j D Psi, shape (..., m, N)"""
    x = np.asarray(x, dtype=float)
    jac = f.jacobian(x)
    dirac = np.einsum('jab,...jb->...a', rep.gamma, jac)
    return jac + np.einsum('jab,...b->...ja', rep.gamma, dirac) / rep.n


def killing_defect(f, rep: CliffordRep, samples) -> float:
    """Max |P Psi| over sample points; 0 for twistor spinors

    `f` is an AmbientField, or a constant spinor Phi standing for the twistor
    field gamma(x) Phi. `samples` is an array of points or a sample count
    (drawn with seed 0).
    """
    if not isinstance(f, AmbientField):
        f = twistor_field(f, rep)
    if f.dim != rep.n:
        raise DimensionError(f"field lives on R^{f.dim}, rep is for R^{rep.n}")
    if np.isscalar(samples):
        samples = np.random.default_rng(0).standard_normal((int(samples), rep.n))
    penrose = penrose_components(f, rep, samples)
    return float(np.max(np.sqrt(np.sum(np.abs(penrose) ** 2, axis=(-2, -1)))))


def nodal_margin(p: BubbleParams, points, rep: Optional[CliffordRep] = None) -> float:
    """min |psi| over the points divided by the closed-form length at the farthest point

    At least 1 (up to rounding) for bubbles, so the sampled field never vanishes.
    """
    points = np.asarray(points, dtype=float).reshape(-1, p.n)
    measured = np.linalg.norm(bubble_eval(p, points, rep), axis=-1)
    floor = bubble_length(p, np.max(np.linalg.norm(points - p.center, axis=-1)))
    if not floor > 0:
        raise DomainError("closed-form length floor is not positive")
    return float(np.min(measured) / floor)
