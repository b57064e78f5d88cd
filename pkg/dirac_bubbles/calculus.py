"""
Finite-difference operators on grid-sampled spinor fields

Collocation only: fields are sampled from closed forms, central differences
are taken at interior nodes, and PDE claims become convergence tests.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from .clifford import CliffordRep, build_rep
from .errors import GridError
from .fields import BubbleParams, bubble_eval, nonlinearity
from .geometry import Grid

logger = logging.getLogger(__name__)

MAX_NODE_COMPONENTS = 10_000_000
DEFAULT_POINTS = {2: 161, 3: 161, 4: 33, 5: 17}


@dataclass(frozen=True, eq=False)
class GridField:
    """Spinor samples on every node of a grid, shape grid.shape + (N,)"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[:self.grid.n] != self.grid.shape or self.values.ndim != self.grid.n + 1:
            raise GridError(f"values of shape {self.values.shape} do not match grid {self.grid.shape} + (N,)")
        if not np.all(np.isfinite(self.values)):
            raise GridError("grid field has non-finite values")

    @classmethod
    def sample(cls, grid: Grid, evaluate: Callable[[np.ndarray], np.ndarray]) -> 'GridField':
        return cls(grid=grid, values=np.asarray(evaluate(grid.points()), dtype=np.complex128))


@dataclass(frozen=True)
class DerivativeStencil:
    """Central-difference weights: offsets with first/second derivative coefficients"""
    order: int
    offsets: Tuple[int, ...]
    first: Tuple[float, ...]
    second: Tuple[float, ...]

    @property
    def radius(self) -> int:
        return max(self.offsets)


@lru_cache(maxsize=None)
def stencil(order: int = 2) -> DerivativeStencil:
    if order == 2:
        return DerivativeStencil(order=2, offsets=(-1, 0, 1), first=(-0.5, 0.0, 0.5), second=(1.0, -2.0, 1.0))
    if order == 4:
        return DerivativeStencil(
            order=4, offsets=(-2, -1, 0, 1, 2),
            first=(1 / 12, -8 / 12, 0.0, 8 / 12, -1 / 12),
            second=(-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12),
        )
    raise GridError(f"stencil order must be 2 or 4, got {order}")


class ResidualNorms(NamedTuple):
    sup_rel: float
    l2_rel: float
    sup_abs: float


@dataclass(frozen=True)
class ConvergenceStudy:
    coarse: float
    fine: float

    @property
    def ratio(self) -> float:
        return convergence_ratio(self.coarse, self.fine)

    @property
    def observed_order(self) -> float:
        return float(np.log2(self.ratio))


def _shifted(n: int, axis: int, shift: int, radius: int, m: int) -> tuple:
    return tuple(
        slice(radius + shift, m - radius + shift) if a == axis else slice(radius, m - radius)
        for a in range(n)
    )


def _difference(values: np.ndarray, grid: Grid, st: DerivativeStencil, axis: int, coeffs) -> np.ndarray:
    if grid.m < 2 * st.radius + 5:
        raise GridError(f"grid with m={grid.m} too small for order-{st.order} stencil")
    out = None
    for offset, c in zip(st.offsets, coeffs):
        if c == 0.0:
            continue
        term = c * values[_shifted(grid.n, axis, offset, st.radius, grid.m)]
        out = term if out is None else out + term
    return out


def fd_partials(f: GridField, st: Optional[DerivativeStencil] = None) -> np.ndarray:
    """Central-difference partials at interior nodes, shape (n,) + interior + (N,)"""
    st = st or stencil(2)
    h = f.grid.h
    return np.stack([_difference(f.values, f.grid, st, j, st.first) / h for j in range(f.grid.n)])


def laplacian_apply(values, grid: Grid, st: Optional[DerivativeStencil] = None) -> np.ndarray:
    """Second-difference Laplacian at interior nodes; trailing axes are carried along"""
    st = st or stencil(2)
    values = np.asarray(values)
    return sum(_difference(values, grid, st, j, st.second) for j in range(grid.n)) / grid.h ** 2


def _dirac_from_partials(partials: np.ndarray, rep: CliffordRep) -> np.ndarray:
    return np.einsum('jab,j...b->...a', rep.gamma, partials)


def dirac_apply(f: GridField, rep: Optional[CliffordRep] = None, st: Optional[DerivativeStencil] = None) -> GridField:
    """D psi = sum_j gamma_j d_j psi on the interior grid"""
    st = st or stencil(2)
    rep = rep or build_rep(f.grid.n)
    out = None
    for j in range(f.grid.n):
        term = np.einsum('ab,...b->...a', rep.gamma[j], _difference(f.values, f.grid, st, j, st.first))
        out = term if out is None else out + term
    return GridField(grid=f.grid.interior(st.radius), values=out / f.grid.h)


def penrose_apply(f: GridField, rep: Optional[CliffordRep] = None, st: Optional[DerivativeStencil] = None) -> np.ndarray:
    """P_j psi = d_j psi + (1/n) gamma_j D psi, shape interior + (n, N)"""
    st = st or stencil(2)
    rep = rep or build_rep(f.grid.n)
    partials = fd_partials(f, st)
    dirac = _dirac_from_partials(partials, rep)
    correction = np.einsum('jab,...b->...ja', rep.gamma, dirac) / rep.n
    return np.moveaxis(partials, 0, -2) + correction


def decomposition_defect(f: GridField, rep: Optional[CliffordRep] = None,
                         st: Optional[DerivativeStencil] = None) -> float:
    """Max relative defect of |d psi|^2 = |P psi|^2 + (1/n)|D psi|^2 over interior nodes"""
    st = st or stencil(2)
    rep = rep or build_rep(f.grid.n)
    partials = fd_partials(f, st)
    dirac = _dirac_from_partials(partials, rep)
    penrose = penrose_apply(f, rep, st)
    full = np.sum(np.abs(partials) ** 2, axis=(0, -1))
    split = np.sum(np.abs(penrose) ** 2, axis=(-2, -1)) + np.sum(np.abs(dirac) ** 2, axis=-1) / rep.n
    floor = np.finfo(float).tiny + np.finfo(float).eps * float(np.max(full))
    return float(np.max(np.abs(full - split) / np.maximum(full, floor)))


def dirac_squared_defect(f: GridField, rep: Optional[CliffordRep] = None,
                         st: Optional[DerivativeStencil] = None) -> float:
    """Max |D(D psi) + Delta psi| on the nodes both stencil compositions reach"""
    st = st or stencil(2)
    rep = rep or build_rep(f.grid.n)
    twice = dirac_apply(dirac_apply(f, rep, st), rep, st).values
    lap = laplacian_apply(f.values, f.grid, st)
    r = st.radius
    lap = lap[tuple(slice(r, -r) for _ in range(f.grid.n))]
    return float(np.max(np.abs(twice + lap)))


def default_grid(p: BubbleParams, m: Optional[int] = None, half_width_scale: float = 4.0) -> Grid:
    """Box of half-width 4 lam around the center, sized to at most 1e7 node-components"""
    m = m or DEFAULT_POINTS.get(p.n, 9)
    while m > 5 and m ** p.n * p.N > MAX_NODE_COMPONENTS:
        m -= 2
    return Grid(n=p.n, L=half_width_scale * p.lam, m=m, center=tuple(p.center))


def residual_norms(lhs: np.ndarray, rhs: np.ndarray) -> ResidualNorms:
    """Sup and L2 norms of lhs - rhs relative to the larger side"""
    diff = np.abs(lhs - rhs)
    sup_abs = float(np.max(diff))
    bigger = np.maximum(np.abs(lhs), np.abs(rhs))
    scale_sup = float(np.max(bigger))
    scale_l2 = float(np.sqrt(np.sum(bigger ** 2)))
    l2 = float(np.sqrt(np.sum(diff ** 2)))
    return ResidualNorms(
        sup_rel=sup_abs / scale_sup if scale_sup > 0 else float('inf'),
        l2_rel=l2 / scale_l2 if scale_l2 > 0 else float('inf'),
        sup_abs=sup_abs,
    )


def nonlinear_residual(p: BubbleParams, grid: Optional[Grid] = None, st: Optional[DerivativeStencil] = None,
                       convention: str = "scaling") -> ResidualNorms:
    """Residual of D psi = |psi|^(2/(n-1)) psi on interior nodes, relative to max |D psi|"""
    st = st or stencil(2)
    grid = grid or default_grid(p)
    rep = build_rep(p.n)
    f = GridField.sample(grid, lambda x: bubble_eval(p, x, rep, convention))
    dirac = dirac_apply(f, rep, st)
    r = st.radius
    inner = f.values[tuple(slice(r, -r) for _ in range(grid.n))]
    norms = _spinor_residual(dirac.values, nonlinearity(inner, p.n))
    logger.debug(f"nonlinear residual n={p.n} lam={p.lam} h={grid.h:.4g} order={st.order}: {norms}")
    return norms


def _spinor_residual(lhs: np.ndarray, rhs: np.ndarray) -> ResidualNorms:
    diff = np.linalg.norm(lhs - rhs, axis=-1)
    size = np.linalg.norm(lhs, axis=-1)
    sup_abs = float(np.max(diff))
    return ResidualNorms(
        sup_rel=sup_abs / float(np.max(size)),
        l2_rel=float(np.sqrt(np.sum(diff ** 2) / np.sum(size ** 2))),
        sup_abs=sup_abs,
    )


def refine(grid: Grid) -> Grid:
    """Same box with the spacing halved"""
    return Grid(n=grid.n, L=grid.L, m=2 * grid.m - 1, center=grid.center)


def halving_study(residual: Callable[[Grid], float], grid: Grid) -> ConvergenceStudy:
    """Residual on a grid and on its h/2 refinement"""
    return ConvergenceStudy(coarse=float(residual(grid)), fine=float(residual(refine(grid))))


def convergence_ratio(coarse: float, fine: float) -> float:
    """Error ratio on h-halving; about 2^order in the asymptotic regime"""
    return coarse / fine if fine > 0 else float('inf')
