"""
Complex Clifford-algebra representations

Gamma matrices for R^n with the negative-definite relation
    gamma_j gamma_k + gamma_k gamma_j = -2 delta_jk I
built by iterated Kronecker products of the Pauli matrices.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError

logger = logging.getLogger(__name__)

MAX_DIMENSION = 8

_SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
_SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class CliffordRep:
    """Irreducible complex representation of Cl(R^n)

    Attributes:
        n: dimension of the underlying Euclidean space
        N: spinor rank, 2^(n // 2)
        gamma: array of shape (n, N, N); gamma[j] is skew-Hermitian and squares to -I
    """
    n: int
    N: int
    gamma: np.ndarray

    def __post_init__(self):
        if self.gamma.shape != (self.n, self.N, self.N):
            raise DimensionError(
                f"gamma has shape {self.gamma.shape}, expected {(self.n, self.N, self.N)}"
            )
        self.gamma.setflags(write=False)

    def matrix(self, v) -> np.ndarray:
        """gamma(v) = sum_j v^j gamma_j; v may carry leading batch axes"""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.n:
            raise DimensionError(f"vector has {v.shape[-1]} components, rep has n={self.n}")
        return np.einsum('...j,jab->...ab', v, self.gamma)


def _hermitian_generators(n: int) -> list:
    """Hermitian generators with e_j e_k + e_k e_j = 2 delta_jk I"""
    if n == 1:
        return [np.ones((1, 1), dtype=np.complex128)]

    gens = [_SIGMA_1, _SIGMA_2]
    dim = 2
    while dim + 1 < n:
        size = gens[0].shape[0]
        eye = np.eye(size, dtype=np.complex128)
        gens = [np.kron(_SIGMA_1, g) for g in gens] + [np.kron(_SIGMA_2, eye), np.kron(_SIGMA_3, eye)]
        dim += 2

    if dim == n:
        return gens

    # odd n: the chirality element of the first n-1 generators anticommutes with all of them
    half = (n - 1) // 2
    chirality = (1j ** half) * gens[0]
    for g in gens[1:]:
        chirality = chirality @ g
    return gens + [chirality]


@lru_cache(maxsize=None)
def _cached_rep(n: int) -> CliffordRep:
    gamma = 1j * np.stack(_hermitian_generators(n))
    rep = CliffordRep(n=n, N=gamma.shape[1], gamma=gamma)
    logger.debug(f"Built Clifford representation n={n}, N={rep.N}")
    return rep


def build_rep(n: int) -> CliffordRep:
    """Build the representation of Cl(R^n) for 1 <= n <= 8

    The construction is deterministic; repeated calls return the same
    (read-only) object.
    """
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_DIMENSION:
        raise DimensionError(f"Clifford dimension must be an integer in 1..{MAX_DIMENSION}, got {n!r}")
    return _cached_rep(int(n))


def clifford_mul(rep: CliffordRep, v, s) -> np.ndarray:
    """Clifford multiplication gamma(v) s, broadcasting over leading axes"""
    v = np.asarray(v, dtype=float)
    s = np.asarray(s, dtype=np.complex128)
    if v.shape[-1] != rep.n:
        raise DimensionError(f"vector has {v.shape[-1]} components, rep has n={rep.n}")
    if s.shape[-1] != rep.N:
        raise DimensionError(f"spinor has {s.shape[-1]} components, rep has N={rep.N}")
    return np.einsum('...j,jab,...b->...a', v, rep.gamma, s)


def relation_defect(rep: CliffordRep) -> float:
    """Max operator-norm defect of gamma_j gamma_k + gamma_k gamma_j + 2 delta_jk I"""
    eye = np.eye(rep.N)
    worst = 0.0
    for j in range(rep.n):
        for k in range(j, rep.n):
            anti = rep.gamma[j] @ rep.gamma[k] + rep.gamma[k] @ rep.gamma[j]
            if j == k:
                anti = anti + 2.0 * eye
            worst = max(worst, float(np.linalg.norm(anti, ord=2)))
    return worst


def skew_hermitian_defect(rep: CliffordRep) -> float:
    """Max entrywise defect of gamma_j^* = -gamma_j"""
    conj_t = np.conj(np.swapaxes(rep.gamma, -1, -2))
    return float(np.max(np.abs(conj_t + rep.gamma)))


def compatibility_defect(rep: CliffordRep, samples: int = 1000, seed: int = 0) -> float:
    """Max relative defect of |gamma(v) s| = |v| |s| over random (v, s)"""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((samples, rep.n))
    s = rng.standard_normal((samples, rep.N)) + 1j * rng.standard_normal((samples, rep.N))
    lhs = np.linalg.norm(clifford_mul(rep, v, s), axis=-1)
    rhs = np.linalg.norm(v, axis=-1) * np.linalg.norm(s, axis=-1)
    return float(np.max(np.abs(lhs - rhs) / rhs))
