"""Boundary geometry around a rank-deficient reference state.

A ``SupportSplit`` fixes the orthogonal decomposition ``H = PH + QH`` together
with an orthonormal basis adapted to it; block decompositions, the
activation functional and the coercivity bound are all expressed in that
basis.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .entropy import PinchingSpec, default_supp_tol
from .errors import ValidationError
from .linalg import as_density, as_hermitian, eig_hermitian

SVD_DROP = 1e-12
PROJ_TOL = 1e-11


@dataclass(frozen=True)
class SupportSplit:
    """Projectors ``P`` (support) and ``Q = I - P`` with adapted bases.

    ``basis_P`` (d x r) and ``basis_Q`` (d x d_Q) have orthonormal columns;
    ``P = basis_P basis_P^dagger`` and likewise for ``Q``.
    """

    basis_P: np.ndarray
    basis_Q: np.ndarray
    P: np.ndarray = field(init=False, repr=False)
    Q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        UP = np.asarray(self.basis_P, dtype=complex)
        UQ = np.asarray(self.basis_Q, dtype=complex)
        d = UP.shape[0]
        if UQ.shape[0] != d or UP.shape[1] + UQ.shape[1] != d:
            raise ValidationError("bases do not span the space")
        U = np.hstack([UP, UQ])
        if np.max(np.abs(U.conj().T @ U - np.eye(d))) > PROJ_TOL:
            raise ValidationError("split basis is not orthonormal")
        object.__setattr__(self, "basis_P", UP)
        object.__setattr__(self, "basis_Q", UQ)
        object.__setattr__(self, "P", UP @ UP.conj().T)
        object.__setattr__(self, "Q", UQ @ UQ.conj().T)

    @property
    def dim(self):
        return self.basis_P.shape[0]

    @property
    def r(self):
        return self.basis_P.shape[1]

    @property
    def d_Q(self):
        return self.basis_Q.shape[1]

    @property
    def basis(self):
        """Unitary whose first ``r`` columns span PH."""
        return np.hstack([self.basis_P, self.basis_Q])

    def pinching(self):
        return PinchingSpec((self.P, self.Q))

    def is_block_diagonal(self, X, tol=1e-11):
        X = np.asarray(X)
        return bool(np.max(np.abs(self.P @ X @ self.Q), initial=0.0) <= tol)


def split_from_levels(levels, dim=None, eigenbasis=None):
    """Split whose support is spanned by the chosen columns of ``eigenbasis``."""
    if eigenbasis is None:
        eigenbasis = np.eye(dim, dtype=complex)
    eigenbasis = np.asarray(eigenbasis, dtype=complex)
    d = eigenbasis.shape[0]
    levels = list(levels)
    if len(set(levels)) != len(levels) or any(not 0 <= i < d for i in levels):
        raise ValidationError(f"invalid support levels {levels} for dimension {d}")
    rest = [i for i in range(d) if i not in levels]
    return SupportSplit(eigenbasis[:, levels], eigenbasis[:, rest])


def split_from_sigma(sigma, supp_tol=None):
    """Support split of ``sigma``: P spans eigenvectors with eigenvalue above ``supp_tol``.

    The P basis is ordered by descending eigenvalue of ``sigma``.
    """
    sigma = as_hermitian(sigma)
    tol = default_supp_tol(sigma.shape[0]) if supp_tol is None else supp_tol
    w, U = eig_hermitian(sigma)
    on = w > tol
    UP = U[:, on][:, ::-1]
    UQ = U[:, ~on]
    return SupportSplit(UP, UQ)


@dataclass(frozen=True)
class RegularizedState:
    sigma_eps: np.ndarray
    epsilon: float
    lambda_star: float


def regularize(sigma, epsilon, supp_tol=None):
    """``(1 - eps) sigma + (eps/d) I`` for a rank-deficient ``sigma``.

    ``lambda_star = eps/d`` is the smallest eigenvalue of the compression of
    the result to the kernel of ``sigma``.
    """
    sigma = as_density(sigma)
    if not 0 < epsilon < 1:
        raise ValidationError(f"epsilon must lie in (0, 1), got {epsilon}")
    d = sigma.shape[0]
    tol = default_supp_tol(d) if supp_tol is None else supp_tol
    w = eig_hermitian(sigma).eigenvalues
    if not np.any(w <= tol):
        raise ValidationError("sigma is full rank; the boundary regime needs rank(sigma) < d")
    sigma_eps = (1.0 - epsilon) * sigma + (epsilon / d) * np.eye(d)
    return RegularizedState(sigma_eps, float(epsilon), epsilon / d)


@dataclass(frozen=True)
class BlockDecomposition:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def reassemble(self, split):
        """Back to the original basis."""
        top = np.hstack([self.A, self.B])
        bottom = np.hstack([self.B.conj().T, self.C])
        U = split.basis
        return U @ np.vstack([top, bottom]) @ U.conj().T


def block_decompose(rho, split):
    """Compression blocks ``A = P rho P``, ``B = P rho Q``, ``C = Q rho Q``.

    Blocks are expressed in the split's adapted bases, so ``A`` is ``r x r``,
    ``B`` is ``r x d_Q`` and ``C`` is ``d_Q x d_Q``.
    """
    rho = np.asarray(rho, dtype=complex)
    UP, UQ = split.basis_P, split.basis_Q
    A = UP.conj().T @ rho @ UP
    B = UP.conj().T @ rho @ UQ
    C = UQ.conj().T @ rho @ UQ
    return BlockDecomposition(0.5 * (A + A.conj().T), B, 0.5 * (C + C.conj().T))


@dataclass(frozen=True)
class ActivationReport:
    c: float
    eps_Q: float
    A_func: float
    R2: float


def activation(rho, split):
    """Coherence ``c = ||B||_2^2``, kernel weight ``eps_Q = Tr C`` and ``A = sqrt(c + eps_Q)``.

    ``R2 = c / (c + eps_Q)`` (zero when both vanish).
    """
    blocks = block_decompose(rho, split)
    c = float(np.sum(np.abs(blocks.B) ** 2))
    eps_Q = float(max(np.trace(blocks.C).real, 0.0))
    total = c + eps_Q
    R2 = c / total if total > 0 else 0.0
    return ActivationReport(c, eps_Q, math.sqrt(total), R2)


@dataclass(frozen=True)
class LocalConstants:
    a0: float
    delta0: float


def local_constants(reg, split, delta0=None):
    """``a0 = lambda_min(P sigma_eps P) / 2`` on PH; ``delta0`` defaults to ``a0``.

    Any ``delta0 <= a0`` keeps the proximity implication
    ``||rho - sigma_eps||_1 <= delta0  =>  P rho P >= a0 P`` valid.
    """
    if split.r < 1:
        raise ValidationError("support must be nontrivial")
    A = block_decompose(reg.sigma_eps, split).A
    a0 = 0.5 * float(eig_hermitian(A).eigenvalues[0])
    if delta0 is None:
        delta0 = a0
    if not 0 < delta0 <= a0 * (1 + 1e-12):
        raise ValidationError(f"delta0 must lie in (0, a0={a0}], got {delta0}")
    return LocalConstants(a0, float(delta0))


@dataclass(frozen=True)
class SvdBlock:
    """One 2x2 block ``[[a, s], [s, c]]`` on span{u, v} from the SVD of ``B``."""

    a: float
    c: float
    s: float
    u: np.ndarray
    v: np.ndarray

    @property
    def M(self):
        return np.array([[self.a, self.s], [self.s, self.c]], dtype=complex)

    @property
    def D(self):
        return np.diag([self.a, self.c]).astype(complex)


@dataclass(frozen=True)
class CoercivityReport:
    bound: float
    regime_ok: bool
    svd_blocks: list
    svd_ok: bool
    lambda_min_A: float
    c: float
    eps_Q: float


def svd_blocks(rho, split, drop=SVD_DROP):
    """2x2 compressions of ``rho`` along the singular pairs of ``P rho Q``.

    Singular values below ``drop`` are discarded.
    """
    blk = block_decompose(rho, split)
    out = []
    if blk.B.size == 0:
        return out
    W, s, Vh = np.linalg.svd(blk.B)
    for j, sj in enumerate(s):
        if sj < drop:
            continue
        w = W[:, j]
        v = Vh[j].conj()
        a = float(np.real(w.conj() @ blk.A @ w))
        c = float(np.real(v.conj() @ blk.C @ v))
        out.append(SvdBlock(a, c, float(sj), split.basis_P @ w, split.basis_Q @ v))
    return out


def bkm_coercivity(rho, split, a0):
    """Coherence lower bound ``c log(a0 / eps_Q)`` together with its regime check.

    ``regime_ok`` requires ``lambda_min(P rho P) >= a0`` on PH,
    ``eps_Q <= a0/2``, and excludes the numerically impossible combination
    ``eps_Q == 0 < c``.  The bound is zero when ``c == 0``; otherwise it is
    reported whatever the regime, and only asserted by callers when
    ``regime_ok`` holds.
    """
    rep = activation(rho, split)
    blocks = svd_blocks(rho, split)
    svd_ok = all(b.s ** 2 <= b.a * b.c + 1e-12 for b in blocks)
    A = block_decompose(rho, split).A
    lam_A = float(eig_hermitian(A).eigenvalues[0]) if split.r else math.inf
    regime_ok = lam_A >= a0 and rep.eps_Q <= a0 / 2
    if rep.c > 0 and rep.eps_Q == 0:
        regime_ok = False
    if rep.c == 0 or rep.eps_Q == 0:
        bound = 0.0
    else:
        bound = rep.c * math.log(a0 / rep.eps_Q)
    return CoercivityReport(bound, bool(regime_ok), blocks, bool(svd_ok), lam_A, rep.c, rep.eps_Q)
