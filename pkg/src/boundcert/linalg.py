"""Dense Hermitian matrix substrate.

Matrices are plain ``numpy.ndarray`` objects of complex dtype.  The helpers
``as_hermitian`` and ``as_density`` validate and symmetrize inputs; every
spectral routine goes through ``eig_hermitian`` so that the same tolerance
policy applies everywhere.
"""

from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, ValidationError

HERMITIAN_RTOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10


class SpectralDecomposition(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        U = self.eigenvectors
        return (U * self.eigenvalues) @ U.conj().T


class Norms(NamedTuple):
    trace_norm: float
    frobenius: float
    operator: float


def dagger(M):
    return np.conj(np.swapaxes(M, -1, -2))


def as_hermitian(M, rtol=HERMITIAN_RTOL):
    """Return ``(M + M^dagger) / 2`` after checking that ``M`` is Hermitian.

    The asymmetry ``max|M - M^dagger|`` must not exceed ``rtol * max|M|``.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {M.shape}")
    if M.size == 0:
        return M.copy()
    scale = np.max(np.abs(M))
    asym = np.max(np.abs(M - M.conj().T))
    if asym > rtol * scale:
        raise ValidationError(
            f"matrix is not Hermitian: asymmetry {asym:.3e} exceeds {rtol:.1e} * {scale:.3e}"
        )
    return 0.5 * (M + M.conj().T)


def eig_hermitian(M, rtol=HERMITIAN_RTOL):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    M : array_like, shape (d, d)
        Hermitian up to ``rtol`` relative asymmetry; it is symmetrized first.

    Returns
    -------
    SpectralDecomposition
        Ascending real eigenvalues and a unitary matrix whose columns are the
        eigenvectors.
    """
    H = as_hermitian(M, rtol)
    w, U = np.linalg.eigh(H)
    return SpectralDecomposition(w, U)


def is_psd(M, tol=PSD_TOL):
    w = eig_hermitian(M).eigenvalues
    return bool(w.size == 0 or w[0] >= -tol)


def as_density(rho, tol=TRACE_TOL, psd_tol=PSD_TOL):
    """Validate a density matrix (Hermitian, PSD, unit trace) and symmetrize it."""
    rho = as_hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise ValidationError(f"trace {tr!r} differs from 1 by more than {tol:.1e}")
    w = np.linalg.eigvalsh(rho)
    if w[0] < -psd_tol:
        raise ValidationError(f"density matrix has eigenvalue {w[0]:.3e} < -{psd_tol:.1e}")
    return rho


def as_psd(M, psd_tol=PSD_TOL):
    """Validate a positive semidefinite matrix of arbitrary trace."""
    M = as_hermitian(M)
    w = np.linalg.eigvalsh(M)
    if w.size and w[0] < -psd_tol * max(1.0, abs(w[-1])):
        raise ValidationError(f"matrix has eigenvalue {w[0]:.3e}, not PSD")
    return M


def matrix_function(M, f: Callable, clip_floor=0.0, psd_tol=PSD_TOL):
    """Apply a scalar function to a PSD matrix through its spectrum.

    Eigenvalues in ``[-psd_tol, 0)`` are treated as rounding noise and set to
    zero; anything more negative is rejected.  When ``clip_floor > 0`` the
    eigenvalues below it are raised to ``clip_floor`` before ``f`` is applied.

    Raises
    ------
    DomainError
        If ``f`` is not finite at a retained eigenvalue (for example ``log``
        at an exact zero with ``clip_floor = 0``) or ``M`` is not PSD.
    """
    if clip_floor < 0:
        raise ValidationError("clip_floor must be nonnegative")
    w, U = eig_hermitian(M)
    if w.size and w[0] < -psd_tol:
        raise DomainError(f"matrix is not PSD (eigenvalue {w[0]:.3e})")
    w = np.where(w < 0, 0.0, w)
    if clip_floor > 0:
        w = np.maximum(w, clip_floor)
    with np.errstate(divide="ignore", invalid="ignore"):
        fw = np.asarray(f(w))
    if not np.all(np.isfinite(fw)):
        bad = w[~np.isfinite(fw)]
        raise DomainError(f"function undefined at eigenvalue(s) {bad}")
    return (U * fw) @ U.conj().T


def hermitian_function(M, f: Callable):
    """``U f(Λ) U^dagger`` for any Hermitian ``M`` (no PSD requirement)."""
    w, U = eig_hermitian(M)
    return (U * f(w)) @ U.conj().T


def sqrtm_psd(M):
    return matrix_function(M, np.sqrt)


def logm_pd(M, clip_floor=0.0):
    return matrix_function(M, np.log, clip_floor=clip_floor)


def expm_hermitian(M):
    return hermitian_function(M, np.exp)


def norms(M) -> Norms:
    """Trace, Frobenius and operator norms from the singular values of ``M``.

    For Hermitian input the singular values are the absolute eigenvalues, so
    the three norms are sum, root-sum-square and max of ``|λ_i|``.
    """
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return Norms(0.0, 0.0, 0.0)
    s = np.linalg.svd(M, compute_uv=False)
    return Norms(float(s.sum()), float(np.sqrt(np.sum(s**2))), float(s.max()))


def trace_norm(M):
    return norms(M).trace_norm


def trace_distance(rho, sigma):
    """``||rho - sigma||_1`` (no factor 1/2)."""
    return trace_norm(np.asarray(rho) - np.asarray(sigma))


def random_density(dim: int, rank: int, seed) -> np.ndarray:
    """Seeded Hilbert-Schmidt-type random state of the given rank.

    ``G G^dagger / Tr(G G^dagger)`` with ``G`` a ``dim x rank`` complex
    Gaussian matrix drawn from ``numpy.random.default_rng(seed)``.
    """
    if not (1 <= rank <= dim):
        raise ValidationError(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_hermitian(dim, rng):
    X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (X + X.conj().T)


def random_unitary(dim, rng):
    """Haar-random unitary (QR of a Ginibre matrix with phase correction)."""
    Z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    Qm, R = np.linalg.qr(Z)
    d = np.diagonal(R)
    return Qm * (d / np.abs(d))


def orthonormal_complement(V, dim=None):
    """Orthonormal basis (columns) of the complement of span(V)."""
    V = np.asarray(V, dtype=complex)
    dim = V.shape[0] if dim is None else dim
    if V.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    if V.shape[1] == dim:
        return np.zeros((dim, 0), dtype=complex)
    P = V @ V.conj().T
    w, U = eig_hermitian(np.eye(dim) - P)
    return U[:, w > 0.5]


def range_basis(P):
    """Orthonormal basis of the range of a projector ``P``."""
    w, U = eig_hermitian(P)
    return U[:, w > 0.5]
