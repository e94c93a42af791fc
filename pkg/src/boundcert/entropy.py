"""Relative entropy, pinching, fidelity and the BKM (Kubo-Mori) form.

Infinite relative entropies are returned as ``math.inf``; callers compare
against finite bounds with ordinary float comparison, which IEEE semantics
make exact for infinities.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError, ValidationError
from .linalg import as_hermitian, as_psd, eig_hermitian, sqrtm_psd, trace_norm

PROJ_TOL = 1e-11
LOG_MEAN_SWITCH = 1e-8
QUAD_MAX_NODES = 2**14
_GK21_NODES = 21


def default_supp_tol(dim):
    return 1e-10 * dim


@dataclass(frozen=True)
class PinchingSpec:
    """Family of mutually orthogonal projectors resolving the identity."""

    projectors: tuple

    def __post_init__(self):
        Ps = tuple(as_hermitian(P) for P in self.projectors)
        if not Ps:
            raise ValidationError("pinching needs at least one projector")
        d = Ps[0].shape[0]
        eye = np.eye(d)
        for i, P in enumerate(Ps):
            if P.shape != (d, d):
                raise ValidationError("projectors must share one dimension")
            if np.max(np.abs(P @ P - P)) > PROJ_TOL:
                raise ValidationError(f"projector {i} is not idempotent")
            for j in range(i):
                if np.max(np.abs(P @ Ps[j])) > PROJ_TOL:
                    raise ValidationError(f"projectors {j} and {i} are not orthogonal")
        if np.max(np.abs(sum(Ps) - eye)) > PROJ_TOL:
            raise ValidationError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", Ps)

    @classmethod
    def two_block(cls, P):
        P = np.asarray(P, dtype=complex)
        return cls((P, np.eye(P.shape[0]) - P))

    @property
    def dim(self):
        return self.projectors[0].shape[0]

    def is_fixed(self, X, tol=1e-11):
        """True when ``X`` is block diagonal for this family."""
        return bool(np.max(np.abs(pinch(X, self) - X)) <= tol)


def _as_spec(spec):
    if isinstance(spec, PinchingSpec):
        return spec
    return PinchingSpec(tuple(spec))


def von_neumann_entropy(rho, tol=0.0):
    """``-Tr rho log rho`` in nats, with ``0 log 0 = 0``."""
    w = eig_hermitian(rho).eigenvalues
    w = w[w > tol]
    return float(-np.sum(w * np.log(w)))


def relative_entropy(rho, sigma, supp_tol=None):
    """Umegaki relative entropy ``Tr rho (log rho - log sigma)`` in nats.

    Both arguments must be PSD; unit trace is not required, which lets the
    same routine evaluate the 2x2 block entropies that appear in the
    coercivity argument.

    Parameters
    ----------
    rho, sigma : array_like
        PSD matrices of equal shape.
    supp_tol : float, optional
        Eigenvalues of ``sigma`` at or below this value count as outside the
        support; eigenvalues of ``rho`` below it contribute ``0 log 0 = 0``.
        Defaults to ``1e-10 * d``.

    Returns
    -------
    float
        The relative entropy, or ``math.inf`` when ``rho`` carries more than
        ``supp_tol`` weight outside ``supp(sigma)``.
    """
    rho = as_psd(rho)
    sigma = as_psd(sigma)
    if rho.shape != sigma.shape:
        raise ValidationError("rho and sigma must have the same shape")
    d = rho.shape[0]
    tol = default_supp_tol(d) if supp_tol is None else supp_tol

    s, V = eig_hermitian(sigma)
    on_supp = s > tol
    rho_diag = np.einsum("ij,jk,ki->i", V.conj().T, rho, V).real
    if np.sum(rho_diag[~on_supp]) > tol:
        return math.inf

    lam = eig_hermitian(rho).eigenvalues
    lam = lam[lam > tol]
    neg_entropy = np.sum(lam * np.log(lam))
    cross = np.sum(rho_diag[on_supp] * np.log(s[on_supp]))
    return float(neg_entropy - cross)


def pinch(rho, spec):
    """``sum_i P_i rho P_i`` for the projector family ``spec``."""
    spec = _as_spec(spec)
    rho = np.asarray(rho, dtype=complex)
    out = sum(P @ rho @ P for P in spec.projectors)
    return 0.5 * (out + out.conj().T)


def coherence_entropy(rho, spec):
    """Relative entropy of coherence ``D(rho || pinch(rho))``.

    Evaluated as ``S(pinch(rho)) - S(rho)``, which is always finite because
    ``supp(rho)`` lies inside ``supp(pinch(rho))``.
    """
    rho = as_psd(rho)
    return von_neumann_entropy(pinch(rho, spec)) - von_neumann_entropy(rho)


def fidelity(X, Y):
    """Root fidelity ``Tr sqrt(sqrt(X) Y sqrt(X))`` of two PSD matrices.

    No normalization is imposed, so ``fidelity(X, X) == Tr X``.
    """
    X = as_psd(X)
    Y = as_psd(Y)
    sX = sqrtm_psd(X)
    w = eig_hermitian(sX @ Y @ sX, rtol=1e-9).eigenvalues
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))))


def _log_mean(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m = 0.5 * (x + y)
    z = (x - y) / (x + y)
    near = np.abs(x - y) <= LOG_MEAN_SWITCH * np.maximum(x, y)
    z_safe = np.where(near, 0.5, z)
    mid = np.arctanh(z_safe) / (z_safe * m)
    # artanh loses digits as |z| -> 1; there the plain log difference is exact enough
    with np.errstate(divide="ignore", invalid="ignore"):
        wide = (np.log(x) - np.log(y)) / (x - y)
    far = np.where(np.abs(z) > 0.5, wide, mid)
    series = (1.0 + z * z / 3.0) / m
    return np.where(near, series, far)


def log_mean_L(x, y):
    """Log-mean kernel ``(log x - log y) / (x - y)``, equal to ``1/x`` on the diagonal.

    Evaluated as ``artanh(z) / (z m)`` with ``m = (x+y)/2`` and
    ``z = (x-y)/(x+y)``; when ``|x - y| <= 1e-8 max(x, y)`` the series
    ``(1 + z^2/3) / m`` is used instead, and for ``|z| > 1/2`` the log
    difference is evaluated directly.
    """
    if not (x > 0 and y > 0):
        raise DomainError(f"log_mean_L requires positive arguments, got ({x}, {y})")
    return float(_log_mean(x, y))


def _bkm_unchecked(M, Y):
    w, U = np.linalg.eigh(0.5 * (M + M.conj().T))
    Yt = U.conj().T @ Y @ U
    K = _log_mean(w[:, None], w[None, :])
    return float(np.sum(np.abs(Yt) ** 2 * K))


def bkm_form(M, Y, tol=1e-14):
    """BKM quadratic form ``sum_ij |<i|Y|j>|^2 L(lambda_i, lambda_j)``.

    The sum runs over the eigenbasis of the positive definite matrix ``M``.
    """
    M = as_hermitian(M)
    Y = as_hermitian(Y)
    w = eig_hermitian(M).eigenvalues
    if w[0] <= tol * max(1.0, w[-1]):
        raise DomainError(f"BKM form needs a positive definite base point (min eigenvalue {w[0]:.3e})")
    return _bkm_unchecked(M, Y)


def bkm_integral(D0, Y, rel_tol=1e-8):
    """``int_0^1 (1 - t) H_{D0 + tY}(Y, Y) dt`` by adaptive Gauss-Kronrod quadrature.

    ``D0`` must be positive definite and diagonal, ``Y`` Hermitian with zero
    diagonal, and ``D0 + Y`` PSD (which by convexity keeps the whole segment
    PSD).  At most ``2**14`` integrand evaluations are spent.
    """
    D0 = as_hermitian(D0)
    Y = as_hermitian(Y)
    if np.max(np.abs(D0 - np.diag(np.diag(D0)))) > 0:
        raise ValidationError("D0 must be diagonal")
    if np.min(np.diag(D0).real) <= 0:
        raise ValidationError("D0 must be positive definite")
    if np.max(np.abs(np.diag(Y)), initial=0.0) > 1e-14:
        raise ValidationError("Y must have zero diagonal")
    if np.max(np.abs(Y)) == 0:
        return 0.0
    w1 = eig_hermitian(D0 + Y).eigenvalues
    if w1[0] < -1e-12:
        raise ValidationError("D0 + Y is not PSD; the segment leaves the cone")

    def integrand(t):
        return (1.0 - t) * _bkm_unchecked(D0 + t * Y, Y)

    limit = QUAD_MAX_NODES // _GK21_NODES
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-15, epsrel=rel_tol,
                             limit=limit, full_output=1)
    value, abserr, info = out[0], out[1], out[2]
    if len(out) > 3:
        raise NumericalError("BKM quadrature did not converge", value=value,
                             abserr=abserr, neval=info["neval"], message=out[3])
    return float(value)


def pinsker_gap(rho, sigma):
    """``D(rho||sigma) - ||rho - sigma||_1^2 / 2`` (``math.inf`` if D is infinite)."""
    D = relative_entropy(rho, sigma)
    if math.isinf(D):
        return math.inf
    return D - 0.5 * trace_norm(np.asarray(rho) - np.asarray(sigma)) ** 2


def block_diagonal(blocks: Sequence[np.ndarray]):
    """Direct sum of square blocks."""
    d = sum(b.shape[0] for b in blocks)
    out = np.zeros((d, d), dtype=complex)
    i = 0
    for b in blocks:
        n = b.shape[0]
        out[i:i + n, i:i + n] = b
        i += n
    return out
