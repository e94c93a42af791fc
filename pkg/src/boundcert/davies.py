"""Davies generators, their secular rate tables and Liouvillian evolution.

Superoperators act on row-major vectorized matrices, ``vec(X) = X.ravel()``,
so that ``vec(A X B) = kron(A, B.T) @ vec(X)``.
"""

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy import special

from .activation import SupportSplit, activation
from .entropy import relative_entropy
from .errors import NumericalError, ValidationError
from .linalg import as_density, as_hermitian, trace_distance

BLOWUP_TOL = 1e-8
PSD_REPAIR = 1e-8
SPECTRAL_MAX_DIM2 = 1024
EIGVEC_COND_MAX = 1e10


# ---------------------------------------------------------------- rate models

def fermi_rate(beta):
    """``gamma(w) = 1 / (1 + exp(-beta w))``; satisfies KMS exactly."""
    def gamma(w):
        return float(special.expit(beta * w))
    return gamma


def ohmic_rate(beta):
    """``gamma(w) = w / (1 - exp(-beta w))`` with ``gamma(0) = 1/beta``."""
    def gamma(w):
        x = beta * w
        if abs(x) < 1e-12:
            return 1.0 / beta
        return w / -math.expm1(-x)
    return gamma


def tabulated_rate(table, tol=1e-9):
    """Rate looked up in ``[(omega, gamma), ...]``; frequencies must match within ``tol``."""
    table = [(float(w), float(g)) for w, g in table]

    def gamma(w):
        for wk, gk in table:
            if abs(wk - w) <= tol * max(1.0, abs(w)):
                return gk
        raise ValidationError(f"no tabulated rate for Bohr frequency {w}")
    return gamma


RATE_MODELS = {"fermi": fermi_rate, "default": fermi_rate, "ohmic": ohmic_rate}


# ---------------------------------------------------------------- superoperators

def left(A):
    return np.kron(A, np.eye(A.shape[0]))


def right(B):
    return np.kron(np.eye(B.shape[0]), B.T)


def commutator_super(H):
    return left(H) - right(H)


def dissipator_super(A):
    AdA = A.conj().T @ A
    return np.kron(A, A.conj()) - 0.5 * left(AdA) - 0.5 * right(AdA)


def vec(X):
    return np.asarray(X).ravel()


def unvec(v):
    d = int(round(math.sqrt(v.shape[-1])))
    return v.reshape(v.shape[:-1] + (d, d))


# ---------------------------------------------------------------- model

@dataclass(frozen=True)
class BohrClass:
    omega: float
    pairs: tuple  # (m, n) with E_m - E_n ~ omega


@dataclass(frozen=True)
class LindbladTerm:
    coupling: int
    omega: float
    rate: float
    op: np.ndarray


@dataclass(frozen=True)
class RateParams:
    W: np.ndarray
    mu: float
    eta: float
    k: float
    eps_bar: float
    P_levels: tuple
    Q_levels: tuple


@dataclass(frozen=True)
class DaviesModel:
    energies: np.ndarray
    eigenbasis: np.ndarray
    couplings: tuple
    beta: float
    rate_fns: tuple
    lamb_shift: np.ndarray
    bohr_classes: tuple
    lindblad_terms: tuple
    liouvillian: np.ndarray
    split: SupportSplit
    P_levels: tuple
    Q_levels: tuple
    freq_tol: float
    _spectral: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self):
        return len(self.energies)

    @property
    def hamiltonian(self):
        U = self.eigenbasis
        return (U * self.energies) @ U.conj().T

    def apply(self, rho):
        """``L(rho)`` as a matrix."""
        return unvec(self.liouvillian @ vec(rho))

    def level(self, m):
        return self.eigenbasis[:, m]

    def gibbs_state(self):
        w = np.exp(-self.beta * (self.energies - self.energies.min()))
        U = self.eigenbasis
        return (U * (w / w.sum())) @ U.conj().T


def _cluster(values, tol):
    """Group sorted values whose consecutive gaps are at most ``tol``."""
    order = np.argsort(values, kind="stable")
    groups = []
    for idx in order:
        if groups and values[idx] - values[groups[-1][-1]] <= tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def _support_levels(split, U, d):
    """Indices of energy levels inside P; raises if P is not eigenspace-aligned."""
    weights = np.einsum("im,ij,jm->m", U.conj(), split.P, U).real
    inside = weights > 0.5
    if np.max(np.abs(weights - inside), initial=0.0) > 1e-9:
        raise ValidationError("P is not a union of energy eigenvectors")
    resid = split.P - (U[:, inside] @ U[:, inside].conj().T)
    if np.max(np.abs(resid), initial=0.0) > 1e-9:
        raise ValidationError("P is not a union of energy eigenvectors")
    return tuple(int(m) for m in np.flatnonzero(inside)), tuple(int(m) for m in np.flatnonzero(~inside))


def build_davies(energies, couplings: Sequence, beta, rate_fn, split: SupportSplit,
                 eigenbasis=None, lamb_shift=None, freq_tol=None):
    """Assemble a Davies generator and its cross-boundary rate parameters.

    Parameters
    ----------
    energies : array_like, shape (d,)
        Hamiltonian eigenvalues ``E_m``.
    couplings : sequence of (d, d) Hermitian arrays
        System coupling operators ``S_alpha`` in the computational basis.
    beta : float
        Inverse temperature (stored; only the rate functions use it).
    rate_fn : callable or sequence of callables
        ``gamma_alpha(omega) >= 0``; one callable is shared by all couplings.
    split : SupportSplit
        Must be a union of energy eigenspaces.
    eigenbasis : array_like, optional
        Unitary whose columns are the energy eigenvectors (default identity).
    lamb_shift : array_like, optional
        Hermitian, commuting with the Hamiltonian (default zero).
    freq_tol : float, optional
        Bohr-frequency clustering tolerance, default ``1e-9 max|E_m|``.

    Returns
    -------
    (DaviesModel, RateParams)
    """
    E = np.asarray(energies, dtype=float)
    d = E.size
    U = np.eye(d, dtype=complex) if eigenbasis is None else np.asarray(eigenbasis, dtype=complex)
    if U.shape != (d, d) or np.max(np.abs(U.conj().T @ U - np.eye(d))) > 1e-10:
        raise ValidationError("eigenbasis must be a d x d unitary")
    if split.dim != d:
        raise ValidationError("split dimension does not match the Hamiltonian")
    Ss = tuple(as_hermitian(S) for S in couplings)
    if any(S.shape != (d, d) for S in Ss):
        raise ValidationError("coupling operators must be d x d")
    fns = tuple(rate_fn) if isinstance(rate_fn, (list, tuple)) else (rate_fn,) * len(Ss)
    if len(fns) != len(Ss):
        raise ValidationError("need one rate function per coupling")
    if freq_tol is None:
        freq_tol = 1e-9 * max(1.0, float(np.max(np.abs(E)))) if d else 1e-9

    H = (U * E) @ U.conj().T
    H_LS = np.zeros((d, d), dtype=complex) if lamb_shift is None else as_hermitian(lamb_shift)
    scale = max(1.0, np.max(np.abs(H)), np.max(np.abs(H_LS)))
    if np.max(np.abs(H @ H_LS - H_LS @ H)) > 1e-10 * scale**2:
        raise ValidationError("Lamb shift must commute with the Hamiltonian")

    P_levels, Q_levels = _support_levels(split, U, d)
    for grp in _cluster(E, freq_tol):
        inside = {m in P_levels for m in grp}
        if len(inside) > 1:
            raise ValidationError(f"P cuts through the degenerate eigenspace of levels {grp}")

    pairs = [(m, n) for m in range(d) for n in range(d)]
    gaps = np.array([E[m] - E[n] for m, n in pairs])
    classes = []
    for grp in _cluster(gaps, freq_tol):
        omega = float(np.mean(gaps[grp]))
        if abs(omega) <= freq_tol:
            omega = 0.0
        classes.append(BohrClass(omega, tuple(pairs[i] for i in grp)))

    L = -1j * commutator_super(H + H_LS)
    terms = []
    W = np.zeros((d, d))
    for alpha, (S, g) in enumerate(zip(Ss, fns)):
        Se = U.conj().T @ S @ U
        for cls in classes:
            mask = np.zeros((d, d))
            for m, n in cls.pairs:
                mask[n, m] = 1.0
            Ae = Se * mask
            if not np.any(np.abs(Ae) > 0):
                continue
            rate = float(g(cls.omega))
            if not rate >= 0:
                raise ValidationError(f"negative rate {rate} at omega={cls.omega}")
            A = U @ Ae @ U.conj().T
            terms.append(LindbladTerm(alpha, cls.omega, rate, A))
            if rate:
                L = L + rate * dissipator_super(A)
            for m, n in cls.pairs:
                if m != n:
                    W[n, m] += rate * abs(Se[n, m]) ** 2

    model = DaviesModel(E, U, Ss, float(beta), fns, H_LS, tuple(classes), tuple(terms), L,
                        split, P_levels, Q_levels, float(freq_tol))
    return model, rate_params(W, P_levels, Q_levels)


def rate_params(W, P_levels, Q_levels):
    """Cross-boundary parameters ``mu, eta, k, eps_bar`` from the rate matrix ``W[n, m]``."""
    P = list(P_levels)
    Qi = list(Q_levels)
    if not P or not Qi:
        mu = eta = 0.0
    else:
        mu = float(np.max(W[np.ix_(Qi, P)].sum(axis=0)))
        eta = float(np.min(W[np.ix_(P, Qi)].sum(axis=0)))
    k = mu + eta
    eps_bar = mu / k if k > 0 else 0.0
    return RateParams(W, mu, eta, k, eps_bar, tuple(P_levels), tuple(Q_levels))


# ---------------------------------------------------------------- secular table

@dataclass(frozen=True)
class SecularTable:
    gamma_pe: np.ndarray
    omega_pe: np.ndarray
    gamma_max: float
    residuals: np.ndarray
    distinct_ok: bool
    secular_ok: bool
    P_levels: tuple
    Q_levels: tuple

    @property
    def max_residual(self):
        return float(np.max(self.residuals, initial=0.0))


def verify_secular(model: DaviesModel, split=None, tol=1e-9, freq_tol=None):
    """Extract ``L(|p><e|) = (-Gamma_pe - i omega_pe) |p><e|`` for every cross pair.

    The eigenvalue is obtained by Hilbert-Schmidt projection and the residual
    is the Frobenius norm of what the projection leaves over.  ``secular_ok``
    requires every residual to be at most ``tol`` and the ``omega_pe`` to be
    pairwise separated by more than ``freq_tol``.
    """
    if split is None:
        P_levels, Q_levels = model.P_levels, model.Q_levels
    else:
        P_levels, Q_levels = _support_levels(split, model.eigenbasis, model.dim)
    freq_tol = model.freq_tol if freq_tol is None else freq_tol
    r, dq = len(P_levels), len(Q_levels)
    G = np.zeros((r, dq))
    Om = np.zeros((r, dq))
    R = np.zeros((r, dq))
    for i, p in enumerate(P_levels):
        for j, e in enumerate(Q_levels):
            X = np.outer(model.level(p), model.level(e).conj())
            LX = model.apply(X)
            lam = np.vdot(X, LX)
            G[i, j] = -lam.real
            Om[i, j] = -lam.imag
            R[i, j] = np.linalg.norm(LX - lam * X)
    flat = np.sort(Om.ravel())
    distinct = bool(np.all(np.diff(flat) > freq_tol))
    gmax = float(np.max(G, initial=0.0))
    ok = distinct and float(np.max(R, initial=0.0)) <= tol
    return SecularTable(G, Om, gmax, R, distinct, ok, tuple(P_levels), tuple(Q_levels))


# ---------------------------------------------------------------- evolution

@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    reports: list
    trace_dist: np.ndarray
    rel_entropy: np.ndarray

    def column(self, name):
        return np.array([getattr(r, name) for r in self.reports])

    @property
    def c(self):
        return self.column("c")

    @property
    def eps_Q(self):
        return self.column("eps_Q")

    @property
    def A(self):
        return self.column("A_func")

    @property
    def R2(self):
        return self.column("R2")


def liouvillian_spectrum(model):
    if "eig" not in model._spectral:
        lam, V = scipy.linalg.eig(model.liouvillian)
        model._spectral["eig"] = (lam, V)
    return model._spectral["eig"]


def _check_blowup(lam):
    worst = float(np.max(lam.real))
    if worst > BLOWUP_TOL:
        raise NumericalError("Liouvillian has an eigenvalue with positive real part",
                             max_real_part=worst)


def propagate(model, rho0, times, method="auto"):
    """States ``exp(t L) rho0`` for each ``t`` (no repair, no diagnostics)."""
    times = np.asarray(times, dtype=float)
    v0 = vec(np.asarray(rho0, dtype=complex))
    lam, V = liouvillian_spectrum(model)
    _check_blowup(lam)
    if method == "auto":
        method = "spectral" if model.liouvillian.shape[0] <= SPECTRAL_MAX_DIM2 else "expm"
    if method == "spectral":
        if np.linalg.cond(V) > EIGVEC_COND_MAX:
            method = "expm"
        else:
            coeff = np.linalg.solve(V, v0)
            out = (V[None, :, :] * np.exp(np.outer(times, lam))[:, None, :]) @ coeff
    if method == "expm":
        out = np.array([scipy.linalg.expm(model.liouvillian * t) @ v0 for t in times])
    elif method != "spectral":
        raise ValidationError(f"unknown evolution method {method!r}")
    return unvec(out)


def repair_state(rho, tol=PSD_REPAIR):
    """Symmetrize, clip eigenvalues in ``[-tol, 0)`` to zero and renormalize."""
    rho = 0.5 * (rho + rho.conj().T)
    w, U = np.linalg.eigh(rho)
    if w[0] < -tol:
        raise NumericalError("evolved state lost positivity", min_eigenvalue=float(w[0]))
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        w = w / w.sum()
        rho = (U * w) @ U.conj().T
    return rho


def evolve(model: DaviesModel, rho0, times, reference=None, method="auto", split=None):
    """Evolve ``rho0`` under ``exp(t L)`` on an ascending grid starting at 0.

    Each state is re-symmetrized and PSD-repaired; trace drift beyond 1e-9 is
    an error.  When ``reference`` (typically ``sigma_eps``) is supplied the
    trace distance and relative entropy to it are recorded, otherwise those
    columns are NaN.
    """
    rho0 = as_density(rho0)
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0 or np.any(np.diff(times) < 0):
        raise ValidationError("times must be ascending and start at 0")
    split = model.split if split is None else split
    raw = propagate(model, rho0, times, method)
    states = np.empty_like(raw)
    states[0] = rho0
    for i in range(1, len(times)):
        tr = np.trace(raw[i]).real
        if abs(tr - 1.0) > 1e-9:
            raise NumericalError("trace drifted during evolution", time=float(times[i]), trace=tr)
        states[i] = repair_state(raw[i])
    reports = [activation(s, split) for s in states]
    if reference is None:
        td = np.full(len(times), np.nan)
        re = np.full(len(times), np.nan)
    else:
        td = np.array([trace_distance(s, reference) for s in states])
        re = np.array([relative_entropy(s, reference) for s in states])
    return Trajectory(times, states, reports, td, re)


# ---------------------------------------------------------------- closed-form bounds

@dataclass(frozen=True)
class DynamicalBounds:
    c_lower: np.ndarray
    epsQ_upper: np.ndarray
    R2_lower: np.ndarray


def dynamical_bounds(rates: RateParams, secular: SecularTable, c0, eps0, t):
    """Coherence floor, kernel-population ceiling and the implied ratio floor at time(s) ``t``.

    ``c_lower = exp(-2 Gamma_max t) c0`` and
    ``epsQ_upper = exp(-k t) eps0 + eps_bar (1 - exp(-k t))``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValidationError("t must be nonnegative")
    cl = np.exp(-2.0 * secular.gamma_max * t) * c0
    ek = np.exp(-rates.k * t)
    eu = ek * eps0 + rates.eps_bar * (1.0 - ek)
    tot = cl + eu
    with np.errstate(invalid="ignore", divide="ignore"):
        R2 = np.where(tot > 0, cl / np.where(tot > 0, tot, 1.0), 0.0)
    return DynamicalBounds(cl, eu, R2)


@dataclass(frozen=True)
class DetailedBalanceRates:
    delta_E: float
    eta_up: float
    eta: float
    mu: float


def detailed_balance_rates(model: DaviesModel, rates: RateParams, tol=0.0):
    """Energy gap ``Delta E`` and ``eta_up = max_p sum_e W_pe`` for the low-temperature window.

    ``Delta E`` is the smallest ``E_e - E_p`` over cross pairs with a nonzero
    upward rate ``W_ep``.
    """
    E = model.energies
    W = rates.W
    gaps = [E[e] - E[p] for p in rates.P_levels for e in rates.Q_levels if W[e, p] > tol]
    delta_E = float(min(gaps)) if gaps else math.inf
    P, Qi = list(rates.P_levels), list(rates.Q_levels)
    eta_up = float(np.max(W[np.ix_(P, Qi)].sum(axis=1))) if P and Qi else 0.0
    return DetailedBalanceRates(delta_E, eta_up, rates.eta, rates.mu)


def stationarity_residual(model, sigma):
    return float(np.linalg.norm(model.apply(sigma)))
