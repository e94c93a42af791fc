"""Coherence/population split of relative entropy and its multi-sector form.

Also contains the Petz recovery map of a pinching channel and the comparison
of the explicit coherence bound with the recoverability remainder
``-2 log F(rho, R(pinch(rho)))``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .activation import activation, bkm_coercivity, block_decompose
from .entropy import PinchingSpec, fidelity, pinch, relative_entropy
from .errors import DomainError, ValidationError
from .linalg import as_density, eig_hermitian, matrix_function, range_basis

BLOCK_TOL = 1e-11
RATIO_FLOOR_DENOM = 1e-14
PETZ_TOL = 1e-10


@dataclass(frozen=True)
class CpsReport:
    d_total: float
    d_coh: float
    d_pop: float
    residual: float
    coercivity_bound: float
    regime_ok: bool


def cps_decompose(rho, sigma, split, a0) -> CpsReport:
    """``D(rho||sigma)`` next to ``D(rho||pinch rho)`` and ``D(pinch rho||sigma)``.

    The three entropies are evaluated separately so that ``residual`` measures
    how well the exact identity between them holds numerically.
    """
    rho = as_density(rho)
    sigma = as_density(sigma)
    if not split.is_block_diagonal(sigma, BLOCK_TOL):
        raise ValidationError("sigma must be block diagonal for the P + Q split")
    spec = split.pinching()
    prho = pinch(rho, spec)
    d_total = relative_entropy(rho, sigma)
    d_coh = relative_entropy(rho, prho)
    d_pop = relative_entropy(prho, sigma)
    if all(math.isfinite(x) for x in (d_total, d_coh, d_pop)):
        residual = abs(d_total - d_coh - d_pop)
    else:
        residual = math.nan
    coer = bkm_coercivity(rho, split, a0)
    return CpsReport(d_total, d_coh, d_pop, residual, coer.bound, coer.regime_ok)


@dataclass(frozen=True)
class SectorChain:
    """Sequential pinching ``rho^(K) = rho``, ``rho^(m-1) = E_m(rho^(m))``.

    ``states[m - 1]`` holds ``rho^(m)``; the per-sector lists ``C``, ``a``,
    ``eps``, ``conditions_ok`` are indexed by ``m - 2`` for ``m = 2..K``.
    """

    projectors: tuple
    states: list
    C: list
    C_direct: list
    identity_residual: list
    a: list
    a_full: list
    eps: list
    conditions_ok: list

    @property
    def K(self):
        return len(self.projectors)

    def state(self, m):
        return self.states[m - 1]


def _sector_pinch(X, P):
    Pc = np.eye(P.shape[0]) - P
    out = P @ X @ P + Pc @ X @ Pc
    return 0.5 * (out + out.conj().T)


def sequential_pinch_chain(rho, projectors) -> SectorChain:
    """Apply ``E_K, ..., E_2`` in order and tabulate the per-step constants.

    ``C_m = ||(I - P_m) rho^(m) P_m||_2^2`` is computed from the chain and,
    independently, as ``sum_{i<m} ||P_i rho P_m||_2^2``.  ``eps_m`` is
    ``Tr(P_m rho P_m)``.

    ``a_m`` is the smallest eigenvalue of ``rho^(m)`` compressed to
    ``ran(P_1 + ... + P_{m-1})``, the subspace holding the left singular
    vectors of the off-diagonal block; ``a_full`` compresses to the whole of
    ``ran(I - P_m)`` instead.  The two coincide for ``K = 2``; for ``K >= 3``
    the ``a_full`` version of the conditions cannot hold for two consecutive
    nonempty sectors, since each would need at most half the other's weight.
    """
    spec = PinchingSpec(tuple(projectors))
    Ps = spec.projectors
    K = len(Ps)
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    states = [None] * K
    states[K - 1] = rho
    for m in range(K, 1, -1):
        states[m - 2] = _sector_pinch(states[m - 1], Ps[m - 1])
    C, C_direct, resid, a, a_full, eps, ok = [], [], [], [], [], [], []
    for m in range(2, K + 1):
        Pm = Ps[m - 1]
        Pc = np.eye(d) - Pm
        rm = states[m - 1]
        off = Pc @ rm @ Pm
        direct = sum(Ps[i] @ rho @ Pm for i in range(m - 1))
        C.append(float(np.sum(np.abs(off) ** 2)))
        C_direct.append(float(sum(np.sum(np.abs(Ps[i] @ rho @ Pm) ** 2) for i in range(m - 1))))
        resid.append(float(np.linalg.norm(off - direct)))
        V = range_basis(Pc)
        a_full.append(float(eig_hermitian(V.conj().T @ rm @ V).eigenvalues[0]))
        Vs = range_basis(sum(Ps[: m - 1]))
        am = float(eig_hermitian(Vs.conj().T @ rm @ Vs).eigenvalues[0])
        em = float(np.trace(Pm @ rho @ Pm).real)
        a.append(am)
        eps.append(em)
        ok.append(bool(am > 0 and em <= am / 2))
    return SectorChain(Ps, states, C, C_direct, resid, a, a_full, eps, ok)


@dataclass(frozen=True)
class MultiSectorBound:
    bound: float
    applicable: bool
    telescoping_residual: float
    d_total: float
    d_pop: float


def multi_sector_bound(rho, sigma, chain: SectorChain) -> MultiSectorBound:
    """``sum_m C_m log(a_m/eps_m) + D(Pi_K rho || sigma)`` with its applicability flag.

    ``telescoping_residual`` compares ``D(rho || Pi_K rho)`` with the sum of
    the per-step entropies ``D(rho^(m) || rho^(m-1))``.
    """
    sigma = np.asarray(sigma, dtype=complex)
    spec = PinchingSpec(chain.projectors)
    if not spec.is_fixed(sigma, BLOCK_TOL):
        raise ValidationError("sigma must be block diagonal for the sector family")
    full = chain.state(1)
    d_pop = relative_entropy(full, sigma)
    d_total = relative_entropy(rho, sigma)
    steps = sum(relative_entropy(chain.state(m), chain.state(m - 1)) for m in range(2, chain.K + 1))
    tele = abs(relative_entropy(rho, full) - steps)
    applicable = all(chain.conditions_ok)
    total = 0.0
    for Cm, am, em in zip(chain.C, chain.a, chain.eps):
        if Cm == 0:
            continue
        if em <= 0:
            applicable = False
            continue
        total += Cm * math.log(am / em)
    return MultiSectorBound(total + d_pop, bool(applicable), float(tele), d_total, d_pop)


def _spec_of(split_or_spec):
    if isinstance(split_or_spec, PinchingSpec):
        return split_or_spec
    if hasattr(split_or_spec, "pinching"):
        return split_or_spec.pinching()
    return PinchingSpec(tuple(split_or_spec))


def petz_recovery(sigma, split, X):
    """``sigma^{1/2} Pi(sigma^{-1/2} X sigma^{-1/2}) sigma^{1/2}`` for the pinching ``Pi``.

    ``split`` may be a ``SupportSplit``, a ``PinchingSpec`` or a list of
    projectors.  ``sigma`` must be invertible and fixed by ``Pi``.
    """
    spec = _spec_of(split)
    sigma = np.asarray(sigma, dtype=complex)
    w = eig_hermitian(sigma).eigenvalues
    if w[0] <= 1e-14 * max(1.0, w[-1]):
        raise DomainError("Petz recovery needs a faithful (invertible) reference state")
    if not spec.is_fixed(sigma, BLOCK_TOL):
        raise ValidationError("sigma must be fixed by the pinching")
    s_half = matrix_function(sigma, np.sqrt)
    s_mhalf = matrix_function(sigma, lambda x: 1.0 / np.sqrt(x))
    X = np.asarray(X, dtype=complex)
    out = s_half @ pinch(s_mhalf @ X @ s_mhalf, spec) @ s_half
    return 0.5 * (out + out.conj().T)


def pinched_fidelity(rho, split):
    """``F(rho, P rho P + Q rho Q)`` from a block factorization of ``rho``.

    With ``rho = G G^dagger`` for the block-triangular factor built from
    ``A = P rho P`` and its Schur complement ``C - B^dagger A^{-1} B``, the
    fidelity is the nuclear norm of ``G^dagger (sqrt(A) + sqrt(C))``.  Unlike
    the generic square-root formula, this keeps the small singular values
    (of order ``eps_Q``) accurate to working precision.  ``A`` must be
    invertible.
    """
    blk = block_decompose(rho, split)
    A, B, C = blk.A, blk.B, blk.C
    LA = np.linalg.cholesky(A)
    X = np.linalg.solve(LA, B)  # L_A^{-1} B
    S = C - X.conj().T @ X
    S = 0.5 * (S + S.conj().T)
    ws, Vs = np.linalg.eigh(S)
    LS = Vs * np.sqrt(np.clip(ws, 0.0, None))
    wc, Vc = np.linalg.eigh(C)
    sC = (Vc * np.sqrt(np.clip(wc, 0.0, None))) @ Vc.conj().T
    wa, Va = np.linalg.eigh(A)
    sA = (Va * np.sqrt(wa)) @ Va.conj().T
    r, dq = split.r, split.d_Q
    N = np.zeros((r + dq, r + dq), dtype=complex)
    N[:r, :r] = LA.conj().T @ sA
    N[:r, r:] = X @ sC
    N[r:, r:] = LS.conj().T @ sC
    return float(np.sum(np.linalg.svd(N, compute_uv=False)))


def class_threshold(a0):
    """Largest ``eps_Q`` of the near-boundary class, ``a0 exp(-4/a0)``."""
    return a0 * math.exp(-4.0 / a0)


@dataclass(frozen=True)
class FrReport:
    ours: float
    fr_remainder: float
    ratio: float
    in_class: bool
    ratio_floor: float
    c: float
    eps_Q: float
    fidelity_pinched: float
    petz_residual: float


def fr_compare(rho, sigma, split, a0) -> FrReport:
    """Explicit coherence bound against the Petz-recovery fidelity remainder.

    ``ratio`` is ``ours / fr_remainder``, or ``math.inf`` when the remainder is
    at most 1e-14 (it then carries no usable scale).  When the Petz map
    returns the dephased state (``petz_residual <= 1e-10``, which is exact in
    theory) the fidelity is taken from :func:`pinched_fidelity`; otherwise the
    generic root fidelity against the recovered state is used.

    Raises
    ------
    ValidationError
        If ``lambda_min(P rho P) < a0`` on PH.
    """
    rho = as_density(rho)
    blocks_A = split.basis_P.conj().T @ rho @ split.basis_P
    lam_A = float(eig_hermitian(blocks_A).eigenvalues[0])
    if lam_A < a0:
        raise ValidationError(f"lambda_min(P rho P) = {lam_A} is below a0 = {a0}")
    rep = activation(rho, split)
    in_class = rep.eps_Q <= class_threshold(a0)
    ours = rep.c * math.log(a0 / rep.eps_Q) if rep.c > 0 and rep.eps_Q > 0 else 0.0
    prho = pinch(rho, split.pinching())
    recovered = petz_recovery(sigma, split, prho)
    petz_residual = float(np.linalg.norm(recovered - prho))
    if petz_residual > PETZ_TOL:
        F = fidelity(rho, recovered)
    else:
        # the recovered state is the dephased one; use the accurate block formula
        F = pinched_fidelity(rho, split)
    fr = -2.0 * math.log(F)
    ratio = ours / fr if fr > RATIO_FLOOR_DENOM else math.inf
    floor = a0 * math.log(a0 / rep.eps_Q) / 4 if rep.eps_Q > 0 else math.inf
    return FrReport(ours, fr, ratio, bool(in_class), floor, rep.c, rep.eps_Q, F, petz_residual)
