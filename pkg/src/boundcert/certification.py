"""Turning an entropy-decay premise into a certified bound on the activation.

The pipeline: check the local (LC) and coherence-dominance (CD) conditions
along a trajectory, invert the modulus ``x^2 log(C/x)`` on its local branch,
and compare the certified curve with the ``exp(-alpha t)/sqrt(alpha t)``
envelope.  Window helpers give sufficient conditions for CD in closed form.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .davies import RateParams, SecularTable, Trajectory
from .errors import BranchError, DomainError, ValidationError

K_REL_TOL = 1e-9


@dataclass(frozen=True)
class CertParams:
    alpha: float
    D0: float
    theta: float
    a0: float
    delta0: float
    epsilon: float
    lambda_star: float
    d_Q: int

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValidationError("alpha must be positive")
        if not 0 < self.theta < 1:
            raise ValidationError("theta must lie in (0, 1)")
        if self.D0 < 0:
            raise ValidationError("D0 must be nonnegative")

    @property
    def A_theta(self):
        return 1.0 / self.theta**2 - 1.0

    @property
    def K(self):
        return self.D0 / (2.0 * self.theta**2)

    @property
    def C(self):
        return math.sqrt(self.a0)

    @property
    def lc_static_ok(self):
        return self.lambda_star * self.d_Q + self.delta0 <= self.a0 / 2


def lc_delta0(a0, lambda_star, d_Q):
    """Largest ``delta0`` (capped at ``a0``) compatible with ``lambda_star d_Q + delta0 <= a0/2``.

    Returns a nonpositive number when no admissible choice exists.
    """
    return min(a0, a0 / 2 - lambda_star * d_Q)


@dataclass(frozen=True)
class ConditionFlags:
    lc_ok: np.ndarray
    cd_ok: np.ndarray
    lc_static_ok: bool
    cd_lhs: np.ndarray
    cd_rhs: np.ndarray


def cd_sides(rates: RateParams, secular: SecularTable, A_theta, c0, eps0, t):
    t = np.asarray(t, dtype=float)
    ek = np.exp(-rates.k * t)
    lhs = ek * eps0 + rates.eps_bar * (1.0 - ek)
    rhs = A_theta * np.exp(-2.0 * secular.gamma_max * t) * c0
    return lhs, rhs


def check_conditions(traj: Trajectory, params: CertParams, rates: RateParams,
                     secular: SecularTable) -> ConditionFlags:
    """Evaluate (LC) and (CD) at every time of ``traj``.

    ``traj`` must carry trace distances to the same ``sigma_eps`` that
    ``params`` was built from.  ``c0`` and ``eps0`` are read off its first row.
    """
    if np.any(np.isnan(traj.trace_dist)):
        raise ValidationError("trajectory has no reference state; evolve with reference=sigma_eps")
    c0 = traj.reports[0].c
    eps0 = traj.reports[0].eps_Q
    lhs, rhs = cd_sides(rates, secular, params.A_theta, c0, eps0, traj.times)
    cd = (lhs <= rhs) & (c0 > 0)
    lc = traj.trace_dist <= params.delta0
    return ConditionFlags(lc, cd, bool(params.lc_static_ok), lhs, rhs)


def modulus(x, C):
    """``x^2 log(C/x)`` with the continuous extension 0 at x = 0."""
    if x == 0:
        return 0.0
    return x * x * math.log(C / x)


def modulus_lower(A_func, theta, a0):
    """Entropy floor ``2 theta^2 A^2 log(sqrt(a0)/A)`` for ``0 <= A < sqrt(a0)``."""
    C = math.sqrt(a0)
    if not 0 <= A_func < C:
        raise DomainError(f"modulus is only asserted for 0 <= A < sqrt(a0) = {C}, got {A_func}")
    return 2.0 * theta**2 * modulus(A_func, C)


def branch_top(C):
    """End of the increasing branch, ``C / sqrt(e)``, and the modulus value there."""
    x = C / math.sqrt(math.e)
    return x, C * C / (2.0 * math.e)


def invert_modulus(C, target, rtol=1e-12):
    """Unique ``x`` in ``[0, C/sqrt(e)]`` with ``x^2 log(C/x) = target``.

    Raises
    ------
    BranchError
        If ``target`` exceeds ``C^2 / (2e)``, the top of the local branch.
    """
    if not C > 0:
        raise DomainError("C must be positive")
    if target < 0:
        raise DomainError("target must be nonnegative")
    x_top, f_top = branch_top(C)
    if target > f_top * (1 + 1e-14):
        raise BranchError(f"target {target} is out of the local branch (max {f_top})")
    if target == 0:
        return 0.0
    if target >= f_top:
        return x_top
    # shrink the lower end until it brackets the root
    lo = min(x_top, math.sqrt(target))
    while modulus(lo, C) > target:
        lo *= 0.5
    return optimize.brentq(lambda x: modulus(x, C) - target, lo, x_top,
                           xtol=1e-300, rtol=max(rtol, 4 * np.finfo(float).eps), maxiter=500)


@dataclass(frozen=True)
class CertCurve:
    times: np.ndarray
    entropy_bound: np.ndarray
    a_cert: np.ndarray
    on_branch: np.ndarray
    envelope: np.ndarray
    K: float
    t0: float
    c_prime: float

    @property
    def valid(self):
        return bool(np.any(self.on_branch))


def certified_curve(params: CertParams, times) -> CertCurve:
    """Certified activation ``a_cert(t)`` implied by ``D(rho_t) <= D0 exp(-2 alpha t)``.

    At each grid time the modulus is inverted with ``C = sqrt(a0)`` and target
    ``D0 exp(-2 alpha t) / (2 theta^2)``.  Times whose target lies above the
    local branch are left uncertified (``a_cert`` is NaN, ``on_branch`` False).

    ``t0`` is the first positive on-branch grid time with
    ``log(C exp(alpha t) / sqrt(2K)) >= alpha t / 2``; ``c_prime`` is the
    largest ``a_cert(t) sqrt(alpha t) exp(alpha t)`` over grid times from
    ``t0`` on.  Both are NaN when no grid time qualifies.
    """
    times = np.asarray(times, dtype=float)
    alpha, K, C = params.alpha, params.K, params.C
    bound = params.D0 * np.exp(-2 * alpha * times)
    targets = bound / (2 * params.theta**2)
    _, f_top = branch_top(C)
    on = targets <= f_top
    a_cert = np.full(times.shape, np.nan)
    for i in np.flatnonzero(on):
        a_cert[i] = invert_modulus(C, targets[i])
    with np.errstate(divide="ignore", invalid="ignore"):
        envelope = np.sqrt(2 * K / (alpha * times)) * np.exp(-alpha * times)
    if K > 0:
        cond = math.log(C / math.sqrt(2 * K)) + alpha * times >= alpha * times / 2
    else:
        cond = np.ones(times.shape, dtype=bool)
    ok = cond & on & (times > 0)
    if np.any(ok):
        i0 = int(np.flatnonzero(ok)[0])
        t0 = float(times[i0])
        tail = slice(i0, None)
        scaled = a_cert[tail] * np.sqrt(alpha * times[tail]) * np.exp(alpha * times[tail])
        c_prime = float(np.nanmax(scaled))
    else:
        t0 = c_prime = math.nan
    return CertCurve(times, bound, a_cert, on, envelope, float(K), t0, c_prime)


@dataclass(frozen=True)
class WindowResult:
    """Closed-form window end, or the first failed hypothesis when empty."""

    t_star: Optional[float]
    failed: Optional[str] = None
    eps_bar_upper: Optional[float] = None

    @property
    def empty(self):
        return self.t_star is None


def dominance_window(gamma_max, k, A_theta, c0, eps0, eps_bar) -> WindowResult:
    """``T* = log((A_theta c0 - eps0) / eps_bar) / (2 Gamma_max)``.

    Requires ``k >= 2 Gamma_max`` and ``A_theta c0 - eps0 > eps_bar``; the
    first violated hypothesis, in that order, is named in ``failed``.
    """
    if k < 2 * gamma_max * (1 - K_REL_TOL):
        return WindowResult(None, "k >= 2*gamma_max")
    margin = A_theta * c0 - eps0
    if not margin > eps_bar:
        return WindowResult(None, "A_theta*c0 - eps0 > eps_bar")
    if eps_bar == 0 or gamma_max == 0:
        return WindowResult(math.inf)
    return WindowResult(math.log(margin / eps_bar) / (2 * gamma_max))


def low_temperature_window(beta, delta_E, eta_up, eta, gamma_max, A_theta, c0, eps0) -> WindowResult:
    """Lower bound on ``T*`` from detailed balance at inverse temperature ``beta``.

    ``T* >= (beta dE - log((eta_up/eta) / (A_theta c0 - eps0))) / (2 Gamma_max)``,
    valid when ``A_theta c0 - eps0 > (eta_up/eta) exp(-beta dE)``.  The
    returned ``eps_bar_upper`` is ``(eta_up/eta) exp(-beta dE)``.
    """
    margin = A_theta * c0 - eps0
    ratio = eta_up / eta if eta > 0 else math.inf
    eps_up = ratio * math.exp(-beta * delta_E)
    if not margin > 0:
        return WindowResult(None, "A_theta*c0 > eps0", eps_up)
    if not margin > eps_up:
        return WindowResult(None, "A_theta*c0 - eps0 > (eta_up/eta) exp(-beta dE)", eps_up)
    if gamma_max == 0:
        return WindowResult(math.inf, None, eps_up)
    t = (beta * delta_E - math.log(ratio / margin)) / (2 * gamma_max)
    return WindowResult(t, None, eps_up)


def pure_coherent_state(eps0, u_dir, v_dir):
    """``|psi><psi|`` with ``psi = sqrt(1 - eps0) u + sqrt(eps0) v``.

    ``u_dir`` and ``v_dir`` are normalized and must be orthogonal (they are
    meant to lie in PH and QH respectively).
    """
    if not 0 < eps0 < 1:
        raise ValidationError(f"eps0 must lie in (0, 1), got {eps0}")
    u = np.asarray(u_dir, dtype=complex)
    v = np.asarray(v_dir, dtype=complex)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    if abs(np.vdot(u, v)) > 1e-12:
        raise ValidationError("u_dir and v_dir must be orthogonal")
    psi = math.sqrt(1 - eps0) * u + math.sqrt(eps0) * v
    return np.outer(psi, psi.conj())


def fit_alpha(times, rel_entropy):
    """Least-squares decay rate from ``log D(t) ~ log D0 - 2 alpha t`` (diagnostics only)."""
    t = np.asarray(times, dtype=float)
    D = np.asarray(rel_entropy, dtype=float)
    keep = D > 0
    if keep.sum() < 2:
        return math.nan
    slope = np.polyfit(t[keep], np.log(D[keep]), 1)[0]
    return float(-slope / 2)


def max_verified_alpha(times, rel_entropy, D0):
    """Largest ``alpha`` with ``D(t) <= D0 exp(-2 alpha t)`` on every positive grid time."""
    t = np.asarray(times, dtype=float)
    D = np.asarray(rel_entropy, dtype=float)
    pos = t > 0
    if not np.any(pos):
        return math.inf
    with np.errstate(divide="ignore"):
        rates = -np.log(np.maximum(D[pos], 1e-300) / D0) / (2 * t[pos])
    return float(np.min(rates))
