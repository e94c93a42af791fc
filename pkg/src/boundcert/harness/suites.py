"""Seeded verification suites and the JSON report they produce.

Each suite runs ``trials`` independent trials.  Trial ``i`` of suite ``s``
draws all its randomness from ``default_rng(trial_seed(seed, s, i))``, so any
failing trial can be replayed alone with :func:`run_trial`.  Every check is
an inequality ``lhs <= rhs + tol``; its slack is ``rhs - lhs`` and the check
passes while ``slack >= -tol``.
"""

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .. import entropy as ent
from ..activation import (activation, block_decompose, bkm_coercivity, local_constants, regularize,
                          svd_blocks)
from ..certification import (certified_curve, check_conditions, invert_modulus,
                             low_temperature_window, max_verified_alpha, modulus)
from ..davies import (detailed_balance_rates, dynamical_bounds, evolve, stationarity_residual)
from ..errors import ValidationError
from ..linalg import random_density, trace_distance
from ..separation import (class_threshold, cps_decompose, fr_compare, multi_sector_bound,
                          petz_recovery, sequential_pinch_chain)
from . import sampling
from .oracles import log_mean_hp, relative_entropy_hp
from .scenario import encode_matrix, prepare

SUITES = ("entropy", "activation", "davies", "certification", "separation")
SUITE_IDS = {name: i for i, name in enumerate(SUITES)}
MAX_FAILURE_SEEDS = 20


def trial_seed(seed, suite, trial):
    ss = np.random.SeedSequence([int(seed), SUITE_IDS[suite], int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class CheckStats:
    tolerance: float
    trials: int = 0
    passes: int = 0
    worst_slack: float = math.inf
    failure_seeds: list = field(default_factory=list)

    @property
    def ok(self):
        return self.passes == self.trials


class Tally:
    """Collects check outcomes within one trial."""

    def __init__(self, inject=frozenset()):
        self.inject = frozenset(inject)
        self.results = {}
        self.instance = {}

    def le(self, name, lhs, rhs, tol):
        """Record ``lhs <= rhs + tol`` (the worst value over repeated calls wins)."""
        slack = float(rhs) - float(lhs)
        if math.isnan(slack):
            slack = -math.inf
        prev = self.results.get(name)
        if prev is None or slack < prev[0]:
            self.results[name] = (slack, tol)

    def close(self, name, value, target, tol):
        self.le(name, abs(float(value) - float(target)), 0.0, tol)

    def true(self, name, flag):
        self.le(name, 0.0 if flag else 1.0, 0.0, 0.0)


# ------------------------------------------------------------------ suites

def _entropy_trial(rng, T):
    d = int(rng.integers(3, 9))
    rank = int(rng.integers(1, d + 1))
    rho = random_density(d, rank, rng)
    split = sampling.random_split(d, rng)
    sigma = sampling.random_block_sigma(split, rng)
    T.instance.update(rho=rho, sigma=sigma, basis=split.basis, r=split.r)
    cps = cps_decompose(rho, sigma, split, a0=0.1)
    T.le("pythagorean_identity", cps.residual, 0.0, 1e-9)

    full = random_density(d, d, rng)
    Ps = sampling.random_pinching(d, rng)
    spec = ent.PinchingSpec(tuple(Ps))
    T.le("data_processing_pinching",
         ent.relative_entropy(ent.pinch(rho, spec), ent.pinch(full, spec)),
         ent.relative_entropy(rho, full), 1e-9)
    T.le("pinsker", 0.0, ent.pinsker_gap(rho, full), 1e-9)

    a, c = rng.uniform(1e-3, 1.0, 2)
    s = math.sqrt(a * c * rng.uniform(0.0, 1.0))
    D0 = np.diag([a, c])
    Y = np.array([[0.0, s], [s, 0.0]])
    I = ent.bkm_integral(D0, Y)
    T.instance.update(a=a, c=c, s=s)
    T.close("bkm_integral_identity", I, ent.relative_entropy(D0 + Y, D0), 1e-8)
    T.le("bkm_2x2_lower_bound", s * s * ent.log_mean_L(a, c), I, 1e-9)

    p = rng.uniform(0.1, 2.0)
    d1, d2 = np.sort(rng.uniform(0, p, 2))
    T.le("log_mean_monotone", ent.log_mean_L((p + d1) / 2, (p - d1) / 2),
         ent.log_mean_L((p + d2) / 2, (p - d2) / 2), 1e-12)
    x = rng.uniform(1e-3, 1.0)
    y = x * (1 + rng.choice([0.0, 1e-12, 1e-9, 1e-6, 1e-2, 0.5]) * rng.uniform(-1, 1))
    ref = log_mean_hp(x, y)
    T.le("log_mean_vs_hp_oracle", abs(ent.log_mean_L(x, y) - ref) / ref, 0.0, 1e-12)

    if d <= 4:
        sig_f = random_density(d, d, rng)
        T.close("relative_entropy_vs_hp_oracle", ent.relative_entropy(rho, sig_f),
                relative_entropy_hp(rho, sig_f), 1e-9)


def _activation_trial(rng, T):
    d = int(rng.integers(3, 9))
    split = sampling.random_split(d, rng)
    sigma = sampling.random_support_sigma(split, rng)
    reg = regularize(sigma, float(rng.uniform(0.01, 0.2)))
    a0 = local_constants(reg, split).a0
    frac = rng.choice([1.0, 0.1, 1e-3])
    rho = sampling.sample_regime_state(split, a0, frac * a0 / 2, rng,
                                       cross_rank=int(rng.integers(1, 4)))
    T.instance.update(rho=rho, sigma=sigma, basis=split.basis, r=split.r, epsilon=reg.epsilon)
    rep = activation(rho, split)
    prho = ent.pinch(rho, split.pinching())
    d_full = ent.relative_entropy(rho, reg.sigma_eps)
    d_coh = ent.relative_entropy(rho, prho)
    bound = rep.c * math.log(a0 / rep.eps_Q)
    blocks = svd_blocks(rho, split)
    block_sum = sum(ent.relative_entropy(b.M, b.D) for b in blocks)
    log_sum = sum(b.s ** 2 * ent.log_mean_L(b.a, b.c) for b in blocks)
    T.le("coherence_below_total", d_coh, d_full, 1e-9)
    T.le("coherence_above_svd_blocks", block_sum, d_coh, 1e-9)
    T.le("svd_blocks_above_log_mean", log_sum, block_sum, 1e-9)
    T.le("log_mean_above_coercivity", bound, log_sum, 1e-9)
    T.le("coercivity_bound", bound, d_full, 1e-9)
    T.le("coercivity_activation_form", 2 * rep.c * math.log(math.sqrt(a0) / rep.A_func), d_full, 1e-9)
    T.true("coercivity_regime_flag", bkm_coercivity(rho, split, a0).regime_ok)
    T.le("svd_block_psd", max((b.s ** 2 - b.a * b.c for b in blocks), default=0.0), 0.0, 1e-12)

    # off-diagonal weight versus kernel weight (Schur complement)
    free = random_density(d, int(rng.integers(1, d + 1)), rng)
    blk = block_decompose(free, split)
    fr = activation(free, split)
    T.le("coherence_schur_bound", fr.c, np.linalg.norm(blk.A, 2) * fr.eps_Q, 1e-12)
    T.le("kernel_weight_vs_activation", fr.eps_Q, fr.A_func ** 2, 1e-12)

    # proximity implies the support-block floor
    lc = local_constants(reg, split)
    tau = random_density(d, d, rng)
    dist = trace_distance(tau, reg.sigma_eps)
    t = min(1.0, lc.delta0 / dist) * rng.uniform(0.0, 1.0)
    near = (1 - t) * reg.sigma_eps + t * tau
    lam = float(np.linalg.eigvalsh(block_decompose(near, split).A)[0])
    T.le("local_invertibility", lc.a0, lam, 1e-10)


def _davies_trial(rng, T):
    sc = sampling.random_secular_scenario(rng)
    T.instance["scenario"] = sc
    setup = prepare(sc)
    T.true("secular_decoupling", setup.secular.secular_ok)
    traj = evolve(setup.model, setup.rho0, setup.times, split=setup.split)
    bounds = dynamical_bounds(setup.rates, setup.secular, setup.c0, setup.eps0, setup.times)
    T.le("coherence_floor", float(np.max(bounds.c_lower - traj.c)), 0.0, 1e-8)
    upper = bounds.epsQ_upper
    if "flip_eps_bar" in T.inject:
        ek = np.exp(-setup.rates.k * setup.times)
        upper = ek * setup.eps0 - setup.rates.eps_bar * (1 - ek)
    T.le("kernel_weight_ceiling", float(np.max(traj.eps_Q - upper)), 0.0, 1e-8)
    T.le("trace_preservation", float(np.max(np.abs([np.trace(s).real - 1 for s in traj.states]))),
         0.0, 1e-9)
    T.le("gibbs_stationarity", stationarity_residual(setup.model, setup.model.gibbs_state()), 0.0, 1e-9)
    g = [fn for fn in setup.model.rate_fns]
    w = float(rng.uniform(0.1, 3.0))
    T.close("kms_condition", g[0](-w), math.exp(-setup.model.beta * w) * g[0](w), 1e-12)


def _certification_trial(rng, T):
    # end-to-end certification checks on the KMS qubit family, where (LC) can be met.
    beta = float(rng.uniform(3.0, 6.0))
    eps_bar = 1 / (1 + math.exp(beta))
    theta = float(rng.uniform(0.3, 0.7))
    eps0 = float(eps_bar * rng.uniform(0.5, 2.0))
    sc = sampling.kms_qubit_scenario(beta, eps0=eps0, theta=theta, epsilon=2 * eps_bar, alpha=1.0)
    setup = prepare(sc)
    traj = evolve(setup.model, setup.rho0, setup.times, reference=setup.reg.sigma_eps, split=setup.split)
    alpha = 0.9 * max_verified_alpha(setup.times, traj.rel_entropy, setup.params.D0)
    if not alpha > 0:
        alpha = 1e-3
    sc.alpha = alpha
    T.instance["scenario"] = sc
    setup = prepare(sc)
    flags = check_conditions(traj, setup.params, setup.rates, setup.secular)
    A_theta = setup.params.A_theta
    R2 = traj.R2
    T.le("cd_implies_ratio", float(np.max(np.where(flags.cd_ok, theta ** 2 - R2, -np.inf))), 0.0, 1e-9)
    regime = flags.lc_ok & flags.cd_ok & flags.lc_static_ok
    for i in np.flatnonzero(regime):
        A = traj.A[i]
        floor = 2 * theta ** 2 * modulus(A, setup.params.C)
        T.le("entropy_modulus_floor", floor, traj.rel_entropy[i], 1e-9)
    curve = certified_curve(setup.params, setup.times)
    on = regime & curve.on_branch
    T.le("premise_entropy_decay", float(np.max(traj.rel_entropy - curve.entropy_bound)), 0.0, 1e-12)
    if np.any(on):
        T.le("certified_activation", float(np.max(traj.A[on] - curve.a_cert[on])), 0.0, 1e-9)
    after = setup.times >= curve.t0
    if np.any(after):
        T.le("certified_envelope", float(np.max(curve.a_cert[after] - curve.envelope[after])), 0.0, 1e-9)
    w = setup.window
    if w is not None and not w.empty:
        T.le("cd_on_window", float(np.max(np.where(setup.times <= w.t_star, flags.cd_lhs - flags.cd_rhs,
                                                   -np.inf))), 0.0, 1e-12)
        db = detailed_balance_rates(setup.model, setup.rates)
        low = low_temperature_window(beta, db.delta_E, db.eta_up, db.eta, setup.secular.gamma_max,
                                     A_theta, setup.c0, setup.eps0)
        if not low.empty:
            T.le("low_temperature_window", low.t_star, w.t_star, 1e-12)
        T.le("detailed_balance_rate", setup.rates.mu, math.exp(-beta * db.delta_E) * db.eta_up, 1e-12)

    # classical limit: no cross coherence is ever created
    sc_cl = sampling.random_secular_scenario(rng)
    sc_cl.initial_state = {"kind": "block_diagonal", "seed": int(rng.integers(2**31)),
                           "eps0": float(rng.uniform(0.05, 0.5))}
    st = prepare(sc_cl)
    tr = evolve(st.model, st.rho0, st.times, reference=st.reg.sigma_eps, split=st.split)
    leak = max(np.linalg.norm(st.split.P @ s @ st.split.Q) for s in tr.states)
    T.le("classical_no_coherence", leak, 0.0, 1e-10)
    gaps = [ent.pinsker_gap(s, st.reg.sigma_eps) for s in tr.states]
    T.le("classical_pinsker", 0.0, min(gaps), 1e-9)
    T.true("classical_cd_false", not np.any(check_conditions(tr, st.params, st.rates, st.secular).cd_ok))

    C = float(rng.uniform(0.1, 2.0))
    x = float(rng.uniform(0, C / math.sqrt(math.e)))
    T.close("modulus_round_trip", invert_modulus(C, modulus(x, C)), x, 1e-10)


def _separation_trial(rng, T):
    K = int(rng.integers(3, 5))
    sizes = sampling.random_sector_sizes(K, 8, rng)
    d = sum(sizes)
    rho = random_density(d, int(rng.integers(1, d + 1)), rng)
    Ps = sampling.sector_projectors(sizes, sampling.random_unitary(d, rng))
    chain = sequential_pinch_chain(rho, Ps)
    T.instance.update(rho=rho, sizes=sizes)
    T.le("block_preservation", max(chain.identity_residual), 0.0, 1e-11)
    T.le("block_weight_identity", max(abs(x - y) for x, y in zip(chain.C, chain.C_direct)), 0.0, 1e-10)

    hrho, hPs = sampling.geometric_hierarchy_state(sizes, rng)
    hsig = sampling.random_sector_sigma(sizes, rng)
    hchain = sequential_pinch_chain(hrho, hPs)
    msb = multi_sector_bound(hrho, hsig, hchain)
    T.true("hierarchy_conditions", msb.applicable)
    if msb.applicable:
        T.le("multi_sector_bound", msb.bound, msb.d_total, 1e-9)
    T.le("telescoping", msb.telescoping_residual, 0.0, 1e-9)

    split = sampling.random_split(d, rng, r=int(rng.integers(1, 3)))
    sigma = sampling.random_block_sigma(split, rng)
    X = random_density(d, d, rng)
    prho = ent.pinch(X, split.pinching())
    T.le("petz_fixes_dephased", np.linalg.norm(petz_recovery(sigma, split, prho) - prho), 0.0, 1e-10)
    R = petz_recovery(sigma, split, X)
    T.close("petz_trace", np.trace(R).real, 1.0, 1e-11)
    T.le("petz_fixes_reference", np.linalg.norm(petz_recovery(sigma, split, sigma) - sigma), 0.0, 1e-10)

    cps = cps_decompose(X, sigma, split, a0=0.1)
    T.le("cps_identity", cps.residual, 0.0, 1e-9)

    a0 = float(rng.uniform(0.3, 0.9 / split.r))
    eps_max = class_threshold(a0)
    near = sampling.sample_regime_state(split, a0, eps_max, rng)
    rep = fr_compare(near, sigma, split, a0)
    T.true("near_boundary_class", rep.in_class)
    T.le("fr_superiority", rep.fr_remainder, rep.ours, 1e-9)
    T.le("fr_ratio_floor", rep.ratio_floor, rep.ratio, 1e-9)
    T.le("fidelity_lower_bound", 1 - rep.c / a0, rep.fidelity_pinched, 1e-12)
    T.le("coherence_below_kernel_weight", rep.c, rep.eps_Q, 1e-12)


TRIALS = {"entropy": _entropy_trial, "activation": _activation_trial, "davies": _davies_trial,
          "certification": _certification_trial, "separation": _separation_trial}


# ------------------------------------------------------------------ driver

def run_trial(suite, tseed, inject=frozenset()):
    """Run one trial from its derived seed; returns the ``Tally``."""
    T = Tally(inject)
    TRIALS[suite](np.random.default_rng(tseed), T)
    return T


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _dump_instance(dump_dir, suite, trial, tseed, failed, instance):
    os.makedirs(dump_dir, exist_ok=True)
    out = {"suite": suite, "trial": trial, "trial_seed": tseed, "failed": sorted(failed)}
    sc = instance.get("scenario")
    if sc is not None:
        out["scenario"] = sc.to_dict()
    for key, val in instance.items():
        if key == "scenario":
            continue
        if isinstance(val, np.ndarray) and val.ndim == 2:
            out[key] = encode_matrix(val)
        elif isinstance(val, (np.floating, np.integer)):
            out[key] = val.item()
        else:
            out[key] = val
    path = os.path.join(dump_dir, f"{suite}-trial{trial}.json")
    with open(path, "w") as fh:
        json.dump(out, fh, indent=1, sort_keys=True)
    return path


def run_suite(suite, trials, seed, inject=frozenset(), dump_dir=None):
    """Run ``trials`` seeded trials of ``suite`` (or of every suite for ``"all"``).

    Returns a JSON-ready dict: per suite and per check the trial count,
    passes, worst slack, tolerance and the derived seeds of failing trials,
    plus an overall ``pass`` flag.
    """
    names = SUITES if suite == "all" else (suite,)
    if any(n not in TRIALS for n in names):
        raise ValidationError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    report = {"seed": int(seed), "trials": int(trials), "suites": {}}
    overall = True
    for name in names:
        checks = {}
        passes = 0
        failing = []
        for i in range(trials):
            tseed = trial_seed(seed, name, i)
            T = run_trial(name, tseed, inject)
            bad = []
            for check, (slack, tol) in T.results.items():
                st = checks.setdefault(check, CheckStats(tol))
                st.trials += 1
                st.worst_slack = min(st.worst_slack, slack)
                if slack >= -tol:
                    st.passes += 1
                else:
                    bad.append(check)
                    if len(st.failure_seeds) < MAX_FAILURE_SEEDS:
                        st.failure_seeds.append(tseed)
            if bad:
                if len(failing) < MAX_FAILURE_SEEDS:
                    failing.append(tseed)
                if dump_dir is not None:
                    _dump_instance(dump_dir, name, i, tseed, bad, T.instance)
            else:
                passes += 1
        ok = all(st.ok for st in checks.values())
        overall = overall and ok
        report["suites"][name] = {
            "trials": trials,
            "passes": passes,
            "pass": ok,
            "failure_seeds": failing,
            "checks": {
                k: {"trials": st.trials, "passes": st.passes, "worst_slack": _json_safe(st.worst_slack),
                    "tolerance": st.tolerance, "failure_seeds": st.failure_seeds, "pass": st.ok}
                for k, st in sorted(checks.items())
            },
        }
    report["pass"] = overall
    return report


def failed_checks(report):
    return sorted(f"{s}.{c}" for s, body in report["suites"].items()
                  for c, st in body["checks"].items() if not st["pass"])


def report_json(report):
    return json.dumps(report, indent=1, sort_keys=True) + "\n"
