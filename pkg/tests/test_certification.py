import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from boundcert.activation import activation, local_constants, regularize
from boundcert.certification import (CertParams, branch_top, check_conditions, certified_curve,
                                     dominance_window, fit_alpha, invert_modulus,
                                     low_temperature_window, max_verified_alpha, modulus,
                                     modulus_lower, pure_coherent_state)
from boundcert.davies import detailed_balance_rates, evolve
from boundcert.entropy import relative_entropy
from boundcert.errors import BranchError, DomainError, ValidationError
from boundcert.harness.sampling import (kms_qubit_scenario, random_split, random_support_sigma,
                                        sample_regime_state)
from boundcert.harness.scenario import prepare
from boundcert.linalg import eig_hermitian


def params(**kw):
    base = dict(alpha=0.5, D0=0.1, theta=0.5, a0=0.4, delta0=0.1, epsilon=0.05,
                lambda_star=0.025, d_Q=1)
    base.update(kw)
    return CertParams(**base)


def test_cert_params():
    p = params(theta=0.5, D0=0.2)
    assert abs(p.A_theta - 3.0) <= 1e-12
    assert np.isclose(p.K, 0.4)
    assert np.isclose(p.C, math.sqrt(0.4))
    assert p.lc_static_ok
    assert not params(delta0=0.2).lc_static_ok
    with pytest.raises(ValidationError):
        params(theta=1.0)
    with pytest.raises(ValidationError):
        params(alpha=0.0)


def qubit_setup(eps0=0.1, initial=None):
    sc = kms_qubit_scenario(math.log(3), eps0=eps0, theta=0.5, epsilon=0.5, alpha=0.1)
    if initial is not None:
        sc.initial_state = initial
    return prepare(sc)


def test_check_conditions_matches_hand_evaluation():
    s = qubit_setup(0.1)
    traj = evolve(s.model, s.rho0, s.times, reference=s.reg.sigma_eps)
    flags = check_conditions(traj, s.params, s.rates, s.secular)
    # sigma_eps is the Gibbs state diag(3/4, 1/4); k = 1, Gamma = 1/2, eps_bar = 1/4
    assert np.allclose(s.reg.sigma_eps, np.diag([0.75, 0.25]), atol=1e-15)
    t = s.times
    lhs = 0.1 * np.exp(-t) + 0.25 * (1 - np.exp(-t))
    rhs = 3.0 * np.exp(-t) * 0.09
    assert np.array_equal(flags.cd_ok, lhs <= rhs)
    td = np.array([np.abs(np.linalg.eigvalsh(r - np.diag([0.75, 0.25]))).sum() for r in traj.states])
    assert np.array_equal(flags.lc_ok, td <= s.params.delta0)
    assert flags.cd_ok[0] and not flags.cd_ok[-1]


def test_check_conditions_without_coherence():
    s = qubit_setup(initial={"kind": "block_diagonal", "eps0": 0.2, "seed": 0})
    traj = evolve(s.model, s.rho0, s.times, reference=s.reg.sigma_eps)
    flags = check_conditions(traj, s.params, s.rates, s.secular)
    assert not np.any(flags.cd_ok)
    with pytest.raises(ValidationError):
        check_conditions(evolve(s.model, s.rho0, s.times), s.params, s.rates, s.secular)


def test_check_conditions_stationary_kernel_weight():
    # eps0 = eps_bar keeps the left side constant
    s = qubit_setup(0.25)
    traj = evolve(s.model, s.rho0, s.times, reference=s.reg.sigma_eps)
    flags = check_conditions(traj, s.params, s.rates, s.secular)
    assert np.allclose(flags.cd_lhs, 0.25, atol=1e-15)
    c0 = 0.75 * 0.25
    assert np.array_equal(flags.cd_ok, 0.25 <= 3.0 * np.exp(-s.times) * c0)


def test_modulus_lower_values():
    a0 = 0.3
    A = math.sqrt(a0) / math.e
    assert np.isclose(modulus_lower(A, 1.0, a0), 2 * a0 * math.exp(-2), atol=1e-15)
    assert modulus_lower(0.0, 0.5, a0) == 0.0
    with pytest.raises(DomainError):
        modulus_lower(math.sqrt(a0), 0.5, a0)


def test_invert_modulus_examples():
    target = modulus(0.1, 1.0)
    assert np.isclose(target, 0.01 * math.log(10), atol=1e-17)
    assert abs(invert_modulus(1.0, target) - 0.1) <= 1e-10
    assert invert_modulus(1.0, 0.0) == 0.0
    x_top, f_top = branch_top(2.0)
    assert np.isclose(f_top, 4 / (2 * math.e))
    assert np.isclose(invert_modulus(2.0, f_top), 2 / math.sqrt(math.e), atol=1e-12)
    with pytest.raises(BranchError):
        invert_modulus(1.0, 1 / (2 * math.e) * 1.001)


@given(st.floats(0.05, 3.0), st.floats(1e-6, 0.999))
def test_property_modulus_round_trip(C, frac):
    x_top, _ = branch_top(C)
    x = frac * x_top
    y = invert_modulus(C, modulus(x, C))
    assert abs(y - x) <= 1e-10 * x_top


def test_certified_curve_zero_entropy():
    curve = certified_curve(params(D0=0.0), np.linspace(0, 5, 11))
    assert np.all(curve.a_cert == 0.0)
    assert np.all(curve.on_branch)


def test_certified_curve_monotone_and_envelope():
    p = params(D0=0.3, a0=0.45, alpha=0.7)
    times = np.linspace(0, 8, 400)
    curve = certified_curve(p, times)
    a = curve.a_cert[curve.on_branch]
    assert np.all(np.diff(a) <= 1e-15)
    assert not curve.on_branch[0]
    tail = times >= curve.t0
    assert np.all(curve.a_cert[tail] <= curve.envelope[tail] + 1e-12)
    scaled = curve.a_cert[tail] * np.sqrt(p.alpha * times[tail]) * np.exp(p.alpha * times[tail])
    assert np.all(scaled <= curve.c_prime + 1e-12)
    # the envelope's validity condition at t0
    K = p.D0 / (2 * p.theta**2)
    assert math.log(p.C * math.exp(p.alpha * curve.t0) / math.sqrt(2 * K)) >= p.alpha * curve.t0 / 2


def test_dominance_window_examples():
    w = dominance_window(0.5, 1.0, 1.0, 0.25, 0.05, 0.05)
    assert np.isclose(w.t_star, math.log(4), atol=1e-15)
    w = dominance_window(0.5, 1.0, 1.0, 0.25, 0.2, 0.05)
    assert w.empty and "eps_bar" in w.failed
    w = dominance_window(0.6, 1.0, 1.0, 0.25, 0.05, 0.05)
    assert w.empty and "gamma_max" in w.failed
    assert dominance_window(0.5, 1.0, 1.0, 0.25, 0.05, 0.0).t_star == math.inf


def test_low_temperature_window_example():
    # beta dE = 3, eta_up / eta = 1, margin 0.5, Gamma_max = 0.5
    w = low_temperature_window(3.0, 1.0, 1.0, 1.0, 0.5, 1.0, 0.6, 0.1)
    assert np.isclose(w.t_star, 3 - math.log(2), atol=1e-12)
    assert np.isclose(w.eps_bar_upper, math.exp(-3), atol=1e-15)
    assert low_temperature_window(3.0, 1.0, 1.0, 1.0, 0.5, 1.0, 0.1, 0.1).empty


def test_low_temperature_window_below_dominance_window():
    checked = 0
    for beta in np.linspace(1.0, 8.0, 15):
        s = prepare(kms_qubit_scenario(beta, eps0=0.01, epsilon=0.02))
        db = detailed_balance_rates(s.model, s.rates)
        assert s.rates.mu <= math.exp(-beta * db.delta_E) * db.eta_up * (1 + 1e-12)
        low = low_temperature_window(beta, db.delta_E, db.eta_up, db.eta, s.secular.gamma_max,
                                     s.params.A_theta, s.c0, s.eps0)
        dom = dominance_window(s.secular.gamma_max, s.rates.k, s.params.A_theta, s.c0, s.eps0,
                               s.rates.eps_bar)
        if low.empty or dom.empty:
            continue
        checked += 1
        assert low.t_star <= dom.t_star + 1e-12
    assert checked >= 8


def test_cd_holds_inside_window():
    s = prepare(kms_qubit_scenario(math.log(99)))
    assert not s.window.empty
    times = np.linspace(0, s.window.t_star, 100)
    traj = evolve(s.model, s.rho0, times, reference=s.reg.sigma_eps)
    assert np.all(check_conditions(traj, s.params, s.rates, s.secular).cd_ok)


def test_pure_coherent_state():
    rho = pure_coherent_state(0.25, [1, 0, 0], [0, 0, 1])
    assert abs(np.trace(rho @ rho).real - 1) <= 1e-12
    from boundcert.activation import split_from_levels
    rep = activation(rho, split_from_levels([0, 1], 3))
    assert np.isclose(rep.c, 3 / 16, atol=1e-15)
    for eps0 in np.linspace(0.01, 0.5, 50):
        rep = activation(pure_coherent_state(eps0, [1, 0], [0, 1]), split_from_levels([0], 2))
        assert np.isclose(rep.R2, (1 - eps0) / (2 - eps0), atol=1e-14)
        assert rep.R2 >= 1 / 3 - 1e-15
    with pytest.raises(ValidationError):
        pure_coherent_state(1.0, [1, 0], [0, 1])
    with pytest.raises(ValidationError):
        pure_coherent_state(0.2, [1, 0], [1, 1])


def test_entropy_dominates_modulus_on_regime_states(rng):
    tested = 0
    for _ in range(300):
        d = int(rng.integers(2, 5))
        split = random_split(d, rng)
        reg = regularize(random_support_sigma(split, rng), rng.uniform(0.01, 0.2))
        a0 = local_constants(reg, split).a0
        if a0 < 1e-3:
            continue
        rho = sample_regime_state(split, a0, a0 / 2, rng)
        rep = activation(rho, split)
        theta = math.sqrt(rep.R2) * rng.uniform(0.5, 1.0)
        if not 0 < theta < 1 or rep.A_func >= math.sqrt(a0):
            continue
        tested += 1
        lam = eig_hermitian(split.basis_P.conj().T @ rho @ split.basis_P).eigenvalues[0]
        assert lam >= a0
        assert relative_entropy(rho, reg.sigma_eps) >= modulus_lower(rep.A_func, theta, a0) - 1e-9
    assert tested >= 100


def test_alpha_helpers():
    t = np.linspace(0, 4, 50)
    D = 0.3 * np.exp(-2 * 0.7 * t)
    assert np.isclose(fit_alpha(t, D), 0.7, atol=1e-12)
    assert np.isclose(max_verified_alpha(t, D, 0.3), 0.7, atol=1e-12)
    assert math.isnan(fit_alpha([0.0], [1.0]))
