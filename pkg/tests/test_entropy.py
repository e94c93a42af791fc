import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from boundcert.entropy import (PinchingSpec, bkm_form, bkm_integral, block_diagonal,
                               coherence_entropy, fidelity, log_mean_L, pinch, pinsker_gap,
                               relative_entropy, von_neumann_entropy)
from boundcert.errors import DomainError, ValidationError
from boundcert.harness.oracles import bkm_integral_hp, log_mean_hp, relative_entropy_hp
from boundcert.linalg import random_density, random_unitary, trace_distance

PLUS = np.full((2, 2), 0.5)


def two_block(d, r, U=None):
    U = np.eye(d) if U is None else U
    P = U[:, :r] @ U[:, :r].conj().T
    return PinchingSpec.two_block(P)


def test_relative_entropy_of_state_with_itself():
    rho = random_density(4, 4, 3)
    assert abs(relative_entropy(rho, rho)) <= 1e-12


def test_relative_entropy_pure_vs_maximally_mixed():
    assert np.isclose(relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2), math.log(2), atol=1e-14)


def test_relative_entropy_support_violation_is_infinite():
    assert relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf
    # rank-deficient sigma is fine when the support condition holds
    assert np.isclose(relative_entropy(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])), 0.0, atol=1e-14)


def test_relative_entropy_against_high_precision(rng):
    for _ in range(20):
        d = int(rng.integers(2, 5))
        rho = random_density(d, d, rng)
        sigma = random_density(d, d, rng)
        assert abs(relative_entropy(rho, sigma) - relative_entropy_hp(rho, sigma)) <= 1e-9


def test_relative_entropy_frozen_value():
    # closed form for commuting diagonals, checked at 40 digits
    rho = np.diag([0.7, 0.2, 0.1])
    sigma = np.diag([0.2, 0.3, 0.5])
    ref = 0.7 * math.log(3.5) + 0.2 * math.log(2 / 3) + 0.1 * math.log(0.2)
    assert np.isclose(relative_entropy(rho, sigma), ref, atol=1e-14)
    assert np.isclose(relative_entropy_hp(rho, sigma), ref, atol=1e-15)


def test_pinch_basic(rng):
    spec = two_block(4, 2, random_unitary(4, rng))
    rho = random_density(4, 4, rng)
    prho = pinch(rho, spec)
    P, Q = spec.projectors
    assert np.isclose(np.trace(prho).real, 1.0, atol=1e-13)
    assert np.allclose(P @ prho @ Q, 0, atol=1e-13)
    assert np.allclose(pinch(prho, spec), prho, atol=1e-13)
    assert spec.is_fixed(prho)
    assert not spec.is_fixed(rho)


def test_pinching_spec_validation():
    with pytest.raises(ValidationError):
        PinchingSpec((np.diag([1.0, 0.0]),))
    with pytest.raises(ValidationError):
        PinchingSpec((np.diag([1.0, 0.0]), np.diag([1.0, 1.0])))


def test_coherence_entropy_plus_state():
    spec = two_block(2, 1)
    assert np.isclose(coherence_entropy(PLUS, spec), math.log(2), atol=1e-13)
    assert np.isclose(coherence_entropy(np.diag([0.3, 0.7]), spec), 0.0, atol=1e-14)


def test_fidelity_basic():
    rho = random_density(3, 3, 5)
    assert np.isclose(fidelity(rho, rho), 1.0, atol=1e-12)
    assert np.isclose(fidelity(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 0.0, atol=1e-14)
    assert np.isclose(fidelity(PLUS, np.eye(2) / 2), math.sqrt(0.5), atol=1e-13)


def test_fidelity_with_dephased_qubit_closed_form():
    # F(rho, diag rho)^2 = 1 - 2 a c (1 - sqrt(1 - s^2 / (a c))) for unit-trace 2x2 rho
    for a, s in [(0.7, 0.3), (0.9, 0.05), (0.5, 0.5), (0.99, 0.0)]:
        c = 1 - a
        rho = np.array([[a, s], [s, c]])
        F2 = 1 - 2 * a * c * (1 - math.sqrt(1 - s * s / (a * c)))
        assert np.isclose(fidelity(rho, np.diag([a, c])), math.sqrt(F2), atol=1e-9)


def test_fidelity_is_additive_over_blocks(rng):
    X1, Y1 = 0.4 * random_density(2, 2, rng), 0.3 * random_density(2, 2, rng)
    X2, Y2 = 0.6 * random_density(3, 3, rng), 0.7 * random_density(3, 3, rng)
    lhs = fidelity(block_diagonal([X1, X2]), block_diagonal([Y1, Y2]))
    assert np.isclose(lhs, fidelity(X1, Y1) + fidelity(X2, Y2), atol=1e-12)


def test_log_mean_values():
    assert log_mean_L(2.0, 2.0) == 0.5
    assert np.isclose(log_mean_L(math.e, 1.0), 1 / (math.e - 1), atol=1e-15)
    assert np.isclose(log_mean_L(0.3, 0.7), log_mean_L(0.7, 0.3), atol=0)
    # just inside the series branch
    x = 1.0 + 5e-9
    assert np.isclose(log_mean_L(x, 1.0), log_mean_hp(x, 1.0), rtol=1e-15, atol=0)
    with pytest.raises(DomainError):
        log_mean_L(0.0, 1.0)
    with pytest.raises(DomainError):
        log_mean_L(1.0, -2.0)


def test_log_mean_matches_oracle_on_grid():
    xs = np.geomspace(1e-8, 10.0, 40)
    for x in xs:
        for y in xs[::3]:
            assert abs(log_mean_L(x, y) - log_mean_hp(x, y)) <= 1e-12 * log_mean_hp(x, y)


def test_log_mean_is_decreasing():
    xs = np.linspace(0.01, 5.0, 1000)
    for y in (0.1, 1.0, 2.0):
        vals = np.array([log_mean_L(x, y) for x in xs])
        assert np.all(np.diff(vals) <= 0)


def test_bkm_form_diagonal_base():
    M = np.diag([0.5, 0.25])
    Y = np.array([[0.0, 0.1], [0.1, 0.0]])
    assert np.isclose(bkm_form(M, Y), 2 * 0.01 * log_mean_L(0.5, 0.25), atol=1e-16)
    assert bkm_form(M, np.zeros((2, 2))) == 0.0
    Yd = np.diag([0.2, -0.1])
    assert np.isclose(bkm_form(M, Yd), 0.04 / 0.5 + 0.01 / 0.25, atol=1e-15)


def test_bkm_form_needs_positive_definite_base():
    with pytest.raises(DomainError):
        bkm_form(np.diag([1.0, 0.0]), np.eye(2))


def test_bkm_form_angular_formula(rng):
    for _ in range(200):
        a, c = rng.uniform(0.05, 1.0, 2)
        s = rng.uniform(0.0, 0.99) * math.sqrt(a * c)
        t = rng.uniform(0.0, 1.0)
        M = np.array([[a, t * s], [t * s, c]])
        Y = np.array([[0.0, s], [s, 0.0]])
        delta = math.sqrt((a - c) ** 2 + 4 * t * t * s * s)
        lp, lm = (a + c + delta) / 2, (a + c - delta) / 2
        if delta == 0:
            continue
        cos2, sin2 = (a - c) / delta, 2 * t * s / delta
        ref = s * s * sin2**2 * (1 / lp + 1 / lm) + 2 * s * s * cos2**2 * log_mean_hp(lp, lm)
        assert abs(bkm_form(M, Y) - ref) <= 1e-12 * max(1.0, ref)


def test_bkm_integral_identity():
    for a, c, s in [(0.6, 0.3, 0.2), (0.8, 0.01, 0.05), (0.5, 0.5, 0.49), (0.9, 1e-6, 9e-4)]:
        D0 = np.diag([a, c])
        Y = np.array([[0.0, s], [s, 0.0]])
        val = bkm_integral(D0, Y)
        assert abs(val - bkm_integral_hp(a, c, s)) <= 1e-8 * max(1.0, val)
        assert np.isclose(val, relative_entropy(D0 + Y, D0), atol=1e-9)


def test_bkm_integral_input_checks():
    Y = np.array([[0.0, 0.1], [0.1, 0.0]])
    with pytest.raises(ValidationError):
        bkm_integral(np.array([[0.5, 0.1], [0.1, 0.5]]), Y)
    with pytest.raises(ValidationError):
        bkm_integral(np.diag([0.5, 0.5]), np.eye(2))
    with pytest.raises(ValidationError):
        bkm_integral(np.diag([0.01, 0.01]), Y)
    assert bkm_integral(np.diag([0.5, 0.5]), np.zeros((2, 2))) == 0.0


def test_pinsker_gap_value():
    gap = pinsker_gap(np.diag([1.0, 0.0]), np.eye(2) / 2)
    assert np.isclose(gap, math.log(2) - 0.5, atol=1e-14)
    assert pinsker_gap(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf


def test_von_neumann_entropy():
    assert np.isclose(von_neumann_entropy(np.eye(3) / 3), math.log(3), atol=1e-14)
    assert abs(von_neumann_entropy(PLUS)) <= 1e-14


states = st.tuples(st.integers(2, 5), st.integers(0, 2**32 - 1))


@given(states)
def test_property_pythagorean_split(args):
    d, seed = args
    r = np.random.default_rng(seed)
    spec = two_block(d, int(r.integers(1, d)), random_unitary(d, r))
    rho = random_density(d, d, r)
    sigma = pinch(random_density(d, d, r), spec)
    total = relative_entropy(rho, sigma)
    parts = relative_entropy(rho, pinch(rho, spec)) + relative_entropy(pinch(rho, spec), sigma)
    assert abs(total - parts) <= 1e-9 * max(1.0, total)


@given(states)
def test_property_data_processing_and_pinsker(args):
    d, seed = args
    r = np.random.default_rng(seed)
    spec = two_block(d, int(r.integers(1, d)), random_unitary(d, r))
    rho = random_density(d, d, r)
    sigma = random_density(d, d, r)
    D = relative_entropy(rho, sigma)
    assert relative_entropy(pinch(rho, spec), pinch(sigma, spec)) <= D + 1e-10
    assert D >= 0.5 * trace_distance(rho, sigma) ** 2 - 1e-10
    assert coherence_entropy(rho, spec) >= -1e-12


@given(st.floats(1e-6, 10.0), st.floats(1e-6, 10.0))
def test_property_log_mean_between_means(x, y):
    # geometric mean <= logarithmic mean <= arithmetic mean, in reciprocal form
    L = log_mean_L(x, y)
    assert 2 / (x + y) * (1 - 1e-12) <= L <= 1 / math.sqrt(x * y) * (1 + 1e-12)
