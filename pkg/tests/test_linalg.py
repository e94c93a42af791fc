import numpy as np
import pytest
from hypothesis import given, strategies as st

from boundcert.errors import DomainError, ValidationError
from boundcert.linalg import (as_density, eig_hermitian, matrix_function, norms,
                              orthonormal_complement, random_density, random_unitary,
                              range_basis, sqrtm_psd, trace_distance)


def test_norms_diagonal():
    n = norms(np.diag([3.0, -4.0]))
    assert np.isclose(n.trace_norm, 7.0, atol=1e-14)
    assert np.isclose(n.frobenius, 5.0, atol=1e-14)
    assert np.isclose(n.operator, 4.0, atol=1e-14)


def test_random_density_shape_trace_rank():
    rho = random_density(4, 2, 7)
    w = eig_hermitian(rho).eigenvalues
    assert np.isclose(np.trace(rho).real, 1.0, atol=1e-12)
    assert np.allclose(rho, rho.conj().T, atol=0)
    assert np.all(w > -1e-12)
    assert np.sum(w > 1e-10) == 2


def test_random_density_is_deterministic():
    assert np.array_equal(random_density(5, 3, 42), random_density(5, 3, 42))
    assert not np.array_equal(random_density(5, 3, 42), random_density(5, 3, 43))


def test_random_density_rejects_bad_rank():
    with pytest.raises(ValidationError):
        random_density(3, 0, 1)
    with pytest.raises(ValidationError):
        random_density(3, 4, 1)


def test_eigenvalue_sum_equals_trace(rng):
    for _ in range(1000):
        d = int(rng.integers(1, 7))
        G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        H = G + G.conj().T
        w = eig_hermitian(H).eigenvalues
        assert abs(w.sum() - np.trace(H).real) <= 1e-10 * max(1.0, np.abs(w).max())
        assert np.all(np.diff(w) >= 0)


def test_reconstruction(rng):
    rho = random_density(5, 5, rng)
    dec = eig_hermitian(rho)
    assert np.allclose(dec.reconstruct(), rho, atol=1e-13)


def test_hermiticity_is_enforced():
    with pytest.raises(ValidationError):
        eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValidationError):
        eig_hermitian(np.zeros((2, 3)))


def test_matrix_function_spectral_mapping(rng):
    rho = random_density(4, 4, rng)
    w = eig_hermitian(rho).eigenvalues
    L = matrix_function(rho, np.log)
    assert np.allclose(eig_hermitian(L).eigenvalues, np.log(w), atol=1e-10)
    S = sqrtm_psd(rho)
    assert np.allclose(S @ S, rho, atol=1e-13)


def test_matrix_function_log_at_zero_is_domain_error():
    with pytest.raises(DomainError):
        matrix_function(np.diag([1.0, 0.0]), np.log)
    L = matrix_function(np.diag([1.0, 0.0]), np.log, clip_floor=1e-3)
    assert np.isclose(L[1, 1].real, np.log(1e-3), atol=1e-14)


def test_as_density_checks():
    with pytest.raises(ValidationError):
        as_density(np.diag([0.5, 0.4]))
    with pytest.raises(ValidationError):
        as_density(np.diag([1.2, -0.2]))


def test_trace_distance_orthogonal_pure_states():
    assert np.isclose(trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 2.0, atol=1e-14)


def test_random_unitary_and_bases(rng):
    U = random_unitary(5, rng)
    assert np.allclose(U.conj().T @ U, np.eye(5), atol=1e-12)
    V = U[:, :2]
    W = orthonormal_complement(V)
    assert W.shape == (5, 3)
    assert np.allclose(V.conj().T @ W, 0, atol=1e-12)
    R = range_basis(V @ V.conj().T)
    assert R.shape == (5, 2)
    assert np.allclose(R @ R.conj().T, V @ V.conj().T, atol=1e-12)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_norm_chain(d, seed):
    r = np.random.default_rng(seed)
    M = r.standard_normal((d, d)) + 1j * r.standard_normal((d, d))
    n = norms(M)
    assert n.operator <= n.frobenius * (1 + 1e-12)
    assert n.frobenius <= n.trace_norm * (1 + 1e-12)
    assert n.trace_norm <= np.sqrt(d) * n.frobenius * (1 + 1e-12)
