"""Seeded instance generators for the verification suites."""

import numpy as np

from ..activation import SupportSplit, activation, block_decompose
from ..entropy import block_diagonal
from ..errors import SamplerError, ValidationError
from ..linalg import eig_hermitian, random_unitary
from .scenario import Scenario, prepare

MAX_REJECTIONS = 10_000


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _density(dim, rng):
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    M = G @ G.conj().T
    return M / np.trace(M).real


def _unit(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def sample_regime_state(split, a0, eps_max, seed, cross_rank=1):
    """Random density with ``lambda_min(P rho P) >= a0``, ``0 < eps_Q <= eps_max`` and ``c > 0``.

    The support block is ``a0 I + (1 - eps - r a0) tau`` for a random density
    ``tau``, the kernel block is ``eps`` times a random density, and the cross
    block is a random rank-``cross_rank`` matrix scaled by a random fraction of
    the largest factor keeping the whole matrix PSD.  Candidates failing any
    predicate are resampled.

    Raises
    ------
    SamplerError
        After 10^4 rejected candidates.
    """
    if eps_max > a0 / 2:
        raise ValidationError("eps_max must not exceed a0/2")
    rng = _rng(seed)
    r, dq = split.r, split.d_Q
    if r * a0 >= 1:
        raise SamplerError("support block cannot have lambda_min >= a0", r=r, a0=a0)
    k = max(1, min(cross_rank, r, dq))
    last = {}
    for attempt in range(MAX_REJECTIONS):
        eps = eps_max * rng.uniform(0.05, 1.0)
        slack = 1.0 - eps - r * a0
        if slack < 0:
            last = {"reason": "no room for the support block", "eps": eps}
            continue
        A = a0 * np.eye(r) + slack * _density(r, rng)
        C = eps * _density(dq, rng)
        X = sum(np.outer(_unit(r, rng), _unit(dq, rng).conj()) for _ in range(k))
        Ah = np.linalg.inv(np.linalg.cholesky(A))
        Ch = np.linalg.inv(np.linalg.cholesky(C))
        kmax = 1.0 / np.linalg.norm(Ah @ X @ Ch.conj().T, 2)
        B = rng.uniform(0.05, 0.98) * kmax * X
        U = split.basis
        rho = U @ np.block([[A, B], [B.conj().T, C]]) @ U.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        w = eig_hermitian(rho).eigenvalues
        rep = activation(rho, split)
        lam_A = eig_hermitian(block_decompose(rho, split).A).eigenvalues[0]
        if w[0] >= -1e-14 and lam_A >= a0 and 0 < rep.eps_Q <= eps_max and rep.c > 0:
            return rho
        last = {"lambda_min": float(w[0]), "lambda_min_A": float(lam_A), "eps_Q": rep.eps_Q, "c": rep.c}
    raise SamplerError(f"no regime state after {MAX_REJECTIONS} candidates", **last)


def random_split(dim, rng, r=None):
    """Split along random orthonormal directions; ``r`` defaults to a random 1..dim-1."""
    if r is None:
        r = int(rng.integers(1, dim))
    U = random_unitary(dim, rng)
    return SupportSplit(U[:, :r], U[:, r:])


def random_block_sigma(split, rng):
    """Full-rank density commuting with the split's projectors."""
    tP = rng.uniform(0.2, 0.8)
    A = _density(split.r, rng)
    C = _density(split.d_Q, rng)
    U = split.basis
    sig = U @ block_diagonal([tP * A, (1 - tP) * C]) @ U.conj().T
    return 0.5 * (sig + sig.conj().T)


def random_support_sigma(split, rng):
    """Rank-``r`` density supported on PH."""
    A = _density(split.r, rng)
    UP = split.basis_P
    s = UP @ A @ UP.conj().T
    return 0.5 * (s + s.conj().T)


def sector_projectors(sizes, U=None):
    d = sum(sizes)
    U = np.eye(d, dtype=complex) if U is None else U
    out, start = [], 0
    for n in sizes:
        V = U[:, start:start + n]
        out.append(V @ V.conj().T)
        start += n
    return out


def random_sector_sizes(K, d_max, rng, max_size=2):
    sizes = [int(rng.integers(1, max_size + 1)) for _ in range(K)]
    while sum(sizes) > d_max:
        i = int(np.argmax(sizes))
        sizes[i] -= 1
    return sizes


def geometric_hierarchy_state(sizes, seed, q=0.1, tau=0.9):
    """Sector-hierarchical density: sector ``k`` carries weight proportional to ``q^k``.

    ``rho = D^{1/2} (I + kappa X) D^{1/2}`` with ``D`` block diagonal (each
    block ``w_k (tau I/n_k + (1 - tau) density)``), ``X`` Hermitian with zero
    diagonal blocks and unit operator norm, and ``kappa`` in ``[0.05, 0.4]``.
    Returns ``(rho, projectors)`` in the computational basis.
    """
    rng = _rng(seed)
    K = len(sizes)
    w = q ** np.arange(K)
    w = w / w.sum()
    blocks = [wk * (tau * np.eye(n) / n + (1 - tau) * _density(n, rng)) for wk, n in zip(w, sizes)]
    D = block_diagonal(blocks)
    d = D.shape[0]
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    X = G + G.conj().T
    start = 0
    for n in sizes:
        X[start:start + n, start:start + n] = 0
        start += n
    X /= np.linalg.norm(X, 2)
    kappa = rng.uniform(0.05, 0.4)
    Dh = block_diagonal([np.real_if_close(_psd_sqrt(b)) for b in blocks])
    rho = Dh @ (np.eye(d) + kappa * X) @ Dh
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real, sector_projectors(sizes)


def _psd_sqrt(M):
    w, V = np.linalg.eigh(M)
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T


def random_sector_sigma(sizes, rng):
    w = rng.uniform(0.2, 1.0, len(sizes))
    w /= w.sum()
    return block_diagonal([wk * _density(n, rng) for wk, n in zip(w, sizes)])


def random_pinching(dim, rng):
    """Projector family from a random unitary cut into 2..dim consecutive blocks."""
    K = int(rng.integers(2, dim + 1))
    cuts = np.sort(rng.choice(np.arange(1, dim), size=K - 1, replace=False))
    sizes = np.diff(np.concatenate([[0], cuts, [dim]])).tolist()
    return sector_projectors(sizes, random_unitary(dim, rng))


def random_secular_scenario(seed, dim=None, theta=None, eps0=None, max_tries=100):
    """Random generic-spectrum Davies scenario with a pure coherent initial state.

    Energies have random gaps in ``[0.3, 1.5]``, ``P`` is the lowest ``r``
    levels and the couplings are one or two random real symmetric matrices.
    Candidates whose secular check fails are resampled.
    """
    rng = _rng(seed)
    for _ in range(max_tries):
        d = int(rng.integers(2, 5)) if dim is None else dim
        E = np.concatenate([[0.0], np.cumsum(rng.uniform(0.3, 1.5, d - 1))])
        r = int(rng.integers(1, d))
        n_c = int(rng.integers(1, 3))
        couplings = []
        for _ in range(n_c):
            G = rng.standard_normal((d, d))
            couplings.append((G + G.T) / 2)
        beta = float(rng.uniform(0.5, 3.0))
        u = _unit(r, rng)
        v = _unit(d - r, rng)
        sc = Scenario(
            dim=d, energies=E.tolist(), couplings=couplings, beta=beta,
            support_levels=list(range(r)), epsilon=0.05,
            initial_state={"kind": "pure_coherent",
                           "eps0": float(rng.uniform(0.05, 0.5)) if eps0 is None else eps0,
                           "u": u, "v": v},
            theta=float(rng.uniform(0.2, 0.8)) if theta is None else theta,
            alpha=0.1, time_grid={"t_max": None, "steps": 200}, seed=0,
            name="random-secular")
        setup = prepare(sc)
        if setup.secular.secular_ok and setup.rates.k > 0:
            sc.time_grid = {"t_max": 10.0 / setup.rates.k, "steps": 200}
            return sc
    raise SamplerError("could not draw a secular scenario", tries=max_tries)


def kms_qubit_scenario(beta, eps0=0.01, theta=0.5, epsilon=0.02, alpha=0.4, steps=200):
    """Two-level sigma_x model with Fermi rates; ``P`` is the ground level."""
    return Scenario(
        dim=2, energies=[0.0, 1.0], couplings=[np.array([[0, 1], [1, 0]], dtype=complex)],
        beta=beta, support_levels=[0], epsilon=epsilon,
        initial_state={"kind": "pure_coherent", "eps0": eps0},
        theta=theta, alpha=alpha, time_grid={"t_max": None, "steps": steps},
        name=f"kms-qubit-beta{beta:g}")
