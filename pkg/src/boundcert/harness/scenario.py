"""Scenario documents: JSON in, a ready-to-run setup out.

Complex matrices are nested arrays of ``[re, im]`` pairs, row-major.  Real
matrices (plain nested numbers) are accepted on input as a convenience.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..activation import activation, local_constants, regularize, split_from_levels
from ..certification import CertParams, dominance_window, lc_delta0, pure_coherent_state
from ..davies import RATE_MODELS, build_davies, tabulated_rate, verify_secular
from ..entropy import relative_entropy
from ..errors import ValidationError
from ..linalg import as_density, random_density

DEFAULT_STEPS = 200


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ValidationError(f"cannot read a matrix of shape {arr.shape}")


def encode_vector(v):
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]


def decode_vector(data):
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2 and arr.shape[-1] == 2:
        return arr[:, 0] + 1j * arr[:, 1]
    if arr.ndim == 1:
        return arr.astype(complex)
    raise ValidationError(f"cannot read a vector of shape {arr.shape}")


@dataclass
class Scenario:
    dim: int
    energies: list
    couplings: list
    beta: float
    support_levels: list
    epsilon: float
    initial_state: dict
    theta: float
    alpha: float
    rate_model: object = "fermi"
    eigenbasis: Optional[np.ndarray] = None
    lamb_shift: Optional[np.ndarray] = None
    time_grid: dict = field(default_factory=lambda: {"t_max": None, "steps": DEFAULT_STEPS})
    seed: int = 0
    delta0: Optional[float] = None
    name: str = ""

    def __post_init__(self):
        d = int(self.dim)
        self.dim = d
        self.energies = [float(e) for e in self.energies]
        if len(self.energies) != d:
            raise ValidationError("energies must have length dim")
        levels = [int(i) for i in self.support_levels]
        if not levels or len(set(levels)) != len(levels) or len(levels) >= d:
            raise ValidationError("support_levels must be a nonempty proper subset of levels")
        if any(not 0 <= i < d for i in levels):
            raise ValidationError("support level out of range")
        self.support_levels = levels
        self.couplings = [np.asarray(S, dtype=complex) for S in self.couplings]
        if not self.couplings or any(S.shape != (d, d) for S in self.couplings):
            raise ValidationError("couplings must be a nonempty list of dim x dim matrices")
        for name in ("eigenbasis", "lamb_shift"):
            M = getattr(self, name)
            if M is not None:
                M = np.asarray(M, dtype=complex)
                if M.shape != (d, d):
                    raise ValidationError(f"{name} must be dim x dim")
                setattr(self, name, M)
        kind = self.initial_state.get("kind")
        if kind not in ("pure_coherent", "matrix", "random", "block_diagonal"):
            raise ValidationError(f"unknown initial_state kind {kind!r}")
        if not isinstance(self.rate_model, (str, dict)):
            raise ValidationError("rate_model must be a name or {'table': [[omega, gamma], ...]}")
        if isinstance(self.rate_model, str) and self.rate_model not in RATE_MODELS:
            raise ValidationError(f"unknown rate model {self.rate_model!r}")

    # -- serialization -------------------------------------------------
    def to_dict(self):
        init = dict(self.initial_state)
        for key in ("matrix",):
            if key in init:
                init[key] = encode_matrix(init[key])
        for key in ("u", "v"):
            if key in init:
                init[key] = encode_vector(init[key])
        return {
            "name": self.name,
            "dim": self.dim,
            "energies": list(self.energies),
            "eigenbasis": None if self.eigenbasis is None else encode_matrix(self.eigenbasis),
            "couplings": [encode_matrix(S) for S in self.couplings],
            "beta": self.beta,
            "rate_model": self.rate_model,
            "lamb_shift": None if self.lamb_shift is None else encode_matrix(self.lamb_shift),
            "support_levels": list(self.support_levels),
            "epsilon": self.epsilon,
            "initial_state": init,
            "theta": self.theta,
            "alpha": self.alpha,
            "delta0": self.delta0,
            "time_grid": dict(self.time_grid),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        init = dict(data.pop("initial_state"))
        if "matrix" in init:
            init["matrix"] = decode_matrix(init["matrix"])
        for key in ("u", "v"):
            if key in init:
                init[key] = decode_vector(init[key])
        known = {"name", "dim", "energies", "eigenbasis", "couplings", "beta", "rate_model",
                 "lamb_shift", "support_levels", "epsilon", "theta", "alpha", "delta0",
                 "time_grid", "seed"}
        extra = set(data) - known
        if extra:
            raise ValidationError(f"unknown scenario fields {sorted(extra)}")
        for key in ("eigenbasis", "lamb_shift"):
            if data.get(key) is not None:
                data[key] = decode_matrix(data[key])
        data["couplings"] = [decode_matrix(S) for S in data["couplings"]]
        grid = {"t_max": None, "steps": DEFAULT_STEPS}
        grid.update(data.get("time_grid") or {})
        data["time_grid"] = grid
        return cls(initial_state=init, **data)


def load_scenario(path):
    with open(path) as fh:
        return Scenario.from_dict(json.load(fh))


def dump_scenario(scenario, path):
    with open(path, "w") as fh:
        json.dump(scenario.to_dict(), fh, indent=1, sort_keys=True)
        fh.write("\n")


def rate_function(rate_model, beta):
    if isinstance(rate_model, dict):
        return tabulated_rate(rate_model["table"])
    return RATE_MODELS[rate_model](beta)


@dataclass
class Setup:
    """Everything derived from a scenario that the commands need."""

    scenario: Scenario
    model: object
    rates: object
    secular: object
    split: object
    sigma: np.ndarray
    reg: object
    a0: float
    delta0: float
    rho0: np.ndarray
    params: CertParams
    window: object
    times: np.ndarray
    c0: float
    eps0: float


def support_state(model, levels):
    """Gibbs weights restricted to the support levels, normalized."""
    U = model.eigenbasis
    E = model.energies[levels]
    w = np.exp(-model.beta * (E - E.min()))
    w /= w.sum()
    return (U[:, levels] * w) @ U[:, levels].conj().T


def initial_state(spec, split):
    kind = spec["kind"]
    d = split.dim
    if kind == "pure_coherent":
        u = spec.get("u")
        v = spec.get("v")
        u = split.basis_P[:, 0] if u is None else split.basis_P @ np.asarray(u, dtype=complex)
        v = split.basis_Q[:, 0] if v is None else split.basis_Q @ np.asarray(v, dtype=complex)
        return pure_coherent_state(float(spec["eps0"]), u, v)
    if kind == "matrix":
        return as_density(spec["matrix"])
    if kind == "random":
        return random_density(d, int(spec.get("rank", d)), int(spec.get("seed", 0)))
    # block_diagonal: random populations on each side, no cross coherence
    seed = int(spec.get("seed", 0))
    eps0 = float(spec.get("eps0", 0.1))
    A = random_density(split.r, split.r, seed)
    C = random_density(split.d_Q, split.d_Q, seed + 1)
    UP, UQ = split.basis_P, split.basis_Q
    rho = (1 - eps0) * UP @ A @ UP.conj().T + eps0 * UQ @ C @ UQ.conj().T
    return 0.5 * (rho + rho.conj().T)


def time_grid(grid, window, k):
    steps = int(grid.get("steps", DEFAULT_STEPS))
    t_max = grid.get("t_max")
    if t_max is None:
        horizon = 10.0 / k if k > 0 else 10.0
        if window is not None and not window.empty and math.isfinite(window.t_star) and window.t_star > 0:
            t_max = min(window.t_star, horizon)
        else:
            t_max = horizon
    return np.linspace(0.0, float(t_max), steps)


def prepare(scenario: Scenario, allow_nonsecular=True) -> Setup:
    """Build the generator, reference states, constants and time grid of a scenario.

    With ``allow_nonsecular=False`` a model failing the secular check is
    refused with a ``ValidationError`` that names the worst residual.
    """
    sc = scenario
    split = split_from_levels(sc.support_levels, sc.dim, sc.eigenbasis)
    rate_fn = rate_function(sc.rate_model, sc.beta)
    model, rates = build_davies(sc.energies, sc.couplings, sc.beta, rate_fn, split,
                                eigenbasis=sc.eigenbasis, lamb_shift=sc.lamb_shift)
    secular = verify_secular(model)
    if not allow_nonsecular and not secular.secular_ok:
        why = f"worst residual {secular.max_residual:.3e}"
        if not secular.distinct_ok:
            why += ", cross-boundary Bohr frequencies not distinct"
        raise ValidationError(f"model is not secular ({why}); pass --allow-nonsecular to proceed")
    sigma = support_state(model, list(model.P_levels))
    reg = regularize(sigma, sc.epsilon)
    a0 = local_constants(reg, split).a0
    if sc.delta0 is None:
        delta0 = lc_delta0(a0, reg.lambda_star, split.d_Q)
        if delta0 <= 0:
            delta0 = a0
    else:
        delta0 = float(sc.delta0)
    local_constants(reg, split, delta0)
    rho0 = initial_state(sc.initial_state, split)
    rep0 = activation(rho0, split)
    D0 = relative_entropy(rho0, reg.sigma_eps)
    params = CertParams(sc.alpha, D0, sc.theta, a0, delta0, reg.epsilon, reg.lambda_star, split.d_Q)
    window = None
    if rep0.c > 0:
        window = dominance_window(secular.gamma_max, rates.k, params.A_theta, rep0.c, rep0.eps_Q,
                                  rates.eps_bar)
    times = time_grid(sc.time_grid, window, rates.k)
    return Setup(sc, model, rates, secular, split, sigma, reg, a0, delta0, rho0, params, window,
                 times, rep0.c, rep0.eps_Q)
