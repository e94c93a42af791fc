"""Acceptance criteria, one test each; a PASS/FAIL summary is printed at the end of the run."""

import contextlib
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from boundcert.activation import activation, local_constants, regularize
from boundcert.certification import check_conditions, certified_curve
from boundcert.davies import dynamical_bounds, evolve, verify_secular
from boundcert.entropy import (bkm_integral, coherence_entropy, log_mean_L, pinch, pinsker_gap,
                               relative_entropy)
from boundcert.harness.commands import certify_cmd
from boundcert.harness.sampling import (geometric_hierarchy_state, random_block_sigma,
                                        random_sector_sigma, random_secular_scenario, random_split,
                                        random_support_sigma, sample_regime_state, sector_projectors)
from boundcert.harness.scenario import load_scenario, prepare
from boundcert.linalg import random_density, random_unitary
from boundcert.separation import (class_threshold, cps_decompose, fr_compare, multi_sector_bound,
                                  petz_recovery, sequential_pinch_chain)
from conftest import record_criterion

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"


@contextlib.contextmanager
def criterion(n, title):
    try:
        yield
    except BaseException:
        record_criterion(n, title, False)
        raise
    record_criterion(n, title, True)


def off_diagonal(a, c, s):
    return np.diag([a, c]), np.array([[0.0, s], [s, 0.0]])


def test_c01_pythagorean_identity():
    with criterion(1, "Pythagorean identity, 1000 pairs, d in 3..8"):
        rng = np.random.default_rng(101)
        worst = 0.0
        for _ in range(1000):
            d = int(rng.integers(3, 9))
            split = random_split(d, rng)
            sigma = random_block_sigma(split, rng)
            rho = random_density(d, int(rng.integers(1, d + 1)), rng)
            rep = cps_decompose(rho, sigma, split, 0.1)
            worst = max(worst, rep.residual)
        assert worst <= 1e-9, worst


def test_c02_bkm_integral_identity():
    with criterion(2, "BKM integral identity, 500 instances"):
        rng = np.random.default_rng(102)
        for _ in range(500):
            a, c = rng.uniform(1e-3, 1.0, 2)
            s = math.sqrt(a * c) * rng.uniform(0.0, 1.0)
            D0, Y = off_diagonal(a, c, s)
            assert abs(bkm_integral(D0, Y) - relative_entropy(D0 + Y, D0)) <= 1e-8


def test_c03_two_by_two_lower_bound():
    with criterion(3, "2x2 BKM lower bound, 10^4 triples"):
        rng = np.random.default_rng(103)
        for _ in range(10_000):
            a, c = rng.uniform(1e-3, 1.0, 2)
            s = math.sqrt(a * c) * rng.uniform(0.0, 1.0)
            D0, Y = off_diagonal(a, c, s)
            assert bkm_integral(D0, Y) >= s * s * log_mean_L(a, c) - 1e-9


def test_c04_coercivity_chain():
    with criterion(4, "coherence coercivity chain, 500 regime states"):
        rng = np.random.default_rng(104)
        done = 0
        while done < 500:
            d = int(rng.integers(2, 7))
            split = random_split(d, rng)
            reg = regularize(random_support_sigma(split, rng), rng.uniform(0.01, 0.3))
            a0 = local_constants(reg, split).a0
            if a0 < 1e-3:
                continue
            rho = sample_regime_state(split, a0, a0 / 2, rng, cross_rank=int(rng.integers(1, 3)))
            rep = activation(rho, split)
            D = relative_entropy(rho, reg.sigma_eps)
            Dc = coherence_entropy(rho, split.pinching())
            assert D >= Dc - 1e-9
            assert Dc >= rep.c * math.log(a0 / rep.eps_Q) - 1e-9
            assert D >= 2 * rep.c * math.log(math.sqrt(a0) / rep.A_func) - 1e-9
            done += 1


def test_c05_secular_extraction():
    with criterion(5, "secular extraction, qubit and 4-level model"):
        for name in ("qubit_ln3.json", "four_level.json"):
            setup = prepare(load_scenario(SCENARIOS / name))
            sec = verify_secular(setup.model)
            assert sec.secular_ok and sec.max_residual <= 1e-10, (name, sec.max_residual)
        setup = prepare(load_scenario(SCENARIOS / "four_level.json"))
        assert setup.split.r == 2 and setup.split.d_Q == 2
        setup = prepare(load_scenario(SCENARIOS / "qubit_ln3.json"))
        assert abs(setup.secular.gamma_pe[0, 0] - 0.5) <= 1e-12
        assert abs(setup.rates.mu - 0.25) <= 1e-12
        assert abs(setup.rates.eta - 0.75) <= 1e-12
        assert abs(setup.rates.eps_bar - 0.25) <= 1e-12


def test_c06_dynamical_bounds_along_trajectories():
    with criterion(6, "coherence floor and kernel ceiling, 20 scenarios x 200 times"):
        for seed in range(20):
            setup = prepare(random_secular_scenario(1000 + seed))
            assert setup.secular.secular_ok
            assert setup.times.size == 200
            traj = evolve(setup.model, setup.rho0, setup.times)
            b = dynamical_bounds(setup.rates, setup.secular, setup.c0, setup.eps0, setup.times)
            assert np.all(traj.c >= b.c_lower - 1e-8), seed
            assert np.all(traj.eps_Q <= b.epsQ_upper + 1e-8), seed


@pytest.mark.parametrize("name", ["golden_qubit.json", "golden_three_level.json"])
def test_c07_certification_end_to_end(name):
    with criterion(7, "end-to-end certification on golden scenarios"):
        sc = load_scenario(SCENARIOS / name)
        setup = prepare(sc, allow_nonsecular=False)
        assert setup.params.lc_static_ok
        traj = evolve(setup.model, setup.rho0, setup.times, reference=setup.reg.sigma_eps)
        flags = check_conditions(traj, setup.params, setup.rates, setup.secular)
        assert np.all(flags.lc_ok) and np.all(flags.cd_ok)
        curve = certified_curve(setup.params, setup.times)
        # entropy decay verified at the scenario's alpha
        assert np.all(traj.rel_entropy <= curve.entropy_bound * (1 + 1e-12) + 1e-15)
        on = curve.on_branch
        assert on.sum() > 0
        assert np.all(traj.A[on] <= curve.a_cert[on] + 1e-9)
        tail = setup.times >= curve.t0
        assert tail.sum() > 0
        assert np.all(curve.a_cert[tail] <= curve.envelope[tail] + 1e-9)
        # closed-form window against (CD) checked on a grid running past it
        t_star = setup.window.t_star
        grid = np.linspace(0.0, 2.0 * t_star, 401)
        dt = grid[1] - grid[0]
        run = evolve(setup.model, setup.rho0, grid, reference=setup.reg.sigma_eps)
        cd = check_conditions(run, setup.params, setup.rates, setup.secular).cd_ok
        assert np.all(cd[grid <= t_star])
        # end of the initial run of grid times where (CD) holds
        end = grid[-1] if cd.all() else grid[np.argmin(cd) - 1]
        assert t_star <= end + dt
        assert certify_cmd(sc).ok


def test_c08_classical_limit():
    with criterion(8, "classical limit keeps zero coherence"):
        scenarios = [load_scenario(SCENARIOS / "classical_qubit.json")]
        for seed in range(3):
            sc = random_secular_scenario(2000 + seed)
            sc.initial_state = {"kind": "block_diagonal", "seed": seed, "eps0": 0.3}
            scenarios.append(sc)
        for sc in scenarios:
            setup = prepare(sc)
            traj = evolve(setup.model, setup.rho0, setup.times, reference=setup.reg.sigma_eps)
            for rho in traj.states:
                assert np.linalg.norm(setup.split.P @ rho @ setup.split.Q) <= 1e-10
                assert pinsker_gap(rho, setup.reg.sigma_eps) >= -1e-9


def test_c09_separation():
    with criterion(9, "separation: block identity, multi-sector, Petz, FR comparison"):
        rng = np.random.default_rng(109)
        for _ in range(200):
            K = int(rng.integers(3, 5))
            sizes = [int(rng.integers(1, 3)) for _ in range(K)]
            d = sum(sizes)
            Ps = sector_projectors(sizes, random_unitary(d, rng))
            chain = sequential_pinch_chain(random_density(d, d, rng), Ps)
            assert max(chain.identity_residual) <= 1e-11
            assert np.allclose(chain.C, chain.C_direct, rtol=0, atol=1e-10)

        applicable = 0
        for _ in range(200):
            K = int(rng.integers(2, 5))
            sizes = [int(rng.integers(1, 3)) for _ in range(K)]
            rho, Ps = geometric_hierarchy_state(sizes, rng)
            ms = multi_sector_bound(rho, random_sector_sigma(sizes, rng),
                                    sequential_pinch_chain(rho, Ps))
            assert ms.telescoping_residual <= 1e-9
            if ms.applicable:
                applicable += 1
                assert ms.d_total >= ms.bound - 1e-9
        assert applicable >= 150

        for _ in range(50):
            d = int(rng.integers(2, 6))
            split = random_split(d, rng)
            sigma = random_block_sigma(split, rng)
            prho = pinch(random_density(d, d, rng), split.pinching())
            assert np.max(np.abs(petz_recovery(sigma, split, prho) - prho)) <= 1e-10

        n = 0
        while n < 200:
            r = int(rng.integers(1, 3))
            split = random_split(int(rng.integers(r + 1, 6)), rng, r=r)
            a0 = float(rng.uniform(0.3, 0.9 / r))
            rho = sample_regime_state(split, a0, class_threshold(a0), rng)
            rep = fr_compare(rho, random_block_sigma(split, rng), split, a0)
            assert rep.in_class and rep.c > 0
            assert rep.ours >= rep.fr_remainder - 1e-9
            assert rep.ratio >= a0 * math.log(a0 / rep.eps_Q) / 4 - 1e-9
            n += 1

        thr = class_threshold(0.8)
        assert abs(thr - 0.8 * math.exp(-5)) <= 1e-15
        assert round(thr, 5) == 0.00539
        assert round(thr, 3) == 0.005


def test_c10_determinism(tmp_path):
    with criterion(10, "verify --suite all is byte-identical across runs"):
        outs = []
        for i in range(2):
            out = tmp_path / f"report{i}.json"
            proc = subprocess.run([sys.executable, "-m", "boundcert", "verify", "--suite", "all",
                                   "--trials", "8", "--seed", "17", "--out", str(out)],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
