"""Acceptance criteria, one test per criterion.

Each test is named ``test_criterion_NN_<name>``; the conftest hook prints one
PASS/FAIL line per criterion at the end of the run. Tolerances and runtime
budgets are the ones stated for each criterion.
"""

import subprocess
import sys
import time
from fractions import Fraction as Fr
from importlib import resources
from itertools import product

import numpy as np
import pytest

from lowtrotter import bounds as B
from lowtrotter.commutators import (aggregated_commutator, all_nested_specs, count_bounds,
                                    expand_nested, f_abs_sum, restricted_commutator_bound_sum,
                                    commutator_bound_sum)
from lowtrotter.cost import empirical_trotter_number, n_exponent, scaling_law
from lowtrotter.experiments import Context, arad_sweep
from lowtrotter.formulas import (empirical_order, error_integral_bound, hamiltonian_spectrum,
                                 lie_trotter, step_error, strang, suzuki)
from lowtrotter.pauli_model import heisenberg_chain, tfim_chain
from lowtrotter.spectral import spectral_norm

REFERENCE = resources.files("lowtrotter") / "data" / "reference_config.json"


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        if exc[0] is None:
            elapsed = time.perf_counter() - self.t0
            assert elapsed < self.seconds, f"took {elapsed:.1f} s, budget {self.seconds} s"


def lam_of(H):
    return B.lambda_param(H.J, H.d, H.k)


def ells_of(H, p):
    return [B.ell_n(n, H.L, H.k, H.d, H.J) for n in range(p + 1)]


# 1 -------------------------------------------------------------------------------

TABLE = {  # N-dependent term of each cell: (T, N, eps) exponents; Delta term separately
    ("general", 1): (Fr(2), Fr(1), Fr(-1)),
    ("general", 2): (Fr(3, 2), Fr(1, 2), Fr(-1, 2)),
    ("general", 3): (Fr(4, 3), Fr(1, 3), Fr(-1, 3)),
    ("prior", 1): (Fr(4, 3), Fr(2, 3), Fr(-1, 3)),
    ("prior", 2): (Fr(6, 5), Fr(3, 5), Fr(-1, 5)),
    ("prior", 3): (Fr(8, 7), Fr(4, 7), Fr(-1, 7)),
    ("present", 1): (Fr(6, 5), Fr(2, 5), Fr(-1, 5)),
    ("present", 2): (Fr(12, 11), Fr(3, 11), Fr(-1, 11)),
    ("present", 3): (Fr(20, 19), Fr(4, 19), Fr(-1, 19)),
}
DELTA_TERM = {1: (Fr(2), Fr(2), Fr(-1)), 2: (Fr(3, 2), Fr(3, 2), Fr(-1, 2)),
              3: (Fr(4, 3), Fr(4, 3), Fr(-1, 3))}


def test_criterion_01_cost_exponents():
    with Budget(1):
        for (method, p), (t, n, e) in TABLE.items():
            law = scaling_law(method, p)
            last = law.terms[-1]
            assert (last.exponent("T"), last.exponent("N"), last.exponent("eps")) == (t, n, e)
            assert last.exponent("Delta") == 0
            if method != "general":
                first = law.terms[0]
                dt = (first.exponent("T"), first.exponent("Delta"), first.exponent("eps"))
                assert dt == DELTA_TERM[p] and first.exponent("N") == 0
            assert len(law.terms) == (1 if method == "general" else 2)
        for p in (1, 2, 3):
            assert Fr(1, p) == TABLE[("general", p)][1]
            assert Fr(1, 2) + Fr(1, 4 * p + 2) == TABLE[("prior", p)][1]
            assert Fr(p + 1, (p + 1) ** 2 + p) == TABLE[("present", p)][1]
            for m in ("general", "prior", "present"):
                assert n_exponent(m, p) == TABLE[(m, p)][1]


# 2 -------------------------------------------------------------------------------

def test_criterion_02_n_exponent_ordering():
    with Budget(1):
        violations = []
        for p in range(1, 9):
            pres, prior, gen = (n_exponent(m, p) for m in ("present", "prior", "general"))
            if not (pres < prior < gen):
                violations.append(f"p={p}: present {pres}, prior {prior}, general {gen}")
        assert not violations, "strict ordering fails: " + "; ".join(violations)


# 3 -------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def order_models():
    return [tfim_chain(4), heisenberg_chain(6)]


def test_criterion_03_order_certificates(order_models):
    grid = np.logspace(-3, -2, 5)
    with Budget(30):
        for H, (f, p) in product(order_models, [(lie_trotter(2), 1), (strang(2), 2),
                                                (suzuki(4, 2), 4)]):
            slope = empirical_order(f, H, grid, method="integral", ceiling=1e-2)
            assert abs(slope - (p + 1)) <= 0.2, f"{H.name} {f.name}: slope {slope:.3f}"


# 4 -------------------------------------------------------------------------------

def test_criterion_04_integral_inequality(tfim6, heis6, heis6_psd):
    with Budget(60):
        for H, f, s in product([tfim6, heis6, heis6_psd], [lie_trotter(2), strang(2)],
                               [1e-3, 1e-2, 0.1, 0.5]):
            measured = step_error(f, H, s)
            bound = error_integral_bound(f, H, s, n_quad=32).value
            assert measured <= bound + 1e-9, f"{H.name} {f.name} s={s}: {measured} > {bound}"


# 5 -------------------------------------------------------------------------------

def test_criterion_05_arad_leakage(heis6):
    with Budget(60):
        ctx = Context(heis6, strang(2), hamiltonian_spectrum(heis6), lam_of(heis6), False, None)
        rows = arad_sweep(ctx, samples=50, grid=5, seed=0)
        assert len(rows) == 50 * 25
        assert B.default_R(heis6) == heis6.k * heis6.J * heis6.d
        bad = [r for r in rows if r["measured"] > r["bound"]]
        assert not bad, f"{len(bad)} violations, first {bad[0]}"


# 6 -------------------------------------------------------------------------------

def test_criterion_06_formula_leakage(tfim6, heis6_psd):
    total = nonvacuous = 0
    violations = []
    with Budget(120):
        for H in (tfim6, heis6_psd):
            cache, lam = hamiltonian_spectrum(H), lam_of(H)
            for f, s, q, theta in product([strang(2), lie_trotter(2)], [0.02, 0.05, 0.1],
                                          [25, 50], [1e-2, 1e-3]):
                delta = cache.percentile(q)
                rw = B.R_W(f, H, s)
                dp = B.select_delta_prime(delta, rw, lam, theta).value
                bound = B.formula_leakage_bound(delta, dp, lam, rw)
                measured = B.empirical_leakage(f, H, s, delta, dp, cache)
                total += 1
                if not bound.vacuous:
                    nonvacuous += 1
                    if measured > bound.value:
                        violations.append((H.name, f.name, s, q, theta, measured, bound.value))
    assert not violations, violations
    assert nonvacuous >= 0.5 * total, f"only {nonvacuous}/{total} non-vacuous"


# 7 -------------------------------------------------------------------------------

def test_criterion_07_restricted_bound(tfim6, heis6_psd):
    with Budget(120):
        for H in (tfim6, heis6_psd):
            cache, lam = hamiltonian_spectrum(H), lam_of(H)
            for (f, p), s, q in product([(lie_trotter(2), 1), (strang(2), 2)],
                                        [1e-3, 3e-3, 1e-2], [25, 50]):
                delta = cache.percentile(q)
                dp = B.select_delta_prime(delta, B.R_W(f, H, s), lam, 1e-3).value
                retained, _ = B.error_decomposition(f, H, s, delta, dp, cache)
                bound = s ** (p + 1) / (p + 1) * restricted_commutator_bound_sum(f, H, cache, dp)
                assert retained <= bound * 1.25, (H.name, f.name, s, q, retained, bound)
        cache = hamiltonian_spectrum(tfim6)
        mid = cache.percentile(50)
        for f in (lie_trotter(2), strang(2)):
            assert restricted_commutator_bound_sum(f, tfim6, cache, mid) < \
                commutator_bound_sum(f, tfim6)


# 8 -------------------------------------------------------------------------------

def test_criterion_08_psd_step_bound(heis6_psd):
    H = heis6_psd
    cache, lam = hamiltonian_spectrum(H), lam_of(H)
    assert all(np.linalg.eigvalsh(m)[0] >= -1e-12 for m in H.group_matrices)
    with Budget(60):
        for (f, p), s, q in product([(lie_trotter(2), 1), (strang(2), 2)],
                                    [1e-3, 3e-3, 1e-2], [25, 50]):
            delta = cache.percentile(q)
            dp = B.select_delta_prime(delta, B.R_W(f, H, s), lam, 1e-3).value
            norms = [x for x in (B.restricted_norm(m, cache, dp) for m in H.group_matrices) if x > 0]
            chain = B.auto_chain(dp, p, lam, ells_of(H, p), 0.1, min(norms) if norms else 1.0)
            bound = B.psd_step_error_bound(s, p, chain.delta_f, f_abs_sum(f, H))
            eps = B.empirical_low_energy_error(f, H, s, delta, cache)
            assert eps <= bound * 1.25, (f.name, s, q, eps, bound)


# 9 -------------------------------------------------------------------------------

def _dense_nested(H, key):
    # identity offsets are scalars: they drop out of every commutator and the
    # symbolic form carries them separately, so compare the Pauli part only
    mats = H.group_matrices
    inner = key[-1]
    out = mats[inner] - H.groups[inner].offset * np.eye(len(mats[inner]))
    for m in reversed(key[:-1]):
        out = mats[m] @ out - out @ mats[m]
    return out


def test_criterion_09_counting_bounds(tfim4, tfim6, heis6, heis6_psd, commuting2):
    models = [tfim4, tfim6, heis6, heis6_psd, commuting2,
              heisenberg_chain(5, 0.7, "periodic"), tfim_chain(6, 0.6, -1.3, "periodic")]
    with Budget(30):
        for H in models:
            for n in range(4):
                terms, support, strength = count_bounds(n, H.L, H.k, H.d, H.J)
                for key in all_nested_specs(H.M, n):
                    ops = expand_nested(H, key)
                    assert ops.n_products <= terms, (H.name, key)
                    assert ops.max_support <= support, (H.name, key)
                    assert ops.max_single_coeff <= strength * (1 + 1e-12), (H.name, key)
                    diff = spectral_norm(ops.matrix() - _dense_nested(H, key))
                    assert diff <= 1e-10, (H.name, key, diff)


# 10 ------------------------------------------------------------------------------

def test_criterion_10_vanishing_certificate(tfim4):
    with Budget(30):
        assert spectral_norm(aggregated_commutator(strang(2), tfim4, 1)) <= 1e-10
        for n in (1, 2, 3):
            assert spectral_norm(aggregated_commutator(suzuki(4, 2), tfim4, n)) <= 1e-10


# 11 ------------------------------------------------------------------------------

def test_criterion_11_cost_consistency(tfim6):
    with Budget(120):
        cache = hamiltonian_spectrum(tfim6)
        delta = cache.percentile(25)
        low = empirical_trotter_number(strang(2), tfim6, delta, 1.0, 1e-6, cache)
        full = empirical_trotter_number(strang(2), tfim6, None, 1.0, 1e-6, cache)
        assert low.r <= full.r, (low, full)


# 12 ------------------------------------------------------------------------------

def test_criterion_12_determinism(tmp_path):
    outputs = []
    with Budget(120):
        for i in range(2):
            out = tmp_path / f"run{i}.csv"
            proc = subprocess.run([sys.executable, "-m", "lowtrotter", "analyze", "--config",
                                   str(REFERENCE), "--out", str(out)],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0].count(b"\n") > 1
