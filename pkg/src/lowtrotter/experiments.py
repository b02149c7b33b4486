"""Grid orchestration behind the command-line tools.

Grid points run concurrently in threads (numpy releases the GIL in the dense
kernels) and are reassembled in grid order, so results do not depend on the
worker count. A failing point is recorded and the rest of the grid continues.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import bounds as B
from .commutators import MAX_COEFF_ORDER, f_abs_sum, restricted_commutator_bound_sum
from .config import ExperimentConfig, ValidationError
from .cost import (METHODS, RNotFoundWithinBudget, empirical_trotter_number, evaluate_law,
                   n_exponent, scaling_law)
from .formulas import FormulaSchedule, group_spectra, hamiltonian_spectrum
from .pauli_model import DimensionTooLarge, PartitionedHamiltonian, PauliString, validate_partition
from .spectral import SpectralCache, leakage_norm, restricted_norm, spectral_norm

SERIES_ORDERS = tuple(range(1, 9))


@dataclass(frozen=True)
class Failure:
    point: dict
    error: str


@dataclass
class RunResult:
    rows: list
    failures: list[Failure] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass(frozen=True)
class Context:
    H: PartitionedHamiltonian
    f: FormulaSchedule
    cache: SpectralCache
    lam: float
    psd: bool
    config: ExperimentConfig

    @property
    def p(self) -> int:
        return self.f.order

    @property
    def bounded(self) -> bool:
        return self.p <= MAX_COEFF_ORDER


def prepare(config: ExperimentConfig) -> Context:
    """Build and validate the model, failing fast before any dense work."""
    H = config.build_model()
    if H.n_qubits > config.dense_limit:
        raise DimensionTooLarge(H.n_qubits, config.dense_limit)
    summary = validate_partition(H, config.dense_limit)
    f = config.build_schedule(H.M)
    if f.order > MAX_COEFF_ORDER and config.delta_prime["policy"] == "auto":
        raise ValidationError("delta_prime.policy",
                              f"automatic cutoffs need order <= {MAX_COEFF_ORDER}; use gaps")
    cache = hamiltonian_spectrum(H)
    group_spectra(H)
    lam = B.lambda_param(H.J, H.d, H.k) if H.J > 0 else math.inf
    return Context(H, f, cache, lam, summary.all_psd, config)


def cutoffs(ctx: Context) -> list[tuple[str, float]]:
    cfg = ctx.config
    if cfg.delta_values is not None:
        return [(f"{v:g}", v) for v in cfg.delta_values]
    return [(f"p{q:g}", ctx.cache.percentile(q)) for q in cfg.delta_percentiles]


def _run_grid(points: list[dict], fn, workers: int) -> RunResult:
    def guarded(pt):
        try:
            return fn(**pt), None
        except Exception as exc:  # one bad point must not sink the sweep
            return None, Failure(dict(pt), f"{type(exc).__name__}: {exc}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(guarded, points))
    else:
        outcomes = [guarded(pt) for pt in points]
    rows, failures = [], []
    for row, fail in outcomes:
        if fail is not None:
            failures.append(fail)
        elif isinstance(row, list):
            rows.extend(row)
        else:
            rows.append(row)
    return RunResult(rows, failures)


# --- analyze ---------------------------------------------------------------------

def _delta_primes(ctx: Context, s: float, delta: float) -> list[float]:
    policy = ctx.config.delta_prime
    if policy["policy"] == "gap":
        return [delta + g for g in policy["gaps"]]
    rw = B.R_W(ctx.f, ctx.H, s)
    return [B.select_delta_prime(delta, rw, ctx.lam, policy["theta"]).value]


def _chain(ctx: Context, delta_prime: float) -> B.CutoffChain:
    H, p = ctx.H, ctx.p
    ells = [B.ell_n(n, H.L, H.k, H.d, H.J) for n in range(p + 1)]
    norms = [restricted_norm(m, ctx.cache, delta_prime) for m in H.group_matrices]
    positive = [x for x in norms if x > 0]
    floor = min(positive) if positive else 1.0
    return B.auto_chain(delta_prime, p, ctx.lam, ells, ctx.config.chain_theta, floor)


def analyze_point(ctx: Context, s: float, delta: float) -> list[B.BoundReport]:
    H, f, p, cache, slack = ctx.H, ctx.f, ctx.p, ctx.cache, ctx.config.slack
    out = []
    eps = B.empirical_low_energy_error(f, H, s, delta, cache)
    for dp in _delta_primes(ctx, s, delta):
        retained, leak = B.error_decomposition(f, H, s, delta, dp, cache)
        leak_bound = retained_bound = psd_bound = delta_f = None
        extras = {}
        if ctx.bounded and H.J > 0:
            rw = B.R_W(f, H, s)
            leak_bound = B.formula_leakage_bound(delta, dp, ctx.lam, rw).value
            lead = s ** (p + 1) / (p + 1)
            retained_bound = slack * lead * restricted_commutator_bound_sum(f, H, cache, dp)
            chain = _chain(ctx, dp)
            delta_f = chain.delta_f
            extras["R_W"] = rw
            extras["chain_bound"] = lead * B.cutoff_chain_bound(H, f, p, chain, cache).value
            if ctx.psd:
                psd_bound = slack * B.psd_step_error_bound(s, p, delta_f, f_abs_sum(f, H))
            else:
                extras["delta_tilde_f"] = B.delta_tilde_f(H, cache, delta_f)
        elif H.J == 0:
            leak_bound, retained_bound = 0.0, 0.0
        out.append(B.BoundReport(H.name or "model", f.name, p, s, delta, dp, delta_f,
                                 eps, leak, retained, leak_bound, retained_bound, psd_bound,
                                 extras))
    return out


def run_analyze(config: ExperimentConfig) -> RunResult:
    ctx = prepare(config)
    points = [{"s": s, "delta": d} for s, (_, d) in product(config.s_grid, cutoffs(ctx))]
    result = _run_grid(points, lambda s, delta: analyze_point(ctx, s, delta), config.workers)
    result.rows.sort(key=lambda r: (r.s, r.delta, r.delta_prime))
    return result


# --- leakage ---------------------------------------------------------------------

def random_local_operator(n_qubits: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian operator on ``k`` adjacent qubits, built from all
    non-identity Pauli words there with Gaussian coefficients."""
    start = int(rng.integers(0, n_qubits - k + 1))
    out = np.zeros((1 << n_qubits, 1 << n_qubits), dtype=complex)
    for word in product("IXYZ", repeat=k):
        if set(word) == {"I"}:
            continue
        letters = {start + i: w for i, w in enumerate(word) if w != "I"}
        out += rng.normal() * PauliString.from_letters(n_qubits, letters).matrix()
    return out


def arad_sweep(ctx: Context, samples: int, grid: int, seed: int) -> list[dict]:
    H, cache = ctx.H, ctx.cache
    rng = np.random.default_rng(seed)
    R = B.default_R(H)
    lows = [cache.percentile(q) for q in np.linspace(10, 90, grid)]
    gaps = np.linspace(0.0, cache.e_max - cache.e_min, grid)
    rows = []
    for i in range(samples):
        A = random_local_operator(H.n_qubits, H.k, rng)
        norm_a = spectral_norm(A)
        for low, gap in product(lows, gaps):
            high = low + float(gap)
            bound = B.arad_leakage_bound(norm_a, R, ctx.lam, low, high)
            measured = leakage_norm(A, cache, low, high)
            rows.append({"kind": "arad", "sample": i, "low": low, "high": high,
                         "measured": measured, "bound": bound.value, "vacuous": bound.vacuous,
                         "verdict": "pass" if measured <= bound.value + B.VERDICT_TOL else "fail"})
    return rows


def formula_leakage_point(ctx: Context, s: float, delta: float) -> list[dict]:
    rows = []
    rw = B.R_W(ctx.f, ctx.H, s)
    for dp in _delta_primes(ctx, s, delta):
        bound = B.formula_leakage_bound(delta, dp, ctx.lam, rw)
        measured = B.empirical_leakage(ctx.f, ctx.H, s, delta, dp, ctx.cache)
        rows.append({"kind": "formula", "s": s, "low": delta, "high": dp, "R_W": rw,
                     "measured": measured, "bound": bound.value, "vacuous": bound.vacuous,
                     "verdict": "pass" if measured <= bound.value + B.VERDICT_TOL else "fail"})
    return rows


def run_leakage(config: ExperimentConfig) -> RunResult:
    ctx = prepare(config)
    if not ctx.bounded:
        raise ValidationError("schedule.order", f"leakage bounds need order <= {MAX_COEFF_ORDER}")
    result = RunResult(arad_sweep(ctx, config.arad_samples, config.arad_grid, config.seed))
    points = [{"s": s, "delta": d} for s, (_, d) in product(config.s_grid, cutoffs(ctx))]
    formula = _run_grid(points, lambda s, delta: formula_leakage_point(ctx, s, delta),
                        config.workers)
    formula.rows.sort(key=lambda r: (r["s"], r["low"], r["high"]))
    result.rows.extend(formula.rows)
    result.failures.extend(formula.failures)
    return result


# --- cost ------------------------------------------------------------------------

def exponent_table(orders) -> list[dict]:
    rows = []
    for p in orders:
        for method in METHODS:
            law = scaling_law(method, p)
            rows.append({"kind": "law", "method": method, "p": p, "law": str(law),
                         "n_exponent": str(n_exponent(method, p))})
    return rows


def n_exponent_series(orders=SERIES_ORDERS) -> list[dict]:
    return [{"kind": "n_exponents", "p": p, **{m: str(n_exponent(m, p)) for m in METHODS}}
            for p in orders]


def run_cost(config: ExperimentConfig) -> RunResult:
    ctx = prepare(config)
    rows = exponent_table(config.cost_orders)
    N = ctx.H.n_qubits
    failures = []
    for label, delta in cutoffs(ctx):
        width = max(delta - ctx.cache.e_min, np.finfo(float).tiny)
        for p in config.cost_orders:
            for method in METHODS:
                v = evaluate_law(scaling_law(method, p), config.T, N, width, config.eps)
                rows.append({"kind": "evaluated", "method": method, "p": p, "delta": delta,
                             "delta_width": width,
                             "value": v.value, "dominant": v.dominant})
        found = {}
        for scope, cut in (("restricted", delta), ("full", None)):
            try:
                found[scope] = empirical_trotter_number(ctx.f, ctx.H, cut, config.T, config.eps,
                                                        ctx.cache)
            except RNotFoundWithinBudget as exc:
                failures.append(Failure({"delta": delta, "scope": scope}, str(exc)))
        if found:
            row = {"kind": "empirical", "schedule": ctx.f.name, "delta": delta}
            for scope, tn in found.items():
                row[f"r_{scope}"] = tn.r
                row[f"error_{scope}"] = tn.error
            rows.append(row)
    rows.extend(n_exponent_series())
    return RunResult(rows, failures)
