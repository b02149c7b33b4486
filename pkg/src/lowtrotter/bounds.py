"""Analytic low-energy error bounds and the empirical quantities they dominate.

All exponential leakage bounds report whether they are vacuous, i.e. no better
than the trivial bound (1 for blocks of a unitary, ``||A||`` otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .commutators import f_abs_sum, surviving_entries
from .formulas import FormulaSchedule, apply_formula, hamiltonian_spectrum
from .pauli_model import PartitionedHamiltonian
from .spectral import SpectralCache, evolve, leakage_norm, restricted_norm, spectral_norm

DEFAULT_SLACK = 1.25
VERDICT_TOL = 1e-12


class InvalidChain(ValueError):
    pass


class EmptySubspace(ValueError):
    pass


class ExpBound(NamedTuple):
    value: float
    vacuous: bool


def lambda_param(J: float, d: int, k: int) -> float:
    """Leakage rate ``1 / (2 J d k)``."""
    if J <= 0 or d <= 0 or k <= 0:
        raise ValueError("J, d and k must be positive")
    return 1.0 / (2.0 * J * d * k)


def ell_n(n: int, L: int, k: int, d: int, J: float) -> float:
    """Leakage prefactor of an order-``n`` nested commutator,
    ``L n! (J k d e)^n e J``.

    Evaluated also as (term count) x (strength) x ``exp(2 lambda R)`` with
    ``R = J (n+1) k d``; the two must agree.
    """
    if n < 0:
        raise ValueError("order must be non-negative")
    closed = L * math.factorial(n) * (J * k * d * math.e) ** n * math.e * J
    lam = lambda_param(J, d, k)
    counted = (L * (k * d) ** n * math.factorial(n)) * J ** (n + 1) \
        * math.exp(2 * lam * J * k * d * (n + 1))
    if not math.isclose(closed, counted, rel_tol=1e-12):
        raise ArithmeticError(f"ell_{n} forms disagree: {closed} vs {counted}")
    return closed


def arad_leakage_bound(norm_a: float, R: float, lam: float, low: float,
                       high: float) -> ExpBound:
    """``||P_{>high} A P_{<=low}|| <= ||A|| exp(-lam (high - low - 2R))``."""
    if high < low:
        raise ValueError("upper cutoff must not be below the lower cutoff")
    value = norm_a * math.exp(-lam * (high - low - 2 * R))
    return ExpBound(value, value >= norm_a)


def default_R(H: PartitionedHamiltonian) -> float:
    """``R <= k J d`` for a single k-local operator."""
    return H.k * H.J * H.d


def R_W(f: FormulaSchedule, H: PartitionedHamiltonian, s: float) -> float:
    """Leading-order leakage radius of the formula,
    ``s^(p+1)/(p+1) * ell_p / lambda * sum |f|``.

    The sum runs over order-``p`` entries whose nested commutator is nonzero
    on ``H``, so commuting groups give 0.
    """
    p = f.order
    fsum = f_abs_sum(f, H, p)
    if fsum == 0:
        return 0.0
    lam = lambda_param(H.J, H.d, H.k)
    return s ** (p + 1) / (p + 1) * ell_n(p, H.L, H.k, H.d, H.J) / lam * fsum


def formula_leakage_bound(delta: float, delta_prime: float, lam: float,
                          r_w_value: float) -> ExpBound:
    if delta_prime < delta:
        raise ValueError("delta_prime must be >= delta")
    value = math.exp(-lam * (delta_prime - delta - 2 * r_w_value))
    return ExpBound(value, value >= 1.0)


class DeltaPrime(NamedTuple):
    value: float
    radius_term: float
    log_term: float


def select_delta_prime(delta: float, r_w_value: float, lam: float,
                       theta: float) -> DeltaPrime:
    """Smallest ``delta'`` for which the formula leakage bound is ``<= theta``:
    ``delta + 2 R^W + ln(1/theta) / lam``."""
    if not 0 < theta <= 1:
        raise ValueError("target leakage must lie in (0, 1]")
    radius = 2 * r_w_value
    log_term = math.log(1 / theta) / lam
    return DeltaPrime(delta + radius + log_term, radius, log_term)


# --- cutoff chains ---------------------------------------------------------------

@dataclass(frozen=True)
class CutoffChain:
    """``delta' < delta_1 < ... < delta_{p-1} = delta_f``; for ``p = 1`` the chain
    is just ``delta'``."""

    delta_prime: float
    cutoffs: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "cutoffs", tuple(float(c) for c in self.cutoffs))
        prev = self.delta_prime
        for c in self.cutoffs:
            if not c > prev:
                raise InvalidChain("cutoffs must be strictly ascending")
            prev = c

    @property
    def levels(self) -> tuple[float, ...]:
        return (self.delta_prime,) + self.cutoffs

    @property
    def delta_f(self) -> float:
        return self.levels[-1]

    @property
    def span(self) -> float:
        return self.delta_f - self.delta_prime


def auto_chain(delta_prime: float, p: int, lam: float, ells: Sequence[float],
               theta: float = 0.1, norm_floor: float = 1.0) -> CutoffChain:
    """Space cutoffs so each leakage row is at most ``theta / p`` of the final term.

    Gap ``j`` is ``ln(p 2^j ell_0 ell_{p-j} / (theta * 2^p * norm_floor^(p+2-j))) / (2 lam)``
    where ``norm_floor`` lower-bounds the restricted group norms at ``delta'``.
    Gaps grow only logarithmically with ``L`` through ``ell``.
    """
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    if norm_floor <= 0:
        raise ValueError("norm_floor must be positive")
    if len(ells) < p:
        raise ValueError(f"need ell_0 .. ell_{p - 1}")
    cutoffs = []
    level = delta_prime
    for j in range(1, p):
        ratio = p * 2**j * ells[0] * ells[p - j] / (theta * 2**p * norm_floor ** (p + 2 - j))
        gap = math.log(ratio) / (2 * lam)
        level = level + max(gap, 1e-9 * max(1.0, abs(level)))
        cutoffs.append(level)
    return CutoffChain(delta_prime, tuple(cutoffs))


@dataclass(frozen=True)
class ChainBound:
    """f-weighted cutoff-chain bracket (multiply by ``s^(p+1)/(p+1)`` for the bound)."""

    value: float
    leakage_terms: tuple[float, ...]
    final_term: float

    @property
    def leakage_share(self) -> float:
        return sum(self.leakage_terms) / self.value if self.value else 0.0


def cutoff_chain_bound(H: PartitionedHamiltonian, f: FormulaSchedule, p: int | None,
                       chain: CutoffChain, cache: SpectralCache) -> ChainBound:
    """Resolve each order-``p`` nested commutator through the cutoff chain.

    Row ``j = 1..p-1``: ``2^j * prod_{i<j} ||H_{m_{p-i+1}}||_{<=delta_i} * ell_0 ell_{p-j}
    * exp(-2 lam (delta_j - delta_{j-1}))``. Final row: ``2^p`` times ``p+1``
    restricted group norms, the outer ``p-1`` at their chain cutoffs and the
    innermost pair at ``delta_f``.
    """
    p = f.order if p is None else p
    levels = chain.levels
    if len(levels) != max(p, 1):
        raise InvalidChain(f"an order-{p} bound needs {max(p, 1)} chain levels, got {len(levels)}")
    lam = lambda_param(H.J, H.d, H.k)
    ells = [ell_n(n, H.L, H.k, H.d, H.J) for n in range(p)]
    mats = H.group_matrices
    norm_cache: dict[tuple[int, float], float] = {}

    def rnorm(m: int, cutoff: float) -> float:
        key = (m, cutoff)
        if key not in norm_cache:
            norm_cache[key] = restricted_norm(mats[m], cache, cutoff)
        return norm_cache[key]

    leak = [0.0] * (p - 1)
    final = 0.0
    for key, w in surviving_entries(f, H, p).items():
        w = abs(w)
        prefix = 1.0
        for j in range(1, p):
            expo = math.exp(-2 * lam * (levels[j] - levels[j - 1]))
            leak[j - 1] += w * 2**j * prefix * ells[0] * ells[p - j] * expo
            prefix *= rnorm(key[j - 1], levels[j])
        innermost = rnorm(key[p - 1], chain.delta_f) * rnorm(key[p], chain.delta_f)
        final += w * 2**p * prefix * innermost
    return ChainBound(sum(leak) + final, tuple(leak), final)


def psd_step_error_bound(s: float, p: int, delta_f: float, f_sum: float) -> float:
    """Dominant single-step bound for positive-semidefinite groups,
    ``s^(p+1)/(p+1) * 2^p * f_sum * delta_f^(p+1)``."""
    return s ** (p + 1) / (p + 1) * 2**p * f_sum * delta_f ** (p + 1)


def group_delta_tilde(group_matrix: np.ndarray, cache: SpectralCache, delta_f: float) -> float:
    v = cache.basis_leq(delta_f)
    if v.shape[1] == 0:
        raise EmptySubspace(f"no eigenstates at or below {delta_f}")
    ev = np.linalg.eigvalsh(v.conj().T @ group_matrix @ v)
    return float(ev[-1] - ev[0]) / 2


def delta_tilde_f(H: PartitionedHamiltonian, cache: SpectralCache, delta_f: float) -> float:
    """``max_m min_C ||P (H_m + C) P||``; the optimal constant centres the
    compressed block's spectrum, leaving half its spread."""
    return max(group_delta_tilde(m, cache, delta_f) for m in H.group_matrices)


# --- empirical quantities --------------------------------------------------------

def _propagators(f, H, s, cache):
    cache = hamiltonian_spectrum(H) if cache is None else cache
    return apply_formula(f, H, s), evolve(cache, s), cache


def empirical_low_energy_error(f: FormulaSchedule, H: PartitionedHamiltonian, s: float,
                               delta: float | None, cache: SpectralCache | None = None) -> float:
    """``||(W(s) - exp(-iHs)) P_{<=delta}||``; ``delta=None`` means the full space."""
    W, U, cache = _propagators(f, H, s, cache)
    if delta is None:
        return spectral_norm(W - U)
    return spectral_norm((W - U) @ cache.basis_leq(delta))


def empirical_leakage(f: FormulaSchedule, H: PartitionedHamiltonian, s: float, delta: float,
                      delta_prime: float, cache: SpectralCache | None = None) -> float:
    """``||P_{>delta'} W(s) P_{<=delta}||``."""
    if delta_prime < delta:
        raise ValueError("delta_prime must be >= delta")
    W, _, cache = _propagators(f, H, s, cache)
    return leakage_norm(W, cache, delta, delta_prime)


class Decomposition(NamedTuple):
    retained: float
    leakage: float


def error_decomposition(f: FormulaSchedule, H: PartitionedHamiltonian, s: float, delta: float,
                        delta_prime: float, cache: SpectralCache | None = None) -> Decomposition:
    """Split the low-energy error into the block kept below ``delta'`` and the
    leakage above it; their sum bounds ``eps_delta``."""
    if delta_prime < delta:
        raise ValueError("delta_prime must be >= delta")
    W, U, cache = _propagators(f, H, s, cache)
    low = cache.basis_leq(delta)
    diff = (W - U) @ low
    retained = spectral_norm(cache.basis_leq(delta_prime).conj().T @ diff)
    leak = spectral_norm(cache.basis_gt(delta_prime).conj().T @ W @ low)
    total = spectral_norm(diff)
    if total > retained + leak + 1e-10:
        raise ArithmeticError(f"triangle inequality violated: {total} > {retained} + {leak}")
    return Decomposition(retained, leak)


# --- reports ---------------------------------------------------------------------

def _verdict(empirical: float, bound: float | None) -> str:
    if bound is None:
        return "na"
    return "pass" if empirical <= bound + VERDICT_TOL else "fail"


@dataclass(frozen=True)
class BoundReport:
    """One grid point. Leading-order bounds already include the remainder
    slack; ``None`` marks a bound that does not apply (order > 3, or non-PSD
    groups for the step bound). Verdicts are derived from the stored numbers."""

    model: str
    schedule: str
    p: int
    s: float
    delta: float
    delta_prime: float
    delta_f: float | None
    eps_empirical: float
    leakage_empirical: float
    retained_empirical: float
    leakage_bound: float | None
    retained_bound: float | None
    psd_bound: float | None
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def verdict_leakage(self) -> str:
        return _verdict(self.leakage_empirical, self.leakage_bound)

    @property
    def verdict_retained(self) -> str:
        return _verdict(self.retained_empirical, self.retained_bound)

    @property
    def verdict_psd(self) -> str:
        return _verdict(self.eps_empirical, self.psd_bound)

    @property
    def vacuity_flags(self) -> str:
        flags = []
        if self.leakage_bound is not None and self.leakage_bound >= 1.0:
            flags.append("leakage")
        if self.retained_bound is not None and self.retained_bound >= 2.0:
            flags.append("retained")
        if self.psd_bound is not None and self.psd_bound >= 2.0:
            flags.append("psd")
        return "|".join(flags)

    @property
    def passed(self) -> bool:
        return "fail" not in (self.verdict_leakage, self.verdict_retained, self.verdict_psd)
