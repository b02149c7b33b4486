"""Trotter-number cost laws and an empirical minimal-``r`` search.

Laws are sums of monomials over ``T``, ``N``, ``Delta`` and ``eps`` with exact
rational exponents. They carry no hidden constants: evaluation multiplies by an
explicit ``unit_constant``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, NamedTuple

from .bounds import empirical_low_energy_error
from .formulas import FormulaSchedule, hamiltonian_spectrum
from .pauli_model import PartitionedHamiltonian
from .spectral import SpectralCache

VARIABLES = ("T", "N", "Delta", "eps")
METHODS = ("general", "prior", "present")
R_MAX = 2**20


class RNotFoundWithinBudget(RuntimeError):
    pass


class NonMonotoneSearch(RuntimeError):
    pass


@dataclass(frozen=True)
class Monomial:
    exponents: tuple[tuple[str, Fraction], ...]

    @classmethod
    def of(cls, **exps) -> "Monomial":
        for v in exps:
            if v not in VARIABLES:
                raise ValueError(f"unknown variable {v!r}")
        return cls(tuple((v, Fraction(exps[v])) for v in VARIABLES if v in exps))

    def exponent(self, var: str) -> Fraction:
        return dict(self.exponents).get(var, Fraction(0))

    def evaluate(self, values: Mapping[str, float]) -> float:
        out = 1.0
        for v, e in self.exponents:
            out *= values[v] ** float(e)
        return out

    def __str__(self) -> str:
        parts = []
        for v, e in self.exponents:
            parts.append(v if e == 1 else f"{v}^({e})")
        return " ".join(parts) or "1"


@dataclass(frozen=True)
class ScalingLaw:
    method: str
    p: int
    terms: tuple[Monomial, ...]
    polylog: bool = False

    def __post_init__(self):
        for t in self.terms:
            if t.exponent("eps") > 0:
                raise ValueError("eps exponents must be nonpositive")

    def __str__(self) -> str:
        body = " + ".join(str(t) for t in self.terms)
        return body + (" (up to polylog)" if self.polylog else "")


def _check_p(p: int) -> None:
    if p < 1:
        raise ValueError("order p must be >= 1")


def _low_energy_term(p: int) -> Monomial:
    e = 1 + Fraction(1, p)
    return Monomial.of(T=e, Delta=e, eps=-Fraction(1, p))


def scaling_general(p: int) -> ScalingLaw:
    _check_p(p)
    return ScalingLaw("general", p, (
        Monomial.of(T=1 + Fraction(1, p), N=Fraction(1, p), eps=-Fraction(1, p)),))


def scaling_prior_low_energy(p: int) -> ScalingLaw:
    _check_p(p)
    den = 2 * p + 1
    return ScalingLaw("prior", p, (
        _low_energy_term(p),
        Monomial.of(T=Fraction(2 * p + 2, den), N=Fraction(p + 1, den), eps=-Fraction(1, den)),
    ), polylog=True)


def scaling_present(p: int) -> ScalingLaw:
    _check_p(p)
    den = (p + 1) ** 2 + p
    return ScalingLaw("present", p, (
        _low_energy_term(p),
        Monomial.of(T=1 + Fraction(1, den), N=Fraction(p + 1, den), eps=-Fraction(1, den)),
    ), polylog=True)


LAWS = {"general": scaling_general, "prior": scaling_prior_low_energy, "present": scaling_present}


def scaling_law(method: str, p: int) -> ScalingLaw:
    try:
        return LAWS[method](p)
    except KeyError:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}") from None


def n_exponent(method: str, p: int) -> Fraction:
    """Exponent of ``N`` in the system-size-dependent term, from the closed forms.

    Each closed form is checked against the exponent stored in the law.
    """
    _check_p(p)
    if method == "general":
        value = Fraction(1, p)
    elif method == "prior":
        value = Fraction(1, 2) + Fraction(1, 4 * p + 2)
    elif method == "present":
        value = Fraction(p + 1, (p + 1) ** 2 + p)
        alt = 1 / (p + 1 + Fraction(p, p + 1))
        if value != alt:
            raise ArithmeticError(f"closed forms disagree at p={p}: {value} vs {alt}")
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    stored = scaling_law(method, p).terms[-1].exponent("N")
    if stored != value:
        raise ArithmeticError(f"{method} p={p}: law has N^{stored}, closed form {value}")
    return value


class LawValue(NamedTuple):
    value: float
    dominant: int
    term_values: tuple[float, ...]


def evaluate_law(law: ScalingLaw, T: float, N: float, Delta: float, eps: float,
                 unit_constant: float = 1.0) -> LawValue:
    """Sum of monomials times ``unit_constant``; ``dominant`` indexes the largest term."""
    for name, v in (("T", T), ("N", N), ("Delta", Delta), ("eps", eps)):
        if v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")
    if eps >= 1:
        raise ValueError("eps must be < 1")
    if unit_constant < 0:
        raise ValueError("unit_constant must be nonnegative")
    values = {"T": T, "N": N, "Delta": Delta, "eps": eps}
    terms = tuple(unit_constant * t.evaluate(values) for t in law.terms)
    dominant = max(range(len(terms)), key=terms.__getitem__)
    return LawValue(sum(terms), dominant, terms)


# --- empirical search ------------------------------------------------------------

class TrotterNumber(NamedTuple):
    r: int
    error: float


def empirical_trotter_number(f: FormulaSchedule, H: PartitionedHamiltonian, delta: float | None,
                             T: float, eps_target: float, cache: SpectralCache | None = None,
                             r_max: int = R_MAX) -> TrotterNumber:
    """Smallest ``r`` with ``r * eps_delta(T / r) <= eps_target``.

    ``delta=None`` uses the full-space error. Doubling finds a bracket, then
    bisection narrows it; the bracket ends are re-checked for monotonicity.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    if not 0 < eps_target < 1:
        raise ValueError("eps_target must lie in (0, 1)")
    cache = hamiltonian_spectrum(H) if cache is None else cache
    memo: dict[int, float] = {}

    def total(r: int) -> float:
        if r not in memo:
            memo[r] = r * empirical_low_energy_error(f, H, T / r, delta, cache)
        return memo[r]

    if total(1) <= eps_target:
        return TrotterNumber(1, total(1))
    lo, hi = 1, 2
    while total(hi) > eps_target:
        if hi >= r_max:
            raise RNotFoundWithinBudget(
                f"r*eps(T/r) = {total(hi):.3g} > {eps_target} at r = {hi} (cap {r_max})")
        lo, hi = hi, min(2 * hi, r_max)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if total(mid) <= eps_target:
            hi = mid
        else:
            lo = mid
    if total(hi + 1) > eps_target:
        raise NonMonotoneSearch(f"accumulated error is not decreasing near r = {hi}")
    return TrotterNumber(hi, total(hi))
