"""Symbolic nested commutators of Hamiltonian groups and the commutator-norm
sums that bound product-formula error.

Nested commutators are indexed outermost-first: ``(m_p, ..., m_1, m)`` stands
for ``[H_{m_p}, ..., [H_{m_1}, H_m]...]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Sequence

import numpy as np

from .formulas import FormulaSchedule
from .pauli_model import (
    DENSE_LIMIT,
    DimensionTooLarge,
    LocalTerm,
    PartitionedHamiltonian,
    PauliString,
    pauli_product,
)
from .spectral import SpectralCache, restricted_norm, spectral_norm

MAX_NESTED_ORDER = 4
# closed-form F-expansion coefficients are available through this order
MAX_COEFF_ORDER = 3
ZERO_TOL = 1e-14


class OrderTooLarge(ValueError):
    def __init__(self, order: int, limit: int):
        super().__init__(f"order {order} exceeds the supported maximum {limit}")
        self.order = order
        self.limit = limit


@dataclass
class OperatorSum:
    """Canonical sum of Pauli terms with complex coefficients.

    Unfused bookkeeping: ``paths`` counts, per word, the chains of
    single-term commutators that produce it, ``n_products`` is their total
    (including chains that cancelled on fusion), and ``single`` holds the
    largest magnitude of one chain.
    """

    n_qubits: int
    coeffs: dict[tuple[int, int], complex] = field(default_factory=dict)
    n_products: int = 0
    single: dict[tuple[int, int], float] = field(default_factory=dict)
    paths: dict[tuple[int, int], int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def terms(self) -> list[LocalTerm]:
        return [LocalTerm(PauliString(self.n_qubits, x, z), c)
                for (x, z), c in sorted(self.coeffs.items())]

    @property
    def max_support(self) -> int:
        return max((bin(x | z).count("1") for x, z in self.coeffs), default=0)

    @property
    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    @property
    def max_single_coeff(self) -> float:
        return max(self.single.values(), default=0.0)

    def matrix(self, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
        if self.n_qubits > dense_limit:
            raise DimensionTooLarge(self.n_qubits, dense_limit)
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            out += t.matrix(dense_limit)
        return out


def _group_sum(H: PartitionedHamiltonian, m: int) -> OperatorSum:
    g = H.groups[m]
    coeffs = {(t.pauli.x, t.pauli.z): complex(t.coefficient) for t in g.terms}
    return OperatorSum(H.n_qubits, coeffs, len(coeffs),
                       {k: abs(c) for k, c in coeffs.items()}, dict.fromkeys(coeffs, 1))


def commutator_sum(A: OperatorSum, B: OperatorSum) -> OperatorSum:
    """``[A, B]``, fused and with near-zero coefficients dropped."""
    n = A.n_qubits
    acc: dict[tuple[int, int], complex] = {}
    single: dict[tuple[int, int], float] = {}
    paths: dict[tuple[int, int], int] = {}
    for (xa, za), ca in A.coeffs.items():
        pa = PauliString(n, xa, za)
        sa = A.single.get((xa, za), abs(ca))
        na = A.paths.get((xa, za), 1)
        for (xb, zb), cb in B.coeffs.items():
            if (bin(xa & zb).count("1") + bin(za & xb).count("1")) % 2 == 0:
                continue
            phase, c = pauli_product(pa, PauliString(n, xb, zb))
            key = (c.x, c.z)
            acc[key] = acc.get(key, 0.0) + 2 * phase * ca * cb
            mag = 2 * sa * B.single.get((xb, zb), abs(cb))
            single[key] = max(single.get(key, 0.0), mag)
            paths[key] = paths.get(key, 0) + na * B.paths.get((xb, zb), 1)
    count = sum(paths.values())
    acc = {k: v for k, v in acc.items() if abs(v) > ZERO_TOL}
    return OperatorSum(n, acc, count, {k: single[k] for k in acc}, {k: paths[k] for k in acc})


def expand_nested(H: PartitionedHamiltonian, indices: Sequence[int],
                  max_order: int = MAX_NESTED_ORDER) -> OperatorSum:
    """Expand ``[H_{indices[0]}, ..., [H_{indices[-2]}, H_{indices[-1]}]...]``
    term by term, fusing after every level."""
    indices = tuple(indices)
    if not indices:
        raise ValueError("need at least one group index")
    for m in indices:
        if not 0 <= m < H.M:
            raise ValueError(f"group index {m} out of range for M={H.M}")
    n = len(indices) - 1
    if n > max_order:
        raise OrderTooLarge(n, max_order)
    return _expand_cached(H, indices)


@lru_cache(maxsize=4096)
def _expand_cached(H: PartitionedHamiltonian, indices: tuple[int, ...]) -> OperatorSum:
    if len(indices) == 1:
        return _group_sum(H, indices[0])
    inner = _expand_cached(H, indices[1:])
    if not inner.coeffs:
        return OperatorSum(H.n_qubits)
    return commutator_sum(_group_sum(H, indices[0]), inner)


@lru_cache(maxsize=4096)
def nested_matrix(H: PartitionedHamiltonian, indices: tuple[int, ...]) -> np.ndarray:
    mat = expand_nested(H, indices).matrix()
    mat.setflags(write=False)
    return mat


def count_bounds(n: int, L: int, k: int, d: int, J: float) -> tuple[int, int, float]:
    """Upper bounds on (number of terms, support, strength) in an order-``n``
    nested commutator: ``L (kd)^n n!``, ``(n+1) k`` and ``J^(n+1)``."""
    if n < 0:
        raise ValueError("order must be non-negative")
    return L * (k * d) ** n * math.factorial(n), (n + 1) * k, J ** (n + 1)


@dataclass(frozen=True)
class CoefficientTable:
    """Coefficients of ``F(s) = H + sum_n (-is)^n sum f [..]`` by order.

    ``stage[n]`` maps stage tuples ``(nu_n, ..., nu_1, nu)`` to f-tilde values,
    ``group[n]`` maps group tuples ``(m_n, ..., m_1, m)`` to their aggregate.
    Tuples whose innermost pair repeats a group are dropped: ``[H_m, H_m] = 0``.
    """

    up_to: int
    stage: dict[int, dict[tuple[int, ...], float]]
    group: dict[int, dict[tuple[int, ...], float]]


def _multiplicity_factor(seq: Sequence[int]) -> int:
    out = 1
    for v in set(seq):
        out *= math.factorial(seq.count(v))
    return out


def expand_F_coefficients(f: FormulaSchedule, up_to: int) -> CoefficientTable:
    """Closed-form f-tilde: for ``nu < nu_1 <= ... <= nu_n``,
    ``a_nu a_nu1 ... a_nun / prod(multiplicity!)``."""
    if up_to > MAX_COEFF_ORDER:
        raise OrderTooLarge(up_to, MAX_COEFF_ORDER)
    return _coefficients(f, up_to)


@lru_cache(maxsize=64)
def _coefficients(f: FormulaSchedule, up_to: int) -> CoefficientTable:
    a = f.coefficients
    g = f.groups
    q = f.q
    stage: dict[int, dict] = {}
    group: dict[int, dict] = {}
    for n in range(1, up_to + 1):
        st: dict[tuple[int, ...], float] = {}
        gr: dict[tuple[int, ...], float] = {}
        for nu in range(q):
            for inner in combinations_with_replacement(range(nu + 1, q), n):
                if g[inner[0]] == g[nu]:
                    continue
                w = a[nu]
                for v in inner:
                    w *= a[v]
                w /= _multiplicity_factor(inner)
                key = tuple(reversed(inner)) + (nu,)
                st[key] = w
                gkey = tuple(g[v] for v in key)
                gr[gkey] = gr.get(gkey, 0.0) + w
        stage[n] = st
        group[n] = {k: v for k, v in gr.items() if abs(v) > ZERO_TOL}
    return CoefficientTable(up_to, stage, group)


def aggregated_commutator(f: FormulaSchedule, H: PartitionedHamiltonian, n: int) -> np.ndarray:
    """Dense ``sum f_{{m_i},m} [H_{m_n}, ..., [H_{m_1}, H_m]]`` at order ``n``.

    For an order-``p`` schedule this vanishes for every ``n < p``.
    """
    table = expand_F_coefficients(f, n)
    dim = 1 << H.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for key, w in table.group[n].items():
        out += w * nested_matrix(H, key)
    return out


def _resolve_order(f: FormulaSchedule, p: int | None) -> int:
    p = f.order if p is None else p
    if p > MAX_COEFF_ORDER:
        raise OrderTooLarge(p, MAX_COEFF_ORDER)
    return p


def surviving_entries(f: FormulaSchedule, H: PartitionedHamiltonian,
                      p: int | None = None) -> dict[tuple[int, ...], float]:
    """Order-``p`` aggregated coefficients whose nested commutator is nonzero on ``H``."""
    p = _resolve_order(f, p)
    table = expand_F_coefficients(f, p)
    return {k: w for k, w in table.group[p].items() if len(expand_nested(H, k))}


def f_abs_sum(f: FormulaSchedule, H: PartitionedHamiltonian, p: int | None = None) -> float:
    return float(sum(abs(w) for w in surviving_entries(f, H, p).values()))


def commutator_bound_sum(f: FormulaSchedule, H: PartitionedHamiltonian,
                         p: int | None = None) -> float:
    """``sum |f| ||[H_{m_p}, ..., [H_{m_1}, H_m]]||``; the leading single-step bound is
    ``s^(p+1) / (p+1)`` times this."""
    return float(sum(abs(w) * spectral_norm(nested_matrix(H, k))
                     for k, w in surviving_entries(f, H, p).items()))


def restricted_commutator_bound_sum(f: FormulaSchedule, H: PartitionedHamiltonian,
                                    cache: SpectralCache, delta_prime: float,
                                    p: int | None = None) -> float:
    """Same sum with every norm restricted to energies ``<= delta_prime``."""
    return float(sum(abs(w) * restricted_norm(nested_matrix(H, k), cache, delta_prime)
                     for k, w in surviving_entries(f, H, p).items()))


def all_nested_specs(M: int, n: int):
    """Every index tuple of order ``n`` with a non-trivial innermost pair."""
    for key in product(range(M), repeat=n + 1):
        if n == 0 or key[-1] != key[-2]:
            yield key
