"""Product-formula schedules, their dense application, and the exact error
generators ``F(s)`` and ``E(s) = F(s) - H``.

A schedule is a list of stages ``(m, a)``: exponentiate group ``m`` for time
``a * s``. Group indices are 0-based and the first stage acts first, so
``W(s) = exp(-i a_q s H_{m_q}) ... exp(-i a_1 s H_{m_1})``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .pauli_model import PartitionedHamiltonian
from .spectral import SpectralCache, eigendecompose, evolve, spectral_norm

CONSISTENCY_TOL = 1e-10
FIT_CEILING = 1e-3
FIT_FLOOR = 1e-12
# the integral route computes W - U without subtracting O(1) unitaries
INTEGRAL_FIT_FLOOR = 1e-20


class NonAsymptoticGrid(ValueError):
    pass


class DegenerateFit(ValueError):
    pass


@dataclass(frozen=True)
class FormulaSchedule:
    stages: tuple[tuple[int, float], ...]
    order: int
    name: str = "custom"

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("declared order must be positive")
        fused: list[list] = []
        for m, a in self.stages:
            m, a = int(m), float(a)
            if m < 0:
                raise ValueError("group indices are 0-based and non-negative")
            if fused and fused[-1][0] == m:
                fused[-1][1] += a
            else:
                fused.append([m, a])
        if not fused:
            raise ValueError("a schedule needs at least one stage")
        stages = tuple((m, a) for m, a in fused)
        object.__setattr__(self, "stages", stages)
        for m, total in self.group_sums().items():
            if abs(total - 1.0) > CONSISTENCY_TOL:
                raise ValueError(f"coefficients of group {m} sum to {total}, not 1")

    @property
    def q(self) -> int:
        return len(self.stages)

    @property
    def groups(self) -> tuple[int, ...]:
        return tuple(m for m, _ in self.stages)

    @property
    def coefficients(self) -> tuple[float, ...]:
        return tuple(a for _, a in self.stages)

    def group_sums(self) -> dict[int, float]:
        sums: dict[int, float] = {}
        for m, a in self.stages:
            sums[m] = sums.get(m, 0.0) + a
        return sums


def lie_trotter(M: int) -> FormulaSchedule:
    if M < 1:
        raise ValueError("M must be >= 1")
    return FormulaSchedule(tuple((m, 1.0) for m in range(M)), 1, "lie_trotter")


def _strang_stages(M: int, c: float = 1.0) -> list[tuple[int, float]]:
    half = [(m, c / 2) for m in range(M - 1)]
    return half + [(M - 1, c)] + half[::-1]


def strang(M: int) -> FormulaSchedule:
    if M < 1:
        raise ValueError("M must be >= 1")
    return FormulaSchedule(tuple(_strang_stages(M)), 2, "strang")


def suzuki_u(kappa: int) -> float:
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * kappa - 1)))


def suzuki(order: int, M: int) -> FormulaSchedule:
    """Suzuki's fractal recursion
    ``S_2k(s) = S_{2k-2}(u s)^2 S_{2k-2}((1 - 4u) s) S_{2k-2}(u s)^2``."""
    if order < 2 or order % 2:
        raise ValueError(f"Suzuki formulas have even order >= 2, got {order}")
    if M < 1:
        raise ValueError("M must be >= 1")

    def build(kappa: int, c: float) -> list[tuple[int, float]]:
        if kappa == 1:
            return _strang_stages(M, c)
        u = suzuki_u(kappa)
        outer = build(kappa - 1, u * c)
        return outer * 2 + build(kappa - 1, (1 - 4 * u) * c) + outer * 2

    name = "strang" if order == 2 else f"suzuki{order}"
    return FormulaSchedule(tuple(build(order // 2, 1.0)), order, name)


def schedule_by_name(name: str, M: int, order: int | None = None) -> FormulaSchedule:
    key = name.lower().replace("-", "_")
    if key in ("lie_trotter", "trotter", "lie"):
        return lie_trotter(M)
    if key == "strang":
        return strang(M)
    if key.startswith("suzuki"):
        if order is None:
            suffix = key[len("suzuki"):].lstrip("_")
            order = int(suffix) if suffix else 4
        return suzuki(order, M)
    raise ValueError(f"unknown schedule {name!r}")


# --- dense application ---------------------------------------------------------

@lru_cache(maxsize=32)
def group_spectra(H: PartitionedHamiltonian) -> tuple[SpectralCache, ...]:
    return tuple(eigendecompose(m) for m in H.group_matrices)


@lru_cache(maxsize=32)
def hamiltonian_spectrum(H: PartitionedHamiltonian) -> SpectralCache:
    return eigendecompose(H.matrix)


def _check_schedule(f: FormulaSchedule, H: PartitionedHamiltonian) -> None:
    used = set(f.groups)
    if max(used) >= H.M:
        raise ValueError(f"schedule uses group {max(used)} but H has {H.M} groups")
    missing = set(range(H.M)) - used
    if missing:
        raise ValueError(f"schedule never applies groups {sorted(missing)}")


def apply_formula(f: FormulaSchedule, H: PartitionedHamiltonian, s: float) -> np.ndarray:
    """Dense ``W(s)``."""
    _check_schedule(f, H)
    spectra = group_spectra(H)
    W = np.eye(1 << H.n_qubits, dtype=complex)
    for m, a in f.stages:
        W = evolve(spectra[m], a * s) @ W
    return W


def _conjugation_shift(c: SpectralCache, theta: float, X: np.ndarray) -> np.ndarray:
    """``exp(-i theta A) X exp(i theta A) - X`` without cancellation.

    In the eigenbasis of ``A`` entry ``(a, b)`` is scaled by
    ``exp(-i y) - 1 = -2i sin(y/2) exp(-i y/2)``, ``y = theta (e_a - e_b)``.
    """
    v = c.eigenvectors
    y = theta * (c.eigenvalues[:, None] - c.eigenvalues[None, :])
    factor = -2j * np.sin(y / 2) * np.exp(-0.5j * y)
    return v @ ((v.conj().T @ X @ v) * factor) @ v.conj().T


def E_operator(f: FormulaSchedule, H: PartitionedHamiltonian, s: float) -> np.ndarray:
    """``E(s) = F(s) - H`` with ``F(s) = sum_nu a_nu V_nu H_{m_nu} V_nu^dagger``.

    Each conjugation is accumulated as a small increment so that the O(s^p)
    result is not buried under the O(||H||) rounding of ``F - H``.
    """
    _check_schedule(f, H)
    spectra = group_spectra(H)
    mats = H.group_matrices
    dim = 1 << H.n_qubits
    E = np.zeros((dim, dim), dtype=complex)
    stages = f.stages
    for nu, (m, a) in enumerate(stages):
        X = np.array(mats[m], dtype=complex)
        D = np.zeros_like(X)
        for mj, aj in stages[nu + 1:]:
            step = _conjugation_shift(spectra[mj], aj * s, X)
            D += step
            X += step
        E += a * D
    return (E + E.conj().T) / 2


def F_operator(f: FormulaSchedule, H: PartitionedHamiltonian, s: float) -> np.ndarray:
    """Generator of the formula: ``dW/ds = -i F(s) W(s)``."""
    return H.matrix + E_operator(f, H, s)


@dataclass(frozen=True)
class IntegralBound:
    value: float
    refinement_delta: float
    n_quad: int


def _gauss_nodes(s: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * s * (x + 1), 0.5 * s * w


def _integrate_norm_E(f, H, s, n) -> float:
    nodes, weights = _gauss_nodes(s, n)
    return float(sum(w * spectral_norm(E_operator(f, H, x)) for x, w in zip(nodes, weights)))


def error_integral_bound(f: FormulaSchedule, H: PartitionedHamiltonian, s: float,
                         n_quad: int = 32) -> IntegralBound:
    """Gauss-Legendre estimate of ``int_0^s ||E(sigma)|| d sigma``, an upper bound on
    ``||W(s) - exp(-iHs)||``; ``refinement_delta`` compares against ``n_quad // 2`` nodes."""
    if n_quad < 2:
        raise ValueError("n_quad must be >= 2")
    if s == 0:
        return IntegralBound(0.0, 0.0, n_quad)
    hi = _integrate_norm_E(f, H, s, n_quad)
    lo = _integrate_norm_E(f, H, s, max(1, n_quad // 2))
    return IntegralBound(hi, abs(hi - lo), n_quad)


def error_operator(f: FormulaSchedule, H: PartitionedHamiltonian, s: float,
                   method: str = "direct", n_quad: int = 24) -> np.ndarray:
    """``W(s) - exp(-iHs)``.

    ``method="direct"`` subtracts the two dense unitaries; ``"integral"`` uses
    ``W(s) - U(s) = -i int_0^s U(s - x) E(x) W(x) dx`` with Gauss-Legendre
    quadrature, which stays accurate far below the ~1e-15 rounding floor of
    the subtraction.
    """
    c = hamiltonian_spectrum(H)
    if method == "direct":
        return apply_formula(f, H, s) - evolve(c, s)
    if method != "integral":
        raise ValueError(f"unknown method {method!r}")
    dim = 1 << H.n_qubits
    if s == 0:
        return np.zeros((dim, dim), dtype=complex)
    nodes, weights = _gauss_nodes(s, n_quad)
    acc = np.zeros((dim, dim), dtype=complex)
    for x, w in zip(nodes, weights):
        acc += w * (evolve(c, s - x) @ E_operator(f, H, x) @ apply_formula(f, H, x))
    return -1j * acc


def step_error(f: FormulaSchedule, H: PartitionedHamiltonian, s: float,
               method: str = "direct") -> float:
    return spectral_norm(error_operator(f, H, s, method))


def empirical_order(f: FormulaSchedule, H: PartitionedHamiltonian, s_grid: Sequence[float],
                    method: str = "direct", ceiling: float = FIT_CEILING,
                    floor: float | None = None) -> float:
    """Least-squares slope of ``log ||W(s) - exp(-iHs)||`` against ``log s``."""
    s_grid = np.asarray(sorted(s_grid), dtype=float)
    if len(s_grid) < 2 or s_grid[0] <= 0:
        raise NonAsymptoticGrid("need at least two positive step sizes")
    if s_grid[-1] / s_grid[0] < 10 * (1 - 1e-9):
        raise NonAsymptoticGrid("step-size grid must span at least one decade")
    if floor is None:
        floor = FIT_FLOOR if method == "direct" else INTEGRAL_FIT_FLOOR
    errs = np.array([step_error(f, H, s, method) for s in s_grid])
    if np.all(errs <= floor):
        raise DegenerateFit("all errors sit at the numerical floor; the formula is exact here")
    if np.any(errs > ceiling):
        raise NonAsymptoticGrid(f"error {errs.max():.3g} exceeds the asymptotic ceiling {ceiling}")
    if np.any(errs <= floor):
        raise NonAsymptoticGrid("some errors sit at the numerical floor")
    slope, _ = np.polyfit(np.log(s_grid), np.log(errs), 1)
    return float(slope)
