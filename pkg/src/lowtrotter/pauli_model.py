"""Pauli-string Hamiltonians split into groups of mutually commuting local terms.

Pauli strings are stored as a pair of bit masks ``(x, z)``; bit ``i`` refers to
qubit ``i``. A string with masks ``(x, z)`` denotes the operator
``i^{|x & z|} X^x Z^z`` so that ``x = z = 1`` on a qubit is exactly ``Y``.

Dense matrices use the convention that qubit 0 is the leftmost Kronecker
factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

DENSE_LIMIT = 12
COEFF_TOL = 1e-14

_LETTER_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {(1, 0): "X", (1, 1): "Y", (0, 1): "Z"}


class DimensionTooLarge(ValueError):
    """Raised when a dense matrix would exceed the configured qubit limit."""

    def __init__(self, n_qubits: int, limit: int):
        super().__init__(f"{n_qubits} qubits exceeds the dense limit of {limit}")
        self.n_qubits = n_qubits
        self.limit = limit


class NonCommutingGroup(ValueError):
    def __init__(self, group: int, i: int, j: int, detail: str = ""):
        msg = f"terms {i} and {j} of group {group} do not commute"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.group = group
        self.i = i
        self.j = j


class EmptyGroup(ValueError):
    def __init__(self, group: int):
        super().__init__(f"group {group} has no local terms")
        self.group = group


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliString:
    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        if (self.x | self.z) >> self.n_qubits:
            raise ValueError("Pauli letter on a qubit index >= n_qubits")

    @classmethod
    def from_letters(cls, n_qubits: int, letters: Mapping[int, str]) -> "PauliString":
        x = z = 0
        for q, letter in letters.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit index {q} out of range for {n_qubits} qubits")
            letter = letter.upper()
            if letter == "I":
                continue
            bx, bz = _LETTER_BITS[letter]
            x |= bx << q
            z |= bz << q
        return cls(n_qubits, x, z)

    @classmethod
    def parse(cls, n_qubits: int, text: str) -> "PauliString":
        """Parse ``"X0 Z3"``-style token lists; ``""`` or ``"I"`` is the identity."""
        letters: dict[int, str] = {}
        for token in text.split():
            if token.upper() == "I":
                continue
            letter, idx = token[0].upper(), token[1:]
            if letter not in _LETTER_BITS or not idx.isdigit():
                raise ValueError(f"bad Pauli token {token!r}")
            q = int(idx)
            if q in letters:
                raise ValueError(f"qubit {q} appears twice in {text!r}")
            letters[q] = letter
        return cls.from_letters(n_qubits, letters)

    @property
    def letters(self) -> dict[int, str]:
        out = {}
        for q in range(self.n_qubits):
            bits = ((self.x >> q) & 1, (self.z >> q) & 1)
            if bits != (0, 0):
                out[q] = _BITS_LETTER[bits]
        return out

    @property
    def support_mask(self) -> int:
        return self.x | self.z

    @property
    def support(self) -> tuple[int, ...]:
        m = self.support_mask
        return tuple(q for q in range(self.n_qubits) if (m >> q) & 1)

    @property
    def weight(self) -> int:
        return _popcount(self.support_mask)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def commutes_with(self, other: "PauliString") -> bool:
        _check_same_size(self, other)
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def matrix(self, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
        n = self.n_qubits
        if n > dense_limit:
            raise DimensionTooLarge(n, dense_limit)
        dim = 1 << n
        xb = _to_basis_mask(self.x, n)
        zb = _to_basis_mask(self.z, n)
        b = np.arange(dim, dtype=np.int64)
        signs = 1 - 2 * (np.bitwise_count(b & zb) & 1).astype(np.int64)
        phase = 1j ** (_popcount(self.x & self.z) % 4)
        out = np.zeros((dim, dim), dtype=complex)
        out[b ^ xb, b] = phase * signs
        return out

    def __str__(self) -> str:
        letters = self.letters
        if not letters:
            return "I"
        return " ".join(f"{v}{q}" for q, v in letters.items())


def _to_basis_mask(mask: int, n: int) -> int:
    out = 0
    for q in range(n):
        if (mask >> q) & 1:
            out |= 1 << (n - 1 - q)
    return out


def _check_same_size(a: PauliString, b: PauliString) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"qubit count mismatch: {a.n_qubits} vs {b.n_qubits}")


def pauli_product(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Return ``(phase, c)`` with ``a @ b == phase * c`` as matrices."""
    _check_same_size(a, b)
    x3, z3 = a.x ^ b.x, a.z ^ b.z
    e = (
        _popcount(a.x & a.z)
        + _popcount(b.x & b.z)
        + 2 * _popcount(a.z & b.x)
        - _popcount(x3 & z3)
    ) % 4
    return 1j**e, PauliString(a.n_qubits, x3, z3)


@dataclass(frozen=True)
class LocalTerm:
    pauli: PauliString
    coefficient: complex = 1.0

    @property
    def n_qubits(self) -> int:
        return self.pauli.n_qubits

    def matrix(self, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
        return self.coefficient * self.pauli.matrix(dense_limit)

    def __str__(self) -> str:
        return f"{self.coefficient:g}*{self.pauli}"


def term(n_qubits: int, text: str, coeff: complex = 1.0) -> LocalTerm:
    """Shorthand: ``term(4, "X0 X1", 0.5)``."""
    return LocalTerm(PauliString.parse(n_qubits, text), coeff)


def pauli_commutator(a: LocalTerm, b: LocalTerm) -> LocalTerm | None:
    """``[a, b]`` as a single term, or ``None`` when the strings commute."""
    if a.pauli.commutes_with(b.pauli):
        return None
    phase, c = pauli_product(a.pauli, b.pauli)
    return LocalTerm(c, 2 * phase * a.coefficient * b.coefficient)


def strength_J(t: LocalTerm | Sequence[LocalTerm]) -> float:
    """Spectral spread ``max eig - min eig`` of a local interaction.

    For Hermitian ``h`` this equals ``2 min_c ||h + c||``. A sequence of terms
    is treated as one fused interaction and diagonalized on its joint support.
    """
    terms = [t] if isinstance(t, LocalTerm) else list(t)
    for x in terms:
        if abs(complex(x.coefficient).imag) > COEFF_TOL:
            raise ValueError("strength_J needs real coefficients")
    if len(terms) == 1:
        x = terms[0]
        return 0.0 if x.pauli.is_identity else 2.0 * abs(complex(x.coefficient).real)
    support = sorted(set().union(*(x.pauli.support for x in terms)))
    if not support:
        return 0.0
    local = {q: i for i, q in enumerate(support)}
    mat = 0
    for x in terms:
        letters = {local[q]: v for q, v in x.pauli.letters.items()}
        p = PauliString.from_letters(len(support), letters)
        mat = mat + complex(x.coefficient).real * p.matrix()
    ev = np.linalg.eigvalsh(mat)
    return float(ev[-1] - ev[0])


def _fuse(terms: Iterable[LocalTerm]) -> tuple[dict[PauliString, complex], int | None]:
    acc: dict[PauliString, complex] = {}
    n = None
    for t in terms:
        if n is None:
            n = t.n_qubits
        elif t.n_qubits != n:
            raise ValueError("terms act on different numbers of qubits")
        acc[t.pauli] = acc.get(t.pauli, 0.0) + t.coefficient
    return acc, n


@dataclass(frozen=True)
class TermGroup:
    """One fast-forwardable group ``H_m``: commuting local terms plus a constant.

    Terms with identical Pauli words are fused; identity terms are folded into
    ``offset`` so they never count as local interactions.
    """

    terms: tuple[LocalTerm, ...]
    offset: float = 0.0
    n_qubits: int | None = None

    def __post_init__(self):
        acc, n = _fuse(self.terms)
        if self.n_qubits is None and n is None:
            raise ValueError("cannot infer n_qubits of an empty group")
        n = self.n_qubits if self.n_qubits is not None else n
        offset = float(self.offset)
        fused = []
        for p, c in acc.items():
            c = complex(c)
            if abs(c.imag) > COEFF_TOL:
                raise ValueError(f"Hamiltonian term {p} has non-real coefficient {c}")
            if p.n_qubits != n:
                raise ValueError("term qubit count differs from the group's")
            if p.is_identity:
                offset += c.real
            elif abs(c.real) > COEFF_TOL:
                fused.append(LocalTerm(p, c.real))
        object.__setattr__(self, "terms", tuple(fused))
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "n_qubits", n)

    def __len__(self) -> int:
        return len(self.terms)

    def matrix(self, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
        n = self.n_qubits
        if n > dense_limit:
            raise DimensionTooLarge(n, dense_limit)
        out = self.offset * np.eye(1 << n, dtype=complex)
        for t in self.terms:
            out += t.matrix(dense_limit)
        return out

    def shifted(self, delta: float) -> "TermGroup":
        return TermGroup(self.terms, self.offset + delta, self.n_qubits)


@dataclass(frozen=True)
class ParamSummary:
    n_qubits: int
    M: int
    k: int
    d: int
    L: int
    J: float
    group_sizes: tuple[int, ...]
    psd: tuple[bool, ...] | None

    @property
    def all_psd(self) -> bool:
        return bool(self.psd) and all(self.psd)


@dataclass(frozen=True)
class PartitionedHamiltonian:
    n_qubits: int
    groups: tuple[TermGroup, ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        for g in self.groups:
            if g.n_qubits != self.n_qubits:
                raise ValueError("group qubit count differs from the Hamiltonian's")

    @property
    def M(self) -> int:
        return len(self.groups)

    @property
    def local_terms(self) -> list[LocalTerm]:
        return [t for g in self.groups for t in g.terms]

    @cached_property
    def k(self) -> int:
        return max((t.pauli.weight for t in self.local_terms), default=0)

    @cached_property
    def d(self) -> int:
        counts = [0] * self.n_qubits
        for t in self.local_terms:
            for q in t.pauli.support:
                counts[q] += 1
        return max(counts, default=0)

    @cached_property
    def L(self) -> int:
        return max((len(g) for g in self.groups), default=0)

    @cached_property
    def J(self) -> float:
        return max((strength_J(t) for t in self.local_terms), default=0.0)

    @cached_property
    def group_matrices(self) -> tuple[np.ndarray, ...]:
        mats = tuple(g.matrix() for g in self.groups)
        for m in mats:
            m.setflags(write=False)
        return mats

    @cached_property
    def matrix(self) -> np.ndarray:
        out = sum(self.group_matrices)
        out.setflags(write=False)
        return out


Operand = Union[LocalTerm, TermGroup, PartitionedHamiltonian, PauliString]


def dense_matrix(x: Operand, dense_limit: int = DENSE_LIMIT) -> np.ndarray:
    if isinstance(x, PartitionedHamiltonian):
        if x.n_qubits > dense_limit:
            raise DimensionTooLarge(x.n_qubits, dense_limit)
        return np.array(x.matrix)
    return x.matrix(dense_limit)


def validate_partition(H: PartitionedHamiltonian, dense_limit: int = DENSE_LIMIT,
                       psd_tol: float = 1e-10) -> ParamSummary:
    """Check every group is non-empty and internally commuting; return the
    structural parameters.

    The positive-semidefinite flag per group needs a dense diagonalization and
    is ``None`` above ``dense_limit``.
    """
    if H.M < 1:
        raise ValueError("a Hamiltonian needs at least one group")
    for m, g in enumerate(H.groups):
        if not g.terms:
            raise EmptyGroup(m)
        for i, a in enumerate(g.terms):
            for j in range(i + 1, len(g.terms)):
                b = g.terms[j]
                if not a.pauli.commutes_with(b.pauli):
                    raise NonCommutingGroup(m, i, j, f"{a.pauli} vs {b.pauli}")
    psd = None
    if H.n_qubits <= dense_limit:
        flags = []
        for mat in H.group_matrices:
            ev = np.linalg.eigvalsh(mat)
            scale = max(1.0, float(np.max(np.abs(ev))))
            flags.append(bool(ev[0] >= -psd_tol * scale))
        psd = tuple(flags)
    return ParamSummary(H.n_qubits, H.M, H.k, H.d, H.L, H.J,
                        tuple(len(g) for g in H.groups), psd)


def shift_groups_psd(H: PartitionedHamiltonian) -> PartitionedHamiltonian:
    """Add to each group the constant that makes its lowest eigenvalue zero."""
    groups = []
    for g, mat in zip(H.groups, H.group_matrices):
        groups.append(g.shifted(-float(np.linalg.eigvalsh(mat)[0])))
    name = f"{H.name}+psd" if H.name else "psd"
    return PartitionedHamiltonian(H.n_qubits, tuple(groups), name)


# --- model description files -------------------------------------------------

def to_dict(H: PartitionedHamiltonian) -> dict:
    groups = []
    for g in H.groups:
        entries = [{"pauli": str(t.pauli), "coeff": float(complex(t.coefficient).real)}
                   for t in g.terms]
        if g.offset:
            entries.append({"pauli": "I", "coeff": g.offset})
        groups.append(entries)
    out = {"n_qubits": H.n_qubits, "groups": groups}
    if H.name:
        out["name"] = H.name
    return out


def from_dict(spec: Mapping) -> PartitionedHamiltonian:
    unknown = set(spec) - {"n_qubits", "groups", "name"}
    if unknown:
        raise ValueError(f"unknown model keys: {sorted(unknown)}")
    try:
        n = int(spec["n_qubits"])
        raw_groups = spec["groups"]
    except KeyError as exc:
        raise ValueError(f"model description missing {exc.args[0]!r}") from None
    groups = []
    for entries in raw_groups:
        terms = []
        for e in entries:
            coeff = e["coeff"]
            if not isinstance(coeff, (int, float)):
                raise ValueError(f"coefficient {coeff!r} must be a real number")
            terms.append(LocalTerm(PauliString.parse(n, e["pauli"]), float(coeff)))
        groups.append(TermGroup(tuple(terms), n_qubits=n))
    return PartitionedHamiltonian(n, tuple(groups), spec.get("name", ""))


# --- standard models -----------------------------------------------------------

def _bonds(n: int, boundary: str) -> list[tuple[int, int]]:
    if boundary not in ("open", "periodic"):
        raise ValueError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    bonds = [(i, i + 1) for i in range(n - 1)]
    if boundary == "periodic":
        if n < 3:
            raise ValueError("periodic chains need at least 3 sites")
        bonds.append((n - 1, 0))
    return bonds


def tfim_chain(n: int, j_zz: float = 1.0, h_x: float = 1.0,
               boundary: str = "open") -> PartitionedHamiltonian:
    """``H = j_zz sum Z_i Z_{i+1} + h_x sum X_i`` with groups (ZZ bonds, X fields)."""
    zz = TermGroup(tuple(term(n, f"Z{a} Z{b}", j_zz) for a, b in _bonds(n, boundary)),
                   n_qubits=n)
    xs = TermGroup(tuple(term(n, f"X{i}", h_x) for i in range(n)), n_qubits=n)
    return PartitionedHamiltonian(n, (zz, xs), f"tfim{n}-{boundary}")


def heisenberg_chain(n: int, j: float = 1.0, boundary: str = "open",
                     psd: bool = False) -> PartitionedHamiltonian:
    """``H = j sum (XX + YY + ZZ)`` on bonds, even bonds in group 0, odd in group 1.

    A periodic chain of odd length puts the wrap-around bond in a third group.
    With ``psd=True`` every group is shifted so that its minimum eigenvalue is 0.
    """
    buckets: list[list[LocalTerm]] = [[], []]
    bonds = _bonds(n, boundary)
    for idx, (a, b) in enumerate(bonds):
        slot = idx % 2
        if boundary == "periodic" and n % 2 == 1 and idx == len(bonds) - 1:
            buckets.append([])
            slot = 2
        buckets[slot].extend(term(n, f"{p}{a} {p}{b}", j) for p in "XYZ")
    groups = tuple(TermGroup(tuple(b), n_qubits=n) for b in buckets if b)
    H = PartitionedHamiltonian(n, groups, f"heisenberg{n}-{boundary}")
    return shift_groups_psd(H) if psd else H
