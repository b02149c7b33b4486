"""Dense Hermitian spectral kernel: propagators, energy-cutoff projectors and
restricted norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-10
# eigenvalues this close to a cutoff count as below it (closed condition E <= cutoff)
TIE_TOL = 1e-12


class NotHermitian(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralCache:
    """Eigendecomposition ``A = V diag(E) V^dagger`` with ascending ``E``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def e_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def e_max(self) -> float:
        return float(self.eigenvalues[-1])

    def n_below(self, cutoff: float) -> int:
        return int(np.searchsorted(self.eigenvalues, cutoff + TIE_TOL, side="right"))

    def basis_leq(self, cutoff: float) -> np.ndarray:
        """Orthonormal columns spanning the range of the projector onto ``E <= cutoff``."""
        return self.eigenvectors[:, : self.n_below(cutoff)]

    def basis_gt(self, cutoff: float) -> np.ndarray:
        return self.eigenvectors[:, self.n_below(cutoff):]

    def percentile(self, q: float) -> float:
        """Energy at the ``q``-th percentile of the spectrum (linear interpolation)."""
        if not 0 <= q <= 100:
            raise ValueError(f"percentile {q} outside [0, 100]")
        return float(np.percentile(self.eigenvalues, q))

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eigendecompose(A: np.ndarray) -> SpectralCache:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expected a square matrix")
    if np.linalg.norm(A - A.conj().T, 2) > HERMITIAN_TOL:
        raise NotHermitian("matrix is not Hermitian")
    w, v = np.linalg.eigh(A)
    w.setflags(write=False)
    v.setflags(write=False)
    return SpectralCache(w, v)


def projector_leq(c: SpectralCache, cutoff: float) -> np.ndarray:
    v = c.basis_leq(cutoff)
    return v @ v.conj().T


def projector_gt(c: SpectralCache, cutoff: float) -> np.ndarray:
    return np.eye(c.dimension) - projector_leq(c, cutoff)


def evolve(c: SpectralCache, s: float) -> np.ndarray:
    """Exact propagator ``exp(-i s A)``."""
    v = c.eigenvectors
    return (v * np.exp(-1j * s * c.eigenvalues)) @ v.conj().T


def spectral_norm(A: np.ndarray) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def _check_dim(A: np.ndarray, c: SpectralCache) -> None:
    if A.shape != (c.dimension, c.dimension):
        raise ValueError(f"operator shape {A.shape} does not match dimension {c.dimension}")


def restricted_norm(A: np.ndarray, c: SpectralCache, cutoff: float) -> float:
    """``|| P A P ||`` with ``P`` the projector onto energies ``<= cutoff``."""
    _check_dim(A, c)
    v = c.basis_leq(cutoff)
    return spectral_norm(v.conj().T @ A @ v)


def leakage_norm(A: np.ndarray, c: SpectralCache, low: float, high: float) -> float:
    """``|| P_{>high} A P_{<=low} ||``: amplitude moved from below ``low`` to above ``high``."""
    _check_dim(A, c)
    return spectral_norm(c.basis_gt(high).conj().T @ A @ c.basis_leq(low))
