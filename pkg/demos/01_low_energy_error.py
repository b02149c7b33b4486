"""
Low-energy Trotter error on a transverse-field Ising chain
==========================================================

A product formula approximates exp(-iHs) by a product of group exponentials.
Its worst-case error over the whole Hilbert space is set by the largest
energies. When the initial state is known to sit below an energy cutoff,
only the error on that subspace matters. This script measures both on a
six-site TFIM chain.
"""

import numpy as np

from lowtrotter.bounds import empirical_low_energy_error
from lowtrotter.formulas import empirical_order, hamiltonian_spectrum, lie_trotter, strang, suzuki
from lowtrotter.pauli_model import tfim_chain

# %% The model: ZZ bonds in one group, X fields in the other.
H = tfim_chain(6)
cache = hamiltonian_spectrum(H)
print(f"{H.name}: {H.n_qubits} qubits, M={H.M} groups, k={H.k}, d={H.d}, L={H.L}, J={H.J}")
print(f"spectrum [{cache.e_min:.3f}, {cache.e_max:.3f}]")

# %% Step error as the cutoff rises from the ground state to the top of the spectrum.
f, s = strang(2), 0.05
print(f"\n{f.name} step error at s={s}")
print(f"{'percentile':>10} {'cutoff':>9} {'error':>11}")
for q in (0, 10, 25, 50, 75, 100):
    cut = cache.percentile(q)
    print(f"{q:>10} {cut:9.3f} {empirical_low_energy_error(f, H, s, cut, cache):11.3e}")

# %% The declared order shows up as the small-s slope of log(error) against log(s).
grid = np.logspace(-3, -2, 5)
print("\nsingle-step slopes (expected p + 1)")
for sched in (lie_trotter(2), strang(2), suzuki(4, 2)):
    slope = empirical_order(sched, H, grid, method="integral", ceiling=1e-2)
    print(f"  {sched.name:<11} p={sched.order}  slope={slope:.3f}")
