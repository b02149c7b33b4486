"""
How many Trotter steps?
=======================

Asymptotic cost laws compare three analyses by their dependence on system
size N. On a six-site chain we can also search for the smallest number of
steps r that meets an error target, over the full space and below a cutoff.
"""

from lowtrotter.cost import METHODS, empirical_trotter_number, n_exponent, scaling_law
from lowtrotter.formulas import hamiltonian_spectrum, lie_trotter, strang
from lowtrotter.pauli_model import tfim_chain

# %% Cost laws for orders 1 to 3.
for p in (1, 2, 3):
    for method in METHODS:
        print(f"p={p} {method:<8} {scaling_law(method, p)}")

# %% Exponent of N in the size-dependent term. The prior low-energy analysis
# only beats the general one at first order.
print(f"\n{'p':>2} " + " ".join(f"{m:>8}" for m in METHODS))
for p in range(1, 9):
    print(f"{p:>2} " + " ".join(f"{str(n_exponent(m, p)):>8}" for m in METHODS))

# %% Empirical Trotter numbers at T=1, eps=1e-6.
H = tfim_chain(6)
cache = hamiltonian_spectrum(H)
print(f"\n{'schedule':<11} {'cutoff':>8} {'r':>6}")
for f in (lie_trotter(2), strang(2)):
    for label, cut in (("p25", cache.percentile(25)), ("p50", cache.percentile(50)), ("full", None)):
        r = empirical_trotter_number(f, H, cut, 1.0, 1e-6 if f.order > 1 else 1e-3, cache).r
        print(f"{f.name:<11} {label:>8} {r:>6}")
print("(Lie-Trotter uses eps=1e-3 to keep r small)")
