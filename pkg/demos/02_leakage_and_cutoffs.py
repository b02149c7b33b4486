"""
Leakage, the second cutoff and the step bound
=============================================

A product formula does not conserve energy, so a low-energy state can leak
upward. The leakage above a second cutoff Delta' decays exponentially in
Delta' - Delta. Below Delta' the error is controlled by nested commutators
restricted to the low-energy block. With every group shifted to be positive
semidefinite, those restricted norms are at most the cutoff itself.
"""

from lowtrotter import bounds as B
from lowtrotter.commutators import commutator_bound_sum, f_abs_sum, restricted_commutator_bound_sum
from lowtrotter.formulas import hamiltonian_spectrum, lie_trotter, strang
from lowtrotter.pauli_model import heisenberg_chain, shift_groups_psd
from lowtrotter.spectral import restricted_norm

H = shift_groups_psd(heisenberg_chain(6))
cache = hamiltonian_spectrum(H)
lam = B.lambda_param(H.J, H.d, H.k)
print(f"{H.name}: lambda = {lam:.5f}, spectrum [{cache.e_min:.3f}, {cache.e_max:.3f}]")

# %% Measured leakage against the bound. The bound only bites once the gap
# exceeds 2 R^W, which at this size lies far above the spectrum.
f, s = strang(2), 0.1
delta = cache.percentile(25)
rw = B.R_W(f, H, s)
print(f"\nleakage of {f.name} at s={s}, Delta={delta:.3f}, R^W={rw:.3e}")
print(f"{'gap':>9} {'measured':>11} {'bound':>11}")
for gap in (0.5, 5.0, 10.0, 2 * rw, 2 * rw + 1 / lam, 2 * rw + 5 / lam):
    measured = B.empirical_leakage(f, H, s, delta, delta + gap, cache)
    bound = B.formula_leakage_bound(delta, delta + gap, lam, rw)
    print(f"{gap:9.1f} {measured:11.3e} {bound.value:11.3e}{'  (vacuous)' if bound.vacuous else ''}")

# %% Choosing Delta' so the leakage bound equals theta. Here the 2 R^W radius
# dominates and puts Delta' far above the whole spectrum.
for theta in (1e-2, 1e-3):
    dp = B.select_delta_prime(delta, rw, lam, theta)
    print(f"theta={theta:g}: Delta'={dp.value:.2f} "
          f"(radius {dp.radius_term:.2e}, log term {dp.log_term:.2f})")

# %% Restricted commutator sums shrink with the cutoff.
print("\nrestricted / unrestricted commutator sum")
for sched in (lie_trotter(2), strang(2)):
    full = commutator_bound_sum(sched, H)
    ratios = [restricted_commutator_bound_sum(sched, H, cache, cache.percentile(q)) / full
              for q in (10, 25, 50, 100)]
    print(f"  {sched.name:<11}" + "".join(f"{r:8.3f}" for r in ratios))

# %% Cutoff chain and the PSD step bound against the measured low-energy error.
p = f.order
dp = B.select_delta_prime(delta, B.R_W(f, H, 0.01), lam, 1e-3).value
ells = [B.ell_n(n, H.L, H.k, H.d, H.J) for n in range(p + 1)]
floor = min(restricted_norm(m, cache, dp) for m in H.group_matrices)
chain = B.auto_chain(dp, p, lam, ells, 0.1, floor)
print(f"\nchain levels {[round(x, 1) for x in chain.levels]}")
for s in (1e-3, 3e-3, 1e-2):
    eps = B.empirical_low_energy_error(f, H, s, delta, cache)
    psd = B.psd_step_error_bound(s, p, chain.delta_f, f_abs_sum(f, H))
    print(f"  s={s:<6g} measured {eps:.3e}  PSD bound {psd:.3e}")
