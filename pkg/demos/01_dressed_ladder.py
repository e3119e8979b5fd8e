"""The dressed-state ladder for one and two atoms, analytic vs numeric.

One atom gives couplets split by +-sqrt(n) g.  Two atoms with unequal
couplings give a triplet at one quantum and quadruplets above; the closed
forms below are checked against direct diagonalization of the Hamiltonian.
"""
import numpy as np

from coincspec import (
    SystemConfig,
    build_h,
    dressed_basis,
    jc_ladder,
    quadruplet,
    resonance_detuning,
    triplet,
)

print("=== one atom, g = 1 (kappa units) ===")
for n in (1, 2):
    lo, hi = jc_ladder(1.0, n)
    print(f"  {n} quanta: couplet at {lo.eigenvalue:+.4f} / {hi.eigenvalue:+.4f}"
          f"  (splitting 2*sqrt({n})*g)")

g1, g2 = 64.9, 45.5
gt = np.hypot(g1, g2)
print(f"\n=== two atoms, g1 = {g1}, g2 = {g2} (gt = {gt:.2f}) ===")
tm, t0, tp = triplet(g1, g2)
print(f"  triplet:    {tm.eigenvalue:+9.3f}  {t0.eigenvalue:+9.3f} "
      f"{tp.eigenvalue:+9.3f}   (-gt, 0, +gt)")
quads = quadruplet(1, g1, g2)
print("  quadruplet:", "  ".join(f"{s.label}:{s.eigenvalue:+9.3f}" for s in quads))

# cross-check every level against the numeric eigensystem
cfg = SystemConfig(couplings=(g1, g2), n_max=3)
basis = dressed_basis(cfg.couplings, cfg.space)
h = build_h(cfg).mat
worst = 0.0
for s in list(quads) + [tm, t0, tp]:
    idx = basis.index_of(s.label)
    worst = max(worst, abs(s.eigenvalue - basis.eigenvalues[idx]))
print(f"  worst analytic-vs-numeric eigenvalue deviation: {worst:.2e}")

print("\n=== pathway resonances (normalized detuning) ===")
viii = resonance_detuning("1-", "2++", g1=63.0, g2=0.0, g_f=63.0,
                          ordering="omega1_first")
print(f"  |0> -> |1>- -> |2>++ at the one-atom corner: "
      f"delta_tilde = {viii.delta_tilde:.4f}  (1 + sqrt2)")
pk1 = resonance_detuning("1-", "2-+", g1=g1, g2=g2, g_f=63.0,
                         ordering="omega2_first")
print(f"  scan-first |0> -> |1>- -> |2>-+ at ({g1}, {g2}): "
      f"delta_tilde = {pk1.delta_tilde:.4f}")
print("  (the averaged two-atom peak sits near -1.35; the single-pair value "
      "is a diagnostic, not the peak position)")
