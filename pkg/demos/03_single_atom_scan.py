"""Single-atom coincidence spectroscopy with a frozen atom (fast demo).

A frozen atom at g = g_f shows the background-subtracted two-photon
resonances of the second couplet at delta_tilde = 1 -+ sqrt2: the sqrt2 is
the quantized-field signature the whole technique is after.  Runs in about
a minute.
"""
import numpy as np

from coincspec import ScanConfig, build_distribution, scan

G_F = 63.0
grid = np.arange(-2.0, 3.0 + 0.01, 0.02)
config = ScanConfig(
    g_f=G_F,
    delta_tilde=grid,
    distribution=build_distribution("delta", g_max=G_F, g0=G_F),
    e1=1 / np.sqrt(2), e2=np.sqrt(2), gamma=2.0,
    p1=1.0, p2=0.0, sectors=(1,),
    n_max=4, k_order=2,
    background_subtract=True,
    threads=0,
)
result = scan(config)

print("detected peaks in the difference spectrum:")
for p in result.peaks:
    print(f"  delta_tilde = {p.delta_tilde:+.3f}   height = {p.height:.3e} "
          f"  prominence = {p.prominence:.3e}")
print(f"\nexpected bichromatic resonances: {1 - np.sqrt(2):+.3f} and "
      f"{1 + np.sqrt(2):+.3f}")
print("(the one-photon line at delta_tilde = +1 and its mirror at -1 also "
      "survive subtraction: the fixed field dresses them)")

np.savetxt("single_atom_scan.csv",
           np.column_stack([grid, result.mixed, result.background,
                            result.difference]),
           delimiter=",", header="delta_tilde,raw,background,difference")
print("\nwrote single_atom_scan.csv")
