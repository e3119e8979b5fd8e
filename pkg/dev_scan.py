"""Dev helper: run the two-atom Fig-3 style scan and dump arrays to .npz."""
import sys
import time

import numpy as np

sys.path.insert(0, "src")
import coincspec as cs  # noqa: E402

res_nodes = int(sys.argv[1]) if len(sys.argv) > 1 else 12
step = float(sys.argv[2]) if len(sys.argv) > 2 else 0.04
g_f = float(sys.argv[3]) if len(sys.argv) > 3 else 63.0
out = sys.argv[4] if len(sys.argv) > 4 else f"dev_scan_{res_nodes}_{step}_{g_f}.npz"

dist = cs.build_distribution("uniform-beam", g_max=g_f, resolution=res_nodes)
n = int(round(5.0 / step)) + 1
grid = -2.0 + step * np.arange(n)
cfg = cs.ScanConfig(
    g_f=g_f, delta_tilde=grid, distribution=dist,
    e1=1 / np.sqrt(2), e2=np.sqrt(2), gamma=2.0,
    p1=0.0, p2=1.0, sectors=(2,), k_order=2, n_max=4,
    background_subtract=True, threads=2,
)
t0 = time.time()
res = cs.scan(cfg, progress=lambda d, t: print(f"{d}/{t}", flush=True) if d % 20 == 0 else None)
print("elapsed:", time.time() - t0)
np.savez(out, delta_tilde=res.delta_tilde, raw=res.sector_raw[2],
         bg=res.sector_background[2], diff=res.difference)
print("peaks:")
for p in res.peaks:
    print(f"  dt={p.delta_tilde:+.3f} height={p.height:.3e} prom={p.prominence:.3e}")
print("diagnostics:", res.metadata["diagnostics"])
print("failures:", len(res.failures))
