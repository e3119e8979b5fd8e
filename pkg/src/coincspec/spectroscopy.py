"""Coincidence-rate scans over the normalized detuning axis.

The scan axis is the normalized detuning dt = (omega_2 - omega)/(omega -
omega_1); with the rotating-frame convention omega_1 = omega - g_f this maps
to the Bloch frequency delta = g_f (dt + 1).  For every grid point of the
coupling distribution a cached solver sweeps the axis, the per-node rates are
averaged with the distribution weights, and atom-number sectors are mixed
with their beam probabilities.  Background subtraction repeats the sweep with
the fixed field off and stores the difference.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .broadening import CouplingDistribution, product_distribution
from .hamiltonian import SystemConfig
from .liouville import SteadyStateSolver
from .observables import w2
from .suppression import TransitionSelector, rebuild_with_suppression, resolvable
from .dressed import dressed_basis


@dataclass(frozen=True)
class Peak:
    """Strict local maximum of a spectrum."""

    delta_tilde: float
    height: float
    prominence: float
    index: int


@dataclass(frozen=True, eq=False)
class ScanConfig:
    """Everything one scan needs; kappa units throughout.

    ``delta_tilde`` is the strictly increasing scan grid; ``sectors`` lists
    the atom-number sectors actually simulated (the empty cavity contributes
    no coincidences and is always implicit).
    """

    g_f: float
    delta_tilde: np.ndarray
    distribution: CouplingDistribution
    e1: float
    e2: float
    gamma: float
    p0: float = 0.0
    p1: float = 1.0
    p2: float = 0.0
    k_order: int = 2
    n_max: int = 4
    sectors: tuple[int, ...] = (1,)
    selectors: tuple[TransitionSelector, ...] = ()
    background_subtract: bool = False
    threads: int = 1
    peak_rel_prominence: float = 0.02

    def __post_init__(self):
        dt = np.asarray(self.delta_tilde, dtype=float)
        if dt.size == 0 or np.any(np.diff(dt) <= 0):
            raise ValueError("delta_tilde grid must be nonempty and increasing")
        object.__setattr__(self, "delta_tilde", dt)
        if self.g_f == 0:
            raise ValueError("g_f must be nonzero")
        for name in ("p0", "p1", "p2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        bad = [s for s in self.sectors if s not in (1, 2)]
        if bad:
            raise ValueError(f"unsupported sectors {bad}; only 1 and 2 are simulated")

    def deltas(self) -> np.ndarray:
        return self.g_f * (self.delta_tilde + 1.0)


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Scan output: per-sector arrays, mixture, difference, and peaks."""

    delta_tilde: np.ndarray
    sector_raw: dict[int, np.ndarray]
    sector_background: dict[int, np.ndarray]
    mixed: np.ndarray
    background: np.ndarray
    difference: np.ndarray
    peaks: list[Peak]
    metadata: dict
    failures: list[dict]

    def sector_difference(self, sector: int) -> np.ndarray:
        return self.sector_raw[sector] - self.sector_background[sector]


# ---------------------------------------------------------------------------
# node tasks


_worker_blas_guard = None


def _worker_init():
    # each worker owns one node at a time; nested BLAS threading only thrashes
    global _worker_blas_guard
    try:
        import threadpoolctl

        _worker_blas_guard = threadpoolctl.threadpool_limits(limits=1)
    except ImportError:
        pass


def _node_task(task):
    """Sweep all detunings for one coupling node; runs in worker processes."""
    (key, couplings, config, e1_on) = task
    syscfg = SystemConfig(couplings=couplings, gamma=config.gamma,
                          e1=config.e1 if e1_on else 0.0, e2=config.e2,
                          g_f=config.g_f, n_max=config.n_max)
    selectors = config.selectors
    if selectors:
        basis = dressed_basis(couplings, syscfg.space)
        selectors = tuple(s for s in selectors if resolvable([s], basis))
        blocks = rebuild_with_suppression(syscfg, selectors, basis=basis)
    else:
        blocks = rebuild_with_suppression(syscfg, ())
    solver = SteadyStateSolver(blocks, k_order=config.k_order)
    deltas = config.deltas()
    values = np.full(deltas.shape, np.nan)
    failures = []
    diag = {"trace_dev": 0.0, "herm_dev": 0.0, "min_eig": 0.0, "residual": 0.0}
    for i, delta in enumerate(deltas):
        try:
            sol = solver.solve(delta)
            values[i] = w2(sol.rho0, syscfg.space).value
            dd = sol.diagnostics
            diag["trace_dev"] = max(diag["trace_dev"], dd["trace_dev"])
            diag["herm_dev"] = max(diag["herm_dev"], dd["herm_dev"])
            diag["min_eig"] = min(diag["min_eig"], dd["min_eig"])
            diag["residual"] = max(diag["residual"], dd["residual"])
        except Exception as exc:  # noqa: BLE001 - scan must survive bad nodes
            failures.append({"node": couplings, "delta_tilde":
                             float(config.delta_tilde[i]), "error": str(exc)})
    return key, values, failures, diag


def _sector_tasks(config: ScanConfig, sector: int, e1_on: bool):
    """(weight, task) pairs for one sector, exploiting exchange symmetry."""
    tasks = []
    if sector == 1:
        dist = config.distribution
        for i, (g, p) in enumerate(zip(dist.nodes, dist.weights)):
            tasks.append((float(p), ((sector, e1_on, i), (float(g),), config, e1_on)))
    else:
        grid = product_distribution(config.distribution, config.distribution)
        n = grid.nodes1.size
        if grid.symmetric:
            for i in range(n):
                for j in range(i, n):
                    w_ij = grid.weights[i, j] + (grid.weights[j, i] if j > i else 0.0)
                    tasks.append((float(w_ij),
                                  ((sector, e1_on, (i, j)),
                                   (float(grid.nodes1[i]), float(grid.nodes2[j])),
                                   config, e1_on)))
        else:
            for i in range(n):
                for j in range(grid.nodes2.size):
                    tasks.append((float(grid.weights[i, j]),
                                  ((sector, e1_on, (i, j)),
                                   (float(grid.nodes1[i]), float(grid.nodes2[j])),
                                   config, e1_on)))
    return tasks


def _run_tasks(tasks, threads: int, progress=None):
    if threads == 0:
        threads = os.cpu_count() or 1
    results = []
    if threads <= 1 or len(tasks) <= 1:
        # run with one BLAS thread, as the workers do, so results are
        # bit-identical for every --threads setting
        try:
            import threadpoolctl

            guard = threadpoolctl.threadpool_limits(limits=1)
        except ImportError:
            guard = None
        try:
            for k, t in enumerate(tasks):
                results.append(_node_task(t))
                if progress:
                    progress(k + 1, len(tasks))
        finally:
            if guard is not None:
                guard.restore_original_limits()
        return results
    import multiprocessing as mp

    # fork keeps the library usable from unguarded scripts and test runners
    ctx = mp.get_context("fork")
    with ProcessPoolExecutor(max_workers=threads, mp_context=ctx,
                             initializer=_worker_init) as pool:
        for k, res in enumerate(pool.map(_node_task, tasks, chunksize=1)):
            results.append(res)
            if progress:
                progress(k + 1, len(tasks))
    return results


def _reduce(tasks, results):
    """Weighted average in fixed task order; NaN marks failed grid points."""
    npts = results[0][1].size
    acc = np.zeros(npts)
    bad = np.zeros(npts, dtype=bool)
    failures = []
    diag = {"trace_dev": 0.0, "herm_dev": 0.0, "min_eig": 0.0, "residual": 0.0}
    for (weight, _), (_, values, fails, d) in zip(tasks, results):
        nan = ~np.isfinite(values)
        bad |= nan
        acc += weight * np.where(nan, 0.0, values)
        failures.extend(fails)
        diag["trace_dev"] = max(diag["trace_dev"], d["trace_dev"])
        diag["herm_dev"] = max(diag["herm_dev"], d["herm_dev"])
        diag["min_eig"] = min(diag["min_eig"], d["min_eig"])
        diag["residual"] = max(diag["residual"], d["residual"])
    acc[bad] = np.nan
    return acc, failures, diag


# ---------------------------------------------------------------------------
# public entry points


def scan(config: ScanConfig, progress=None) -> SpectrumResult:
    """Run the full averaged scan described by ``config``.

    Grid points where a solver fails are reported in ``failures`` and marked
    NaN rather than aborting the sweep.
    """
    npts = config.delta_tilde.size
    zero = np.zeros(npts)
    sector_raw: dict[int, np.ndarray] = {0: zero.copy()}
    sector_bg: dict[int, np.ndarray] = {0: zero.copy()}
    all_failures: list[dict] = []
    diag = {"trace_dev": 0.0, "herm_dev": 0.0, "min_eig": 0.0, "residual": 0.0}

    passes = [(True, sector_raw)]
    if config.background_subtract:
        passes.append((False, sector_bg))

    # one flat task list keeps the worker pool busy across sectors and passes
    flat: list[tuple] = []
    spans = {}
    for e1_on, target in passes:
        for sector in config.sectors:
            tasks = _sector_tasks(config, sector, e1_on)
            spans[(e1_on, sector)] = (len(flat), len(flat) + len(tasks), tasks)
            flat.extend(t for _, t in tasks)
    results = _run_tasks(flat, config.threads, progress=progress)

    for (e1_on, target) in passes:
        for sector in config.sectors:
            lo, hi, tasks = spans[(e1_on, sector)]
            values, fails, d = _reduce(tasks, results[lo:hi])
            target[sector] = values
            all_failures.extend(fails)
            for kk in ("trace_dev", "herm_dev", "residual"):
                diag[kk] = max(diag[kk], d[kk])
            diag["min_eig"] = min(diag["min_eig"], d["min_eig"])

    if not config.background_subtract:
        for sector in config.sectors:
            sector_bg[sector] = zero.copy()

    probs = {0: config.p0, 1: config.p1, 2: config.p2}
    mixed = sector_mix(sector_raw, probs, npts)
    background = sector_mix(sector_bg, probs, npts)
    difference = mixed - background

    target = difference if config.background_subtract else mixed
    finite = target[np.isfinite(target)]
    span = float(finite.max() - finite.min()) if finite.size else 0.0
    peaks = detect_peaks(target, config.delta_tilde,
                         config.peak_rel_prominence * span)

    from . import __version__

    metadata = {
        "version": __version__,
        "config": describe_config(config),
        "diagnostics": diag,
        "n_failures": len(all_failures),
    }
    return SpectrumResult(
        delta_tilde=config.delta_tilde.copy(),
        sector_raw=sector_raw, sector_background=sector_bg,
        mixed=mixed, background=background, difference=difference,
        peaks=peaks, metadata=metadata, failures=all_failures)


def background_subtract(config: ScanConfig, progress=None) -> SpectrumResult:
    """Scan twice (fixed field on / off) and store the difference."""
    return scan(replace(config, background_subtract=True), progress=progress)


def sector_mix(sector_values: dict[int, np.ndarray], probs: dict[int, float],
               npts: int) -> np.ndarray:
    """Probability-weighted sum of sector spectra on a shared grid."""
    out = np.zeros(npts)
    for sector, values in sector_values.items():
        if values.size != npts:
            raise ValueError(f"sector {sector} grid length {values.size} != {npts}")
        out = out + probs.get(sector, 0.0) * values
    return out


def detect_peaks(values: np.ndarray, grid: np.ndarray,
                 prominence_threshold: float = 0.0) -> list[Peak]:
    """Strict local maxima with prominence above threshold, sorted by position.

    The prominence of a peak is its height above the higher of the two
    flanking minima, where each flanking minimum is taken between this peak
    and the neighboring peak (or the end of the grid).  NaN entries break the
    array into independently searched segments.
    """
    if grid.size < 3:
        raise ValueError("peak detection needs at least 3 grid points")
    v = np.asarray(values, dtype=float)
    n = v.size
    cand = [i for i in range(1, n - 1)
            if np.isfinite(v[i - 1]) and np.isfinite(v[i]) and np.isfinite(v[i + 1])
            and v[i] > v[i - 1] and v[i] > v[i + 1]]
    peaks = []
    for pos, i in enumerate(cand):
        left_stop = cand[pos - 1] if pos > 0 else 0
        right_stop = cand[pos + 1] if pos + 1 < len(cand) else n - 1
        left_seg = v[left_stop:i]
        right_seg = v[i + 1:right_stop + 1]
        left_min = np.nanmin(left_seg) if left_seg.size else v[i]
        right_min = np.nanmin(right_seg) if right_seg.size else v[i]
        prominence = v[i] - max(left_min, right_min)
        if prominence >= prominence_threshold:
            peaks.append(Peak(delta_tilde=float(grid[i]), height=float(v[i]),
                              prominence=float(prominence), index=i))
    return peaks


def describe_config(config: ScanConfig) -> dict:
    """JSON-ready echo of every resolved parameter (self-describing runs)."""
    dist = config.distribution
    return {
        "g_f": config.g_f,
        "delta_tilde": {"lo": float(config.delta_tilde[0]),
                        "hi": float(config.delta_tilde[-1]),
                        "n": int(config.delta_tilde.size)},
        "e1": config.e1, "e2": config.e2, "gamma": config.gamma,
        "p0": config.p0, "p1": config.p1, "p2": config.p2,
        "k_order": config.k_order, "n_max": config.n_max,
        "sectors": list(config.sectors),
        "selectors": [str(s) for s in config.selectors],
        "background_subtract": config.background_subtract,
        "distribution": {
            "kind": dist.provenance, "g_max": dist.g_max,
            "cutoff_fraction": dist.cutoff_fraction, "n_nodes": int(dist.nodes.size),
        },
        "peak_rel_prominence": config.peak_rel_prominence,
    }
