"""Command-line front end: config parsing, run orchestration, CSV/JSON output.

Subcommands
-----------
eig       dressed-state table (analytic vs numeric, with residuals) as CSV
scan      averaged coincidence-rate scan (CSV data + JSON peaks/metadata)
suppress  scan with selected transitions suppressed, plus the unsuppressed
          reference and their ratio
dist      coupling-strength distribution table reproducing the P(g) figure axes

Config files are flat key = value text with [system], [scan], [distribution]
and [suppression] sections; every output embeds the resolved configuration so
a run is reproducible from its own artifacts.  Floats are always written with
12 significant digits, which makes byte-identical regression output cheap.

Exit codes: 0 success, 1 configuration error, 2 partial grid failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .broadening import CouplingDistribution, build_distribution
from .dressed import dressed_basis, jc_ladder, quadruplet, triplet
from .hamiltonian import SystemConfig, build_h
from .spectroscopy import ScanConfig, scan
from .suppression import SelectorError, parse_selectors


class ConfigError(ValueError):
    """Configuration file problem, annotated with section and key."""


def fmt(x: float) -> str:
    """12 significant digits, scientific; fixed formatting for regressions."""
    return f"{x:.11e}"


# ---------------------------------------------------------------------------
# config parsing


def _get(cp, section, key, cast, default=None, required=False):
    try:
        if not cp.has_option(section, key):
            if required:
                raise ConfigError(f"[{section}] {key}: required key missing")
            return default
        raw = cp.get(section, key)
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from exc


def load_config(path: str, overrides: argparse.Namespace | None = None) -> ScanConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path!r}")

    g_f = _get(cp, "system", "g_f", float, required=True)
    gamma = _get(cp, "system", "gamma", float, 0.0)
    e1 = _get(cp, "system", "e1", float, 0.0)
    e2 = _get(cp, "system", "e2", float, 0.0)
    n_max = _get(cp, "system", "n_max", int, 4)
    k_order = _get(cp, "system", "k_order", int, 2)

    lo = _get(cp, "scan", "delta_min", float, -2.0)
    hi = _get(cp, "scan", "delta_max", float, 3.0)
    step = _get(cp, "scan", "delta_step", float, 0.02)
    p0 = _get(cp, "scan", "p0", float, 0.0)
    p1 = _get(cp, "scan", "p1", float, 1.0)
    p2 = _get(cp, "scan", "p2", float, 0.0)
    sectors = _get(cp, "scan", "sectors", str, "1")
    bg = _get(cp, "scan", "background_subtract", bool, False)
    rel_prom = _get(cp, "scan", "peak_rel_prominence", float, 0.02)

    kind = _get(cp, "distribution", "kind", str, "delta")
    g_max = _get(cp, "distribution", "g_max", float, abs(g_f))
    frac = _get(cp, "distribution", "f", float, None)
    resolution = _get(cp, "distribution", "resolution", int, 24)
    g0 = _get(cp, "distribution", "g0", float, None)

    sel_text = _get(cp, "suppression", "selectors", str, "")

    if overrides is not None:
        if getattr(overrides, "delta_range", None):
            try:
                lo, hi, step = (float(v) for v in overrides.delta_range.split(":"))
            except ValueError as exc:
                raise ConfigError(f"--delta-range must be LO:HI:STEP: {exc}") from exc
        if getattr(overrides, "k_order", None) is not None:
            k_order = overrides.k_order
        if getattr(overrides, "fock_cutoff", None) is not None:
            n_max = overrides.fock_cutoff

    try:
        sector_tuple = tuple(int(s) for s in sectors.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"[scan] sectors: {exc}") from exc

    try:
        dist = build_distribution(kind, g_max=g_max, cutoff_fraction=frac,
                                  resolution=resolution, g0=g0)
    except ValueError as exc:
        raise ConfigError(f"[distribution]: {exc}") from exc

    try:
        selectors = parse_selectors(sel_text)
    except SelectorError as exc:
        raise ConfigError(f"[suppression] selectors: {exc}") from exc

    n = int(round((hi - lo) / step)) + 1
    grid = lo + step * np.arange(n)
    try:
        return ScanConfig(
            g_f=g_f, delta_tilde=grid, distribution=dist, e1=e1, e2=e2,
            gamma=gamma, p0=p0, p1=p1, p2=p2, k_order=k_order, n_max=n_max,
            sectors=sector_tuple, selectors=selectors, background_subtract=bg,
            threads=getattr(overrides, "threads", 1) if overrides else 1,
            peak_rel_prominence=rel_prom)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _config_echo_lines(meta_config: dict) -> list[str]:
    lines = [f"# coincspec {__version__}"]
    for key, val in sorted(meta_config.items()):
        lines.append(f"# {key} = {json.dumps(val, sort_keys=True)}")
    return lines


def _write_csv(path: Path, header: list[str], rows, meta_config: dict):
    with open(path, "w") as fh:
        for line in _config_echo_lines(meta_config):
            fh.write(line + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(cell if isinstance(cell, str) else fmt(cell)
                              for cell in row) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_eig(args) -> int:
    config = load_config(args.config, args)
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read(args.config)
    g_text = _get(cp, "system", "g", str, required=True)
    couplings = tuple(float(v) for v in g_text.replace(",", " ").split())
    n_levels = args.levels

    rows = []
    if len(couplings) == 1:
        g = couplings[0]
        analytic = [("0", 0, 0.0, np.array([1.0 + 0j]))]
        for n in range(1, n_levels + 1):
            lo_s, hi_s = jc_ladder(g, n)
            analytic += [(lo_s.label, n, lo_s.eigenvalue, lo_s.vector),
                         (hi_s.label, n, hi_s.eigenvalue, hi_s.vector)]
    elif len(couplings) == 2:
        g1, g2 = couplings
        analytic = [("0", 0, 0.0, np.array([1.0 + 0j]))]
        if n_levels >= 1:
            for s in triplet(g1, g2):
                analytic.append((s.label, 1, s.eigenvalue, s.vector))
        for q in range(2, n_levels + 1):
            for s in quadruplet(q - 1, g1, g2):
                analytic.append((s.label, q, s.eigenvalue, s.vector))
    else:
        print("error: eig supports 1 or 2 atoms", file=sys.stderr)
        return 1

    space_cut = max(n_levels, 2)
    syscfg = SystemConfig(couplings=couplings, n_max=space_cut)
    basis = dressed_basis(couplings, syscfg.space)
    h = build_h(syscfg).mat
    for label, quanta, lam, vector in analytic:
        try:
            idx = basis.index_of(label)
        except KeyError:
            continue
        lam_num = float(basis.eigenvalues[idx])
        if vector.size == syscfg.space.dim:
            resid = float(np.linalg.norm(h @ vector - lam * vector))
            coeffs = vector
        else:
            resid = 0.0
            coeffs = basis.transform[:, idx]
        row = [label, str(quanta), fmt(lam), fmt(lam_num), fmt(abs(lam - lam_num)),
               fmt(resid)]
        for c in coeffs:
            row += [fmt(c.real), fmt(c.imag)]
        rows.append(row)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = ["label", "quanta", "eigenvalue_analytic", "eigenvalue_numeric",
              "eigenvalue_dev", "eigen_residual", "coefficients_re_im..."]
    meta = {"couplings": list(couplings), "n_levels": n_levels,
            "n_max": space_cut}
    _write_csv(out / "eig.csv", header, rows, meta)
    print(f"wrote {out / 'eig.csv'}")
    return 0


def _progress(done, total):
    if done == total or done % 25 == 0:
        print(f"  {done}/{total} nodes", file=sys.stderr, flush=True)


def cmd_scan(args) -> int:
    config = load_config(args.config, args)
    result = scan(config, progress=_progress if args.verbose else None)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    npts = config.delta_tilde.size
    one = result.sector_raw.get(1, np.zeros(npts))
    two = result.sector_raw.get(2, np.zeros(npts))
    rows = []
    for i in range(npts):
        rows.append([config.delta_tilde[i], one[i], two[i], result.mixed[i],
                     result.background[i], result.difference[i]])
    header = ["delta_tilde", "w2_one_atom", "w2_two_atom", "w2_mixed",
              "w2_background", "w2_difference"]
    _write_csv(out / "scan.csv", header, rows, result.metadata["config"])

    sidecar = {
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "config": result.metadata["config"],
        "diagnostics": result.metadata["diagnostics"],
        "peaks": [{"delta_tilde": p.delta_tilde, "height": p.height,
                   "prominence": p.prominence, "index": p.index}
                  for p in result.peaks],
        "failures": result.failures,
    }
    (out / "scan_peaks.json").write_text(json.dumps(sidecar, indent=2,
                                                    sort_keys=True) + "\n")
    print(f"wrote {out / 'scan.csv'} and {out / 'scan_peaks.json'}")
    return 2 if result.failures else 0


def cmd_suppress(args) -> int:
    config = load_config(args.config, args)
    try:
        selectors = parse_selectors(",".join(args.selectors)) if args.selectors \
            else config.selectors
    except SelectorError as exc:
        print(f"selector error: {exc}", file=sys.stderr)
        return 1
    base = scan(replace(config, selectors=()),
                progress=_progress if args.verbose else None)
    supp = scan(replace(config, selectors=selectors),
                progress=_progress if args.verbose else None)

    signal = "difference" if config.background_subtract else "mixed"
    base_arr = getattr(base, signal)
    supp_arr = getattr(supp, signal)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(base_arr != 0, supp_arr / base_arr, np.nan)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(config.delta_tilde.size):
        rows.append([config.delta_tilde[i], base_arr[i], supp_arr[i],
                     "nan" if not np.isfinite(ratio[i]) else fmt(ratio[i])])
    meta = dict(base.metadata["config"])
    meta["suppressed_selectors"] = [str(s) for s in selectors]
    _write_csv(out / "suppress.csv",
               ["delta_tilde", "w2_unsuppressed", "w2_suppressed", "ratio"],
               rows, meta)
    print(f"wrote {out / 'suppress.csv'}")
    return 2 if (base.failures or supp.failures) else 0


def cmd_dist(args) -> int:
    config = load_config(args.config, args)
    dist = config.distribution
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dens = dist.density()
    rows = [[g / dist.g_max, d, w]
            for g, d, w in zip(dist.nodes, dens, dist.weights)]
    meta = {"kind": dist.provenance, "g_max": dist.g_max,
            "cutoff_fraction": dist.cutoff_fraction,
            "n_nodes": int(dist.nodes.size)}
    _write_csv(out / "dist.csv", ["g_over_gmax", "kappa_P", "weight"], rows, meta)
    print(f"wrote {out / 'dist.csv'}")
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coincspec",
                                description="two-photon coincidence spectroscopy "
                                            "simulator")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="config file path")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--threads", type=int, default=0,
                        help="worker processes (0 = all cores)")
        sp.add_argument("--delta-range", default=None, metavar="LO:HI:STEP",
                        help="override the scan grid")
        sp.add_argument("--k-order", type=int, default=None,
                        help="override the Bloch truncation order")
        sp.add_argument("--fock-cutoff", type=int, default=None,
                        help="override the Fock cutoff")
        sp.add_argument("--verbose", action="store_true")

    sp = sub.add_parser("eig", help="dressed-state table")
    common(sp)
    sp.add_argument("--levels", type=int, default=3,
                    help="highest quanta number tabulated")
    sp.set_defaults(func=cmd_eig)

    sp = sub.add_parser("scan", help="averaged coincidence-rate scan")
    common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("suppress", help="scan with suppressed transitions")
    common(sp)
    sp.add_argument("selectors", nargs="*",
                    help="selectors like fixed:0~1- scan:1-~2++")
    sp.set_defaults(func=cmd_suppress)

    sp = sub.add_parser("dist", help="coupling distribution table")
    common(sp)
    sp.set_defaults(func=cmd_dist)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
