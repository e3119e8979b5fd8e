import numpy as np
import pytest

from coincspec.broadening import build_distribution
from coincspec.spectroscopy import (
    Peak,
    ScanConfig,
    detect_peaks,
    scan,
    sector_mix,
)
from coincspec.suppression import parse_selectors


def delta_scan_config(**kw):
    base = dict(
        g_f=9.0,
        delta_tilde=np.linspace(-1.8, 2.8, 24),
        distribution=build_distribution("delta", g_max=9.0, g0=9.0),
        e1=1 / np.sqrt(2), e2=np.sqrt(2), gamma=2.0,
        p1=1.0, p2=0.0, sectors=(1,), k_order=2, n_max=3, threads=1,
    )
    base.update(kw)
    return ScanConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        delta_scan_config(delta_tilde=np.array([]))
    with pytest.raises(ValueError):
        delta_scan_config(delta_tilde=np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        delta_scan_config(g_f=0.0)
    with pytest.raises(ValueError):
        delta_scan_config(sectors=(3,))


def test_delta_grid_mapping():
    cfg = delta_scan_config()
    assert np.allclose(cfg.deltas(), 9.0 * (cfg.delta_tilde + 1.0))
    # round trip
    assert np.allclose(cfg.deltas() / 9.0 - 1.0, cfg.delta_tilde)


def test_no_scan_drive_flat_spectrum():
    cfg = delta_scan_config(e2=0.0, delta_tilde=np.linspace(-1.5, 2.5, 9))
    res = scan(cfg)
    vals = res.sector_raw[1]
    assert np.max(vals) - np.min(vals) < 1e-14 * max(np.max(vals), 1.0)


def test_zero_atom_sector_is_zero():
    cfg = delta_scan_config(p0=5.0, delta_tilde=np.linspace(-1.0, 1.0, 5))
    res = scan(cfg)
    assert np.allclose(res.sector_raw[0], 0.0)


def test_one_atom_delta_distribution_peak_positions():
    # frozen atom at g = g_f: two-photon resonances via |1>_- sit at
    # delta_tilde = 1 +- sqrt2 in the difference spectrum
    step = 0.02
    grid = np.arange(-0.6, 2.6 + step / 2, step)
    cfg = delta_scan_config(delta_tilde=grid, background_subtract=True)
    res = scan(cfg)
    diff = res.difference
    peaks = detect_peaks(diff, grid, 0.02 * (diff.max() - diff.min()))
    positions = [p.delta_tilde for p in peaks]
    assert any(abs(p - (1 + np.sqrt(2))) <= 0.05 for p in positions)
    assert any(abs(p - (1 - np.sqrt(2))) <= 0.05 for p in positions)


def test_background_subtraction_linearity():
    cfg = delta_scan_config(delta_tilde=np.linspace(-0.5, 1.5, 7),
                            background_subtract=True)
    res = scan(cfg)
    assert np.allclose(res.difference, res.mixed - res.background, atol=1e-15)
    # e1 = 0 base config: difference identically zero
    cfg0 = delta_scan_config(e1=0.0, delta_tilde=np.linspace(-0.5, 1.5, 7),
                             background_subtract=True)
    res0 = scan(cfg0)
    assert np.allclose(res0.difference, 0.0, atol=1e-16)


def test_scan_through_suppression_path_bit_identical():
    grid = np.linspace(-0.5, 1.5, 7)
    res_a = scan(delta_scan_config(delta_tilde=grid, selectors=()))
    res_b = scan(delta_scan_config(delta_tilde=grid,
                                   selectors=parse_selectors("")))
    assert np.array_equal(res_a.sector_raw[1], res_b.sector_raw[1])


def test_two_atom_exchange_symmetry():
    # spectrum value is invariant under swapping the two couplings
    from coincspec.hamiltonian import SystemConfig
    from coincspec.liouville import SteadyStateSolver, assemble_blocks
    from coincspec.observables import w2

    delta = 9.0 * (0.7 + 1)
    vals = []
    for pair in ((7.0, 3.0), (3.0, 7.0)):
        cfg = SystemConfig(couplings=pair, gamma=2.0, e1=0.5, e2=1.0,
                           g_f=9.0, n_max=2)
        sol = SteadyStateSolver(assemble_blocks(cfg), 2).solve(delta)
        vals.append(w2(sol.rho0, cfg.space).value)
    assert vals[0] == pytest.approx(vals[1], rel=1e-10)


def test_weak_drive_quartic_scaling():
    # w2 ~ E^4 at leading order under uniform drive scaling
    from coincspec.hamiltonian import SystemConfig
    from coincspec.liouville import steady_state
    from coincspec.observables import w2

    delta = 9.0 * (0.8 + 1)
    vals = []
    scales = (0.2, 0.1)
    for s in scales:
        cfg = SystemConfig(couplings=(9.0,), gamma=2.0, e1=s / np.sqrt(2),
                           e2=s * np.sqrt(2), g_f=9.0, n_max=3)
        vals.append(w2(steady_state(cfg, delta).rho0, cfg.space).value)
    slope = np.log(vals[0] / vals[1]) / np.log(scales[0] / scales[1])
    assert slope == pytest.approx(4.0, abs=0.2)


def test_sector_mix():
    one = np.array([1.0, 2.0, 3.0])
    two = np.array([10.0, 10.0, 10.0])
    mixed = sector_mix({1: one, 2: two}, {1: 0.9, 2: 0.1}, 3)
    assert np.allclose(mixed, 0.9 * one + 0.1 * two)
    with pytest.raises(ValueError):
        sector_mix({1: one}, {1: 1.0}, 4)
    # p2 = 0 reduces to the scaled one-atom spectrum
    assert np.allclose(sector_mix({1: one, 2: two}, {1: 0.9, 2: 0.0}, 3),
                       0.9 * one)


def test_all_entries_finite_or_failed():
    cfg = delta_scan_config(delta_tilde=np.linspace(-1.2, 2.2, 9))
    res = scan(cfg)
    assert np.all(np.isfinite(res.mixed))
    assert res.failures == []


def test_parallel_matches_serial():
    grid = np.linspace(-0.6, 1.8, 7)
    dist = build_distribution("uniform-beam", g_max=9.0, resolution=8)
    serial = scan(delta_scan_config(delta_tilde=grid, distribution=dist,
                                    threads=1))
    parallel = scan(delta_scan_config(delta_tilde=grid, distribution=dist,
                                      threads=2))
    assert np.array_equal(serial.sector_raw[1], parallel.sector_raw[1])


# ---------------------------------------------------------------------------
# peak detection


def test_monotone_has_no_peaks():
    grid = np.linspace(0, 1, 11)
    assert detect_peaks(np.linspace(0, 5, 11), grid) == []


def test_triangle_single_peak():
    grid = np.linspace(0, 1, 11)
    v = np.concatenate([np.linspace(0, 1, 6), np.linspace(1, 0, 6)[1:]])
    peaks = detect_peaks(v, grid)
    assert len(peaks) == 1
    assert peaks[0].index == 5
    assert peaks[0].prominence == pytest.approx(1.0)


def test_prominence_uses_higher_flanking_minimum():
    grid = np.arange(7.0)
    v = np.array([0.0, 3.0, 2.0, 5.0, 4.5, 6.0, 0.0])
    peaks = detect_peaks(v, grid)
    by_idx = {p.index: p for p in peaks}
    assert by_idx[3].prominence == pytest.approx(5.0 - max(2.0, 4.5))
    assert by_idx[1].prominence == pytest.approx(3.0 - max(0.0, 2.0))


def test_peak_threshold_filters():
    grid = np.arange(7.0)
    v = np.array([0.0, 3.0, 2.0, 5.0, 4.5, 6.0, 0.0])
    peaks = detect_peaks(v, grid, prominence_threshold=1.0)
    assert [p.index for p in peaks] == [1, 5]


def test_peaks_skip_nan_segments():
    grid = np.arange(7.0)
    v = np.array([0.0, 3.0, np.nan, 5.0, 4.5, 6.0, 0.0])
    peaks = detect_peaks(v, grid)
    assert all(np.isfinite(p.height) for p in peaks)
    assert 1 not in [p.index for p in peaks]  # neighbor NaN disqualifies


def test_detect_peaks_needs_three_points():
    with pytest.raises(ValueError):
        detect_peaks(np.array([1.0, 2.0]), np.array([0.0, 1.0]))
