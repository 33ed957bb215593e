"""Acceptance gate: one test (one pass/fail line under pytest -v) per
release criterion.  Thresholds and runtime budgets are stated inline; the
helper experiments run through the same runner code the CLI uses.
"""

import json
import math
import time

import numpy as np
import pytest

from nfbeam.arrays import ArrayConfig, frft_basis, range_of
from nfbeam.beamspace import beamspace_direct, beamspace_fast, default_grid
from nfbeam.estimation import omp_estimate
from nfbeam.experiments import parse_config, run
from nfbeam.mainlobe import (
    cross_section,
    gaussian_fit,
    low_mainlobe_measure,
    psp_predict,
    width_3db,
)
from nfbeam.training import MeasurementModel, refine_measured

N_SWEEP = (64, 256, 512)


def _measure_angle_width(n):
    cfg = ArrayConfig(n)
    return width_3db(cross_section(cfg, (0.0, 0.0), "angle", 2.5 / n, 1 / (64 * n)))


def _measure_surrogate_width(n):
    cfg = ArrayConfig(n)
    return width_3db(
        cross_section(cfg, (0.0, 0.0), "surrogate", 6 / n**2, 0.035 / n**2)
    )


def _random_unit(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return x / np.linalg.norm(x)


def test_c01_angle_beamwidth_law():
    # measured 3 dB angle width within 15% of 2/N for N in {64, 256, 512}
    started = time.perf_counter()
    for n in N_SWEEP:
        w = _measure_angle_width(n)
        rel = abs(w - 2 / n) / (2 / n)
        assert rel <= 0.15, f"N={n}: angle width {w:.3e} vs 2/N, rel dev {rel:.3f}"
    assert time.perf_counter() - started < 10.0


def test_c02_distance_beamwidth_law():
    # measured 3 dB surrogate width within 15% of 7/N^2 for the same sweep
    started = time.perf_counter()
    for n in N_SWEEP:
        w = _measure_surrogate_width(n)
        rel = abs(w - 7 / n**2) / (7 / n**2)
        assert rel <= 0.15, f"N={n}: surrogate width {w:.3e} vs 7/N^2, rel {rel:.3f}"
    assert time.perf_counter() - started < 30.0


def test_c03_gaussian_approximation():
    # N=512 fit over the >= 0.5 power region: mean abs gain deviation <= 0.01
    started = time.perf_counter()
    fit = gaussian_fit(ArrayConfig(512), (0.0, 0.0), threshold=0.5)
    assert fit.mean_abs_dev <= 0.01, f"mean abs deviation {fit.mean_abs_dev:.5f}"
    assert time.perf_counter() - started < 30.0


def test_c04_psp_low_mainlobe_laws():
    # widths within 1/N + resolution of 2 N ds; average gains within 5% of
    # 1/(N sqrt(ds)); width-vs-ds regression slope within 10% of 2N
    started = time.perf_counter()
    n = 512
    cfg = ArrayConfig(n)
    res = 1 / (8 * n)
    widths = []
    for k in (50, 100, 200):
        ds = k / n**2
        pred = psp_predict(cfg, ds)
        meas = low_mainlobe_measure(cfg, ds, res)
        assert abs(meas.width - pred.width) <= 1 / n + res, f"ds={k}/N^2 width"
        rel = abs(meas.avg_gain - pred.avg_gain) / meas.avg_gain
        assert rel <= 0.05, f"ds={k}/N^2 gain rel dev {rel:.4f}"
        widths.append((ds, meas.width))
    xs, ys = np.array(widths).T
    slope = np.polyfit(xs, ys, 1)[0]
    assert abs(slope - 2 * n) / (2 * n) <= 0.10, f"slope {slope:.1f} vs {2 * n}"
    assert time.perf_counter() - started < 60.0


def test_c05_parseval_row_energy():
    # every row energy equals A/N within 1e-9 relative, random unit inputs
    n = 256
    cfg = ArrayConfig(n)
    for num_a in (n, 2 * n):
        grid = default_grid(cfg, num_angles=num_a, num_surrogates=11)
        for seed in range(3):
            bmap = beamspace_fast(_random_unit(n, seed), grid, cfg)
            energy = (np.abs(bmap.coefficients) ** 2).sum(axis=1)
            dev = np.abs(energy - num_a / n).max() / (num_a / n)
            assert dev <= 1e-9, f"A={num_a} seed={seed}: row energy dev {dev:.2e}"


def test_c06_translation_invariance():
    # whole-cell offsets translate the gain surface, deviation <= 1e-9
    cfg = ArrayConfig(256)
    grid = default_grid(cfg, num_angles=512, num_surrogates=11)
    k, l, dk, dl = 200, 2, 37, 3
    x1 = frft_basis(cfg, float(grid.angles[k]), float(grid.surrogates[l]))
    x2 = frft_basis(cfg, float(grid.angles[k + dk]), float(grid.surrogates[l + dl]))
    g1 = beamspace_fast(x1, grid, cfg).gains
    g2 = beamspace_fast(x2, grid, cfg).gains
    s, a = grid.num_surrogates, grid.num_angles
    dev = np.abs(g1[: s - dl, : a - dk] - g2[dl:, dk:]).max()
    assert dev <= 1e-9, f"translated surfaces differ by {dev:.2e}"


def test_c07_far_field_subset():
    # the s_hat = 0 row is the zero-padded DFT beamspace
    n = 256
    cfg = ArrayConfig(n)
    grid = default_grid(cfg, num_angles=2 * n, num_surrogates=11)
    for seed in range(3):
        x = _random_unit(n, 10 + seed)
        bmap = beamspace_fast(x, grid, cfg)
        m = np.arange(n)
        dft = np.abs(np.fft.fft(x * np.exp(1j * np.pi * m), n=2 * n)) / math.sqrt(n)
        dev = np.abs(bmap.gains[0] - dft).max()
        assert dev <= 1e-9, f"seed={seed}: far-field row deviates {dev:.2e}"


def test_c08_fast_transform():
    # coefficient agreement within 1e-6 relative; time ratio <= 0.2 at N=1024
    for n in (64, 512):
        cfg = ArrayConfig(n)
        grid = default_grid(cfg, num_angles=2 * n, num_surrogates=11)
        x = _random_unit(n, n)
        a = beamspace_direct(x, grid, cfg).coefficients
        b = beamspace_fast(x, grid, cfg).coefficients
        rel = np.abs(a - b).max() / np.abs(a).max()
        assert rel <= 1e-6, f"N={n}: fast/direct deviation {rel:.2e}"

    n = 1024
    cfg = ArrayConfig(n)
    grid = default_grid(cfg, num_angles=2 * n, num_surrogates=11)
    x = _random_unit(n, 99)
    beamspace_fast(x, grid, cfg)  # warm any fft plan caches
    t_direct = min(
        _timed(lambda: beamspace_direct(x, grid, cfg)) for _ in range(3)
    )
    t_fast = min(_timed(lambda: beamspace_fast(x, grid, cfg)) for _ in range(3))
    ratio = t_fast / t_direct
    assert ratio <= 0.2, f"fast/direct time ratio {ratio:.3f} at N=1024"


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def test_c09_training_overhead_and_success(tmp_path):
    # 5632 exhaustive and 15 hierarchical pilots; at 10 dB over 500 users,
    # hierarchical + refinement reaches rho >= 0.95 for >= 90% of users
    started = time.perf_counter()
    rc = run(parse_config('{"kind": "train", "seed": 1}'), tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    m = summary["metrics"]
    assert m["pilots_exhaustive"] == 5632
    assert m["pilots_hier"] == 15
    assert m["success_rate_refined"] >= 0.90, m
    assert m["mean_rho_exhaustive"] >= 0.99, m
    assert rc == 0
    assert time.perf_counter() - started < 300.0


def test_c10_refinement_accuracy():
    # noiseless off-grid users: estimates within 10% of a grid cell per
    # coordinate, implied range within 5% for r in [10, 100] m
    n = 512
    cfg = ArrayConfig(n)
    ht, hs = 1 / n, 2 / n**2
    cell_t, cell_s = 2 / 512, 17.6 / n**2  # beamspace grid cells at defaults
    mm = MeasurementModel(math.inf, 0)
    rng = np.random.default_rng(7)
    for _ in range(100):
        r = math.exp(rng.uniform(math.log(10), math.log(100)))
        theta = rng.uniform(-0.9, 0.9)
        s_hat = cfg.spacing**2 * (1 - theta**2) / (cfg.wavelength * r)
        h = frft_basis(cfg, theta, s_hat)
        start = (round(theta / ht) * ht, round(s_hat / hs) * hs)
        out = refine_measured(cfg, h, mm, start, (ht, hs))
        assert out.centered
        est = out.estimate
        assert abs(est.theta - theta) <= 0.1 * cell_t, "angle estimate"
        assert abs(est.s - s_hat) <= 0.1 * cell_s, "surrogate estimate"
        assert abs(est.range_m - r) / r <= 0.05, "implied range"


def test_c11_sparse_estimation(tmp_path):
    # L=3 on-grid at 20 dB: NMSE <= -20 dB and exact support in >= 95% of
    # 200 trials; single-path success position-invariant within 2 points
    started = time.perf_counter()
    rc = run(parse_config('{"kind": "estimate", "seed": 3}'), tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    m = summary["metrics"]
    assert m["support_rate"] >= 0.95, m
    assert m["median_nmse_db"] <= -20.0, m
    assert m["worst_nmse_db"] <= -20.0, m
    assert rc == 0

    # position invariance: one path parked on a spread of grid cells
    n = 256
    cfg = ArrayConfig(n)
    grid = default_grid(cfg, num_angles=512, num_surrogates=11)
    rates = []
    for l in (0, 2, 5, 8, 10):
        for k in (16, 128, 256, 384, 496):
            atom = frft_basis(
                cfg, float(grid.angles[k]), float(grid.surrogates[l])
            ).elements
            hits = 0
            trials = 50
            for t in range(trials):
                rng = np.random.default_rng(10_000 + 97 * (l * 512 + k) + t)
                amp = (rng.standard_normal() + 1j * rng.standard_normal()) / math.sqrt(2)
                h = amp * atom
                sigma = abs(amp) * 10 ** (-20 / 20) / math.sqrt(n)
                noise = (
                    rng.standard_normal(n) + 1j * rng.standard_normal(n)
                ) / math.sqrt(2)
                report = omp_estimate(h + sigma * noise, grid, cfg, max_paths=1)
                hits += report.supports == ((l, k),)
            rates.append(hits / trials)
    rates = np.array(rates)
    spread = rates.max() - rates.min()
    assert spread <= 0.02 + 1e-12, f"success rates vary by {spread:.3f}: {rates}"
    assert time.perf_counter() - started < 300.0


def test_c12_determinism(tmp_path):
    # identical config and seed reproduce every CSV byte for byte
    cases = [
        ('{"kind": "train", "trials": 25, "seed": 6}', "train.csv"),
        ('{"kind": "track", "seed": 6}', "track.csv"),
        ('{"kind": "estimate", "trials": 40, "seed": 6}', "estimate.csv"),
        ('{"kind": "beamspace"}', "beamspace.csv"),
    ]
    for text, name in cases:
        cfg = parse_config(text)
        run(cfg, tmp_path / "a" / name)
        run(cfg, tmp_path / "b" / name)
        a = (tmp_path / "a" / name / name).read_bytes()
        b = (tmp_path / "b" / name / name).read_bytes()
        assert a == b, f"{name} not reproducible"
        assert a.count(b"\n") > 1
