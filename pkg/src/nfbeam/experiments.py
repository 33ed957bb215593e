"""Seeded experiment runners: scenario generation, metrics, CSV/JSON artifacts.

Every runner is a pure function of (config, seed): scenario randomness comes
from np.random.default_rng on seeds derived arithmetically from the config
seed, and CSV bodies are formatted to 9 significant digits, so re-running an
experiment reproduces its artifacts byte for byte.  Summaries additionally
carry a wall-clock timing block, which is the one field outside the
determinism contract.
"""

import csv
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .arrays import (
    ArrayConfig,
    SourceLocation,
    _quadratic_phase,
    field_boundaries,
    frft_basis,
    range_of,
    steering_exact,
    steering_fresnel,
    surrogate_coords,
)
from .beamspace import beamspace_direct, beamspace_fast, default_grid
from .estimation import build_channel, nmse, omp_estimate
from .mainlobe import (
    cross_section,
    gaussian_fit,
    low_mainlobe_measure,
    psp_predict,
    width_3db,
)
from .training import (
    HierarchicalTrainer,
    MeasurementModel,
    polar_codebook,
    refine_measured,
    track,
    train_exhaustive,
)

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "run", "KINDS"]

NMSE_FLOOR_DB = -300.0


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the key."""


# per-kind schema: key -> (allowed types, default); REQUIRED means no default
REQUIRED = object()

_ARRAY_KEYS = {
    "n": (int, 512),
    "wavelength": ((int, float), 0.01),
    "spacing": ((int, float, type(None)), None),
}

KINDS = {
    "beamspace": {
        **_ARRAY_KEYS,
        "theta": ((int, float), 0.2),
        "r": ((int, float, type(None)), 50.0),
        "s_hat": ((int, float, type(None)), None),
        "num_angles": (int, 512),
        "num_surrogates": (int, 11),
        "s_max": ((int, float, type(None)), None),
        "method": (str, "fast"),
        "seed": (int, None),
    },
    "widths": {
        **{k: v for k, v in _ARRAY_KEYS.items() if k != "n"},
        "n_values": (list, [64, 256, 512]),
        "seed": (int, None),
    },
    "gaussian": {
        **_ARRAY_KEYS,
        "threshold": ((int, float), 0.5),
        "seed": (int, None),
    },
    "psp": {
        **_ARRAY_KEYS,
        "ds_list": (list, [50, 100, 200]),
        "resolution": ((int, float, type(None)), None),
        "seed": (int, None),
    },
    "train": {
        **_ARRAY_KEYS,
        "snr_db": ((int, float), 10.0),
        "trials": (int, 500),
        "k1": (int, 8),
        "num_probes": (int, 7),
        "num_angles": (int, 512),
        "num_surrogates": (int, 11),
        "seed": (int, REQUIRED),
    },
    "track": {
        **_ARRAY_KEYS,
        "snr_db": ((int, float, type(None)), None),
        "slots": (int, 60),
        "gamma": ((int, float), 1 / math.sqrt(2)),
        "theta0": ((int, float), 0.05),
        "s0_scaled": ((int, float), 8.0),
        "v_theta_scaled": ((int, float), 0.2),
        "v_s_scaled": ((int, float), 0.0),
        "seed": (int, REQUIRED),
    },
    "estimate": {
        **{k: v for k, v in _ARRAY_KEYS.items() if k != "n"},
        "n": (int, 256),
        "snr_db": ((int, float), 20.0),
        "trials": (int, 200),
        "num_paths": (int, 3),
        "num_angles": (int, 512),
        "num_surrogates": (int, 11),
        "seed": (int, REQUIRED),
    },
}

STOCHASTIC = ("train", "track", "estimate")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description: kind plus filled-in parameters."""

    kind: str
    params: dict


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON experiment config.

    Unknown keys, wrong types, and a missing seed on stochastic kinds are
    all configuration errors naming the offending key.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    kind = raw.get("kind")
    if kind is None:
        raise ConfigError("missing required key: kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown kind: {kind!r} (choose from {sorted(KINDS)})")
    schema = KINDS[kind]
    params = {}
    for key, value in raw.items():
        if key == "kind":
            continue
        if key not in schema:
            raise ConfigError(f"unknown key for kind {kind!r}: {key!r}")
        types, _ = schema[key]
        if isinstance(value, bool) or not isinstance(value, types):
            raise ConfigError(f"key {key!r} has wrong type: {type(value).__name__}")
        params[key] = value
    for key, (types, default) in schema.items():
        if key in params:
            continue
        if default is REQUIRED:
            raise ConfigError(f"missing required key: {key!r}")
        params[key] = default
    if kind in STOCHASTIC and params.get("seed") is None:
        raise ConfigError("missing required key: 'seed'")
    return ExperimentConfig(kind, params)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.9g}"


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _array_config(p) -> ArrayConfig:
    return ArrayConfig(p["n"], p["wavelength"], p["spacing"])


def _run_beamspace(p):
    cfg = _array_config(p)
    grid = default_grid(cfg, p["num_angles"], p["num_surrogates"], p["s_max"])
    if p["s_hat"] is not None:
        theta, s_hat = p["theta"], p["s_hat"]
        r = range_of(cfg, theta, s_hat)
    elif p["r"] is not None:
        loc = SourceLocation(p["r"], p["theta"])
        theta, s_hat = surrogate_coords(cfg, loc)
        r = p["r"]
    else:
        raise ConfigError("one of 'r' or 's_hat' is required")
    x = steering_fresnel(cfg, SourceLocation(r, theta))
    if p["method"] == "fast":
        bmap = beamspace_fast(x, grid, cfg)
    elif p["method"] == "direct":
        bmap = beamspace_direct(x, grid, cfg)
    else:
        raise ConfigError("key 'method' must be 'fast' or 'direct'")

    rows = []
    for l, s in enumerate(grid.surrogates):
        for k, t in enumerate(grid.angles):
            c = bmap.coefficients[l, k]
            rows.append((s, t, c.real, c.imag, abs(c)))
    peak_l, peak_k = bmap.peak_cell()
    near_k = int(np.argmin(np.abs(grid.angles - theta)))
    near_l = int(np.argmin(np.abs(grid.surrogates - s_hat)))
    row_energy = (np.abs(bmap.coefficients) ** 2).sum(axis=1)
    target = grid.num_angles / cfg.num_antennas
    parseval_dev = float(np.abs(row_energy - target).max() / target)
    # row-energy identity only holds on a DFT-compatible lattice
    parseval_applies = (
        cfg.spacing == cfg.wavelength / 2 and grid.num_angles >= cfg.num_antennas
    )
    metrics = {
        "peak_theta": float(grid.angles[peak_k]),
        "peak_s_hat": float(grid.surrogates[peak_l]),
        "input_theta": float(theta),
        "input_s_hat": float(s_hat),
        "parseval_rel_dev": parseval_dev,
        "peak_gain": float(bmap.gains[peak_l, peak_k]),
    }
    # off-grid surrogate mismatch ripples can tip the argmax one cell over
    checks = {
        "peak_within_one_cell": abs(peak_l - near_l) <= 1 and abs(peak_k - near_k) <= 1,
        "parseval": parseval_dev <= 1e-9 if parseval_applies else True,
    }
    header = ["s_hat", "theta_hat", "re", "im", "gain"]
    return "beamspace.csv", header, rows, metrics, checks


def _measure_widths(cfg):
    n = cfg.num_antennas
    ang = cross_section(cfg, (0.0, 0.0), "angle", 2.5 / n, 1 / (64 * n))
    sur = cross_section(cfg, (0.0, 0.0), "surrogate", 6.0 / n**2, 0.035 / n**2)
    return width_3db(ang), width_3db(sur)


def _run_widths(p):
    rows = []
    worst = 0.0
    for n in p["n_values"]:
        if not isinstance(n, int):
            raise ConfigError("key 'n_values' must hold integers")
        cfg = ArrayConfig(n, p["wavelength"], p["spacing"])
        wa, ws = _measure_widths(cfg)
        for axis, pred, meas in (("angle", 2 / n, wa), ("surrogate", 7 / n**2, ws)):
            rel = (meas - pred) / pred
            worst = max(worst, abs(rel))
            rows.append((n, axis, pred, meas, rel))
    metrics = {"worst_rel_dev": worst}
    checks = {"within_15pct": worst <= 0.15}
    return "widths.csv", ["n", "axis", "predicted", "measured", "rel_dev"], rows, metrics, checks


def _run_gaussian(p):
    cfg = _array_config(p)
    fit = gaussian_fit(cfg, (0.0, 0.0), threshold=p["threshold"])
    wa, ws = _measure_widths(cfg)
    fa, fs = fit.widths_3db
    rows = [
        (cfg.num_antennas, "angle", fa, wa, (fa - wa) / wa),
        (cfg.num_antennas, "surrogate", fs, ws, (fs - ws) / ws),
    ]
    metrics = {
        "mean_abs_dev": fit.mean_abs_dev,
        "g0": fit.g0,
        "sigma_theta": fit.sigma_theta,
        "sigma_s": fit.sigma_s,
        "fit_points": fit.num_points,
    }
    checks = {
        "mean_abs_dev_1pct": fit.mean_abs_dev <= 0.01,
        "widths_within_10pct": abs(rows[0][4]) <= 0.10 and abs(rows[1][4]) <= 0.10,
    }
    return "gaussian.csv", ["n", "axis", "predicted", "measured", "rel_dev"], rows, metrics, checks


def _run_psp(p):
    cfg = _array_config(p)
    n = cfg.num_antennas
    res = p["resolution"] if p["resolution"] is not None else 1 / (8 * n)
    rows = []
    widths = []
    ok_w = ok_g = True
    for k in p["ds_list"]:
        ds = k / n**2
        pred = psp_predict(cfg, ds)
        meas = low_mainlobe_measure(cfg, ds, res)
        rows.append((n, k, pred.width, meas.width, pred.avg_gain, meas.avg_gain))
        widths.append((ds, meas.width))
        ok_w &= abs(meas.width - pred.width) <= 1 / n + res
        ok_g &= abs(pred.avg_gain - meas.avg_gain) / meas.avg_gain <= 0.05
    slope_ok = True
    slope = None
    if len(widths) >= 2:
        xs = np.array([w[0] for w in widths])
        ys = np.array([w[1] for w in widths])
        slope = float(np.polyfit(xs, ys, 1)[0])
        slope_ok = abs(slope - 2 * n) / (2 * n) <= 0.10
    metrics = {"width_slope": slope, "slope_target": 2 * n}
    checks = {"widths": ok_w, "gains_within_5pct": ok_g, "slope_within_10pct": slope_ok}
    return "psp.csv", ["n", "ds", "w_pred", "w_meas", "g_pred", "g_meas"], rows, metrics, checks


def _train_user(cfg, trainer, book, theta, r, snr_db, user_seed):
    """All three methods on one user; returns the three CSV rows."""
    h = steering_exact(cfg, SourceLocation(r, theta)).elements
    best = book.best_gain(h)
    n = cfg.num_antennas

    mm_e = MeasurementModel(snr_db, 4 * user_seed + 1)
    res_e = train_exhaustive(h, book, mm_e)

    mm_h = MeasurementModel(snr_db, 4 * user_seed + 2)
    res_h = trainer.train(h, mm_h, reference=book)
    pilots_h = res_h.pilots

    coarse = refine_measured(
        cfg, h, mm_h, (res_h.theta, res_h.s), (1 / n, 4 / n**2)
    )
    fine = refine_measured(
        cfg,
        h,
        mm_h,
        (coarse.estimate.theta, coarse.estimate.s),
        (1 / (2 * n), 1.5 / n**2),
    )
    w = _quadratic_phase(cfg, fine.estimate.theta, max(fine.estimate.s, 0.0))
    rho_ref = float(abs(np.vdot(w, h)) / best)
    rows = [
        (user_seed, theta, r, "exhaustive", res_e.pilots, res_e.rho),
        (user_seed, theta, r, "hierarchical", pilots_h, res_h.rho),
        (user_seed, theta, r, "refined", mm_h.draws, rho_ref),
    ]
    return rows



def _run_train(p):
    cfg = _array_config(p)
    grid = default_grid(cfg, p["num_angles"], p["num_surrogates"])
    book = polar_codebook(cfg, grid)
    trainer = HierarchicalTrainer(cfg, p["k1"], p["num_probes"])
    bounds = field_boundaries(cfg)
    rng = np.random.default_rng(p["seed"])
    thetas = rng.uniform(-1, 1, p["trials"])
    ranges = np.exp(
        rng.uniform(math.log(bounds.fresnel), math.log(bounds.rayleigh), p["trials"])
    )
    rows = []
    for i in range(p["trials"]):
        rows.extend(
            _train_user(
                cfg, trainer, book, float(thetas[i]), float(ranges[i]),
                p["snr_db"], p["seed"] + i,
            )
        )
    rho_e = np.array([r[5] for r in rows if r[3] == "exhaustive"])
    rho_r = np.array([r[5] for r in rows if r[3] == "refined"])
    pilots_r = np.array([r[4] for r in rows if r[3] == "refined"])
    metrics = {
        "pilots_exhaustive": len(book),
        "pilots_hier": trainer.pilot_count,
        "mean_rho_exhaustive": float(rho_e.mean()),
        "success_rate_refined": float((rho_r >= 0.95).mean()),
        "median_rho_refined": float(np.median(rho_r)),
        "median_pilots_refined": float(np.median(pilots_r)),
    }
    checks = {
        "pilot_counts": len(book) == grid.num_angles * grid.num_surrogates
        and trainer.pilot_count == p["k1"] + p["num_probes"],
        "exhaustive_mean_rho": rho_e.mean() >= 0.99,
        "refined_success_90pct": (rho_r >= 0.95).mean() >= 0.90,
    }
    header = ["seed", "user_theta", "user_r", "method", "pilots", "rho"]
    return "train.csv", header, rows, metrics, checks


def _run_track(p):
    cfg = _array_config(p)
    n = cfg.num_antennas
    snr = math.inf if p["snr_db"] is None else p["snr_db"]
    mm = MeasurementModel(snr, p["seed"])
    traj = []
    for t in range(p["slots"]):
        theta = p["theta0"] + p["v_theta_scaled"] / n * t
        s_hat = max(p["s0_scaled"] / n**2 + p["v_s_scaled"] / n**2 * t, 1e-12)
        traj.append(SourceLocation(range_of(cfg, theta, s_hat), theta))
    result = track(traj, cfg, mm, p["gamma"])
    rows = [(r.slot, r.rho, r.retrained) for r in result.records]
    metrics = {
        "mean_rho": result.mean_rho,
        "retrain_count": len(result.retrain_slots),
        "retrain_slots": list(result.retrain_slots),
        "pilots": result.pilots,
        "lost_at": result.lost_at,
    }
    checks = {
        "not_lost": result.lost_at is None,
        "mean_rho": result.mean_rho >= 0.85,
    }
    return "track.csv", ["slot", "rho", "retrained"], rows, metrics, checks


def _run_estimate(p):
    cfg = _array_config(p)
    n = cfg.num_antennas
    grid = default_grid(cfg, p["num_angles"], p["num_surrogates"])
    num_cells = grid.num_angles * grid.num_surrogates
    rows = []
    nmses = []
    hits = 0
    for i in range(p["trials"]):
        rng = np.random.default_rng(p["seed"] + i)
        cells = rng.choice(num_cells, size=p["num_paths"], replace=False)
        amp = (
            rng.standard_normal(p["num_paths"])
            + 1j * rng.standard_normal(p["num_paths"])
        ) / math.sqrt(2)
        h = np.zeros(n, dtype=complex)
        for c, a in zip(cells, amp):
            l, k = divmod(int(c), grid.num_angles)
            h += a * frft_basis(cfg, float(grid.angles[k]), float(grid.surrogates[l])).elements
        sigma = np.linalg.norm(h) * 10 ** (-p["snr_db"] / 20) / math.sqrt(n)
        noise = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
        y = h + sigma * noise
        report = omp_estimate(y, grid, cfg, max_paths=p["num_paths"], reference=h)
        got = {l * grid.num_angles + k for l, k in report.supports}
        exact = got == set(int(c) for c in cells)
        hits += exact
        db = max(report.nmse_db, NMSE_FLOOR_DB)
        nmses.append(db)
        rows.append((p["seed"] + i, p["snr_db"], p["num_paths"], db, exact))
    metrics = {
        "support_rate": hits / p["trials"],
        "median_nmse_db": float(np.median(nmses)),
        "worst_nmse_db": float(np.max(nmses)),
    }
    checks = {
        "support_95pct": hits / p["trials"] >= 0.95,
        "median_nmse": float(np.median(nmses)) <= -20.0,
    }
    header = ["seed", "snr_db", "L", "nmse_db", "support_exact"]
    return "estimate.csv", header, rows, metrics, checks


_RUNNERS = {
    "beamspace": _run_beamspace,
    "widths": _run_widths,
    "gaussian": _run_gaussian,
    "psp": _run_psp,
    "train": _run_train,
    "track": _run_track,
    "estimate": _run_estimate,
}


def run(config: ExperimentConfig, out_dir) -> int:
    """Execute one experiment and write its artifacts.

    Writes <kind>.csv, summary.json, and config.json (the effective config
    echo) into out_dir.  Returns 0 when all checks pass, 2 otherwise.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    csv_name, header, rows, metrics, checks = _RUNNERS[config.kind](config.params)
    elapsed = time.perf_counter() - started
    _write_csv(out / csv_name, header, rows)

    effective = {"kind": config.kind, **config.params}
    passed = bool(all(checks.values()))
    summary = _jsonable(
        {
            "kind": config.kind,
            "version": __version__,
            "config": effective,
            "metrics": metrics,
            "checks": checks,
            "passed": passed,
            "timing": {"seconds": elapsed},
        }
    )
    with open(out / "summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=False)
        f.write("\n")
    with open(out / "config.json", "w") as f:
        json.dump(effective, f, indent=2)
        f.write("\n")
    return 0 if passed else 2
