"""Pilot overhead versus beamforming quality for the three training modes.

Draws users uniform in angle and log-uniform in range over the radiating
near field, trains each way at the given SNR, and prints pilot counts with
gain-ratio percentiles.

Usage: python scripts/training_overhead.py [users] [snr_db] [seed]
"""

import math
import sys

import numpy as np

from nfbeam import (
    ArrayConfig,
    HierarchicalTrainer,
    MeasurementModel,
    SourceLocation,
    field_boundaries,
    frft_basis,
    polar_codebook,
    refine_measured,
    steering_exact,
    train_exhaustive,
)

users = int(sys.argv[1]) if len(sys.argv) > 1 else 200
snr_db = float(sys.argv[2]) if len(sys.argv) > 2 else 10.0
seed = int(sys.argv[3]) if len(sys.argv) > 3 else 1

cfg = ArrayConfig(512)
n = cfg.num_antennas
book = polar_codebook(cfg)
trainer = HierarchicalTrainer(cfg)
bounds = field_boundaries(cfg)

rng = np.random.default_rng(seed)
rows = {"exhaustive": [], "hierarchical": [], "refined": []}
pilots = {"exhaustive": [], "hierarchical": [], "refined": []}
for i in range(users):
    theta = rng.uniform(-1, 1)
    r = math.exp(rng.uniform(math.log(bounds.fresnel), math.log(bounds.rayleigh)))
    h = steering_exact(cfg, SourceLocation(r, theta)).elements
    best = book.best_gain(h)

    res_e = train_exhaustive(h, book, MeasurementModel(snr_db, 4 * (seed + i) + 1))
    rows["exhaustive"].append(res_e.rho)
    pilots["exhaustive"].append(res_e.pilots)

    mm = MeasurementModel(snr_db, 4 * (seed + i) + 2)
    res_h = trainer.train(h, mm, reference=book)
    rows["hierarchical"].append(res_h.rho)
    pilots["hierarchical"].append(res_h.pilots)

    out = refine_measured(cfg, h, mm, (res_h.theta, res_h.s), (1 / n, 4 / n**2))
    out = refine_measured(
        cfg, h, mm, (out.estimate.theta, out.estimate.s), (1 / (2 * n), 1.5 / n**2)
    )
    w = frft_basis(cfg, out.estimate.theta, max(out.estimate.s, 0.0)).elements
    rows["refined"].append(abs(np.vdot(w, h)) / best)
    pilots["refined"].append(mm.draws)

print(f"{users} users at {snr_db:g} dB, N = {n}")
print(f"{'method':>14} {'pilots':>8} {'median rho':>11} {'p10':>7} {'P(>=0.95)':>10}")
for method, rhos in rows.items():
    rhos = np.array(rhos)
    print(
        f"{method:>14} {np.median(pilots[method]):>8.0f} "
        f"{np.median(rhos):>11.3f} {np.percentile(rhos, 10):>7.3f} "
        f"{np.mean(rhos >= 0.95):>10.1%}"
    )
