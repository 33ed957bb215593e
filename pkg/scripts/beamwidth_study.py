"""Sweep the array size and compare measured 3 dB mainlobe widths with the
closed-form laws (angle: 2/N, surrogate distance: 7/N^2).

Usage: python scripts/beamwidth_study.py [N ...]
"""

import sys

from nfbeam import ArrayConfig, cross_section, predict_high_mainlobe_widths, width_3db

sizes = [int(a) for a in sys.argv[1:]] or [32, 64, 128, 256, 512, 1024]

print(f"{'N':>5} {'axis':>10} {'predicted':>12} {'measured':>12} {'rel dev':>9}")
for n in sizes:
    cfg = ArrayConfig(n)
    pred_t, pred_s = predict_high_mainlobe_widths(cfg)
    ang = cross_section(cfg, (0.0, 0.0), "angle", 2.5 / n, 1 / (64 * n))
    sur = cross_section(cfg, (0.0, 0.0), "surrogate", 6 / n**2, 0.035 / n**2)
    for axis, pred, meas in (
        ("angle", pred_t, width_3db(ang)),
        ("surrogate", pred_s, width_3db(sur)),
    ):
        print(
            f"{n:>5} {axis:>10} {pred:>12.5g} {meas:>12.5g} "
            f"{(meas - pred) / pred:>+9.2%}"
        )
