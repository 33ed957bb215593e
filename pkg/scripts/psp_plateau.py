"""Low-mainlobe plateau against the stationary-phase laws.

For a sweep of surrogate-distance offsets, prints the measured plateau
width and mean gain next to the predictions W = 2 N ds and
G = 1/(N sqrt(ds)).

Usage: python scripts/psp_plateau.py [N]
"""

import sys

from nfbeam import ArrayConfig, low_mainlobe_measure, psp_predict

n = int(sys.argv[1]) if len(sys.argv) > 1 else 512
cfg = ArrayConfig(n)

print(f"N = {n}  (offsets in 1/N^2 units)")
print(f"{'ds':>6} {'W pred':>9} {'W meas':>9} {'G pred':>9} {'G meas':>9} {'G dev':>7}")
for k in (25, 50, 75, 100, 150, 200, 300):
    ds = k / n**2
    pred = psp_predict(cfg, ds)
    meas = low_mainlobe_measure(cfg, ds)
    print(
        f"{k:>6} {pred.width:>9.5f} {meas.width:>9.5f} "
        f"{pred.avg_gain:>9.5f} {meas.avg_gain:>9.5f} "
        f"{(pred.avg_gain - meas.avg_gain) / meas.avg_gain:>+7.1%}"
    )
