"""
Median and tail distances across the four density regimes
==========================================================

Dense/sparse lines crossed with dense/sparse points. For each regime the
exact CDFs are inverted to get the median and 95th percentile path
distance from both reference points.
"""

from manhattan_cox import ModelParams, cdf_intersection, cdf_typical, quantile
from manhattan_cox.cli import PRESETS
from manhattan_cox.geom import Mode

print("regime  mode           lambda_l  lambda_c  median_km  p95_km")
for mode in Mode:
    for name, (lam_l, lam_c) in PRESETS[mode].items():
        p = ModelParams(lam_l, lam_c)
        if mode is Mode.INTERSECTION:
            F = lambda t: cdf_intersection(t, p)
        else:
            F = lambda t: cdf_typical(t, p)
        hint = 1.0 / (lam_l + lam_c)
        med = quantile(F, 0.5, hint, xtol=1e-6)
        p95 = quantile(F, 0.95, hint, xtol=1e-6)
        print(f"{name:6s}  {mode.value:13s}  {lam_l:8g}  {lam_c:8g}  {med:9.4f}  {p95:6.4f}")
