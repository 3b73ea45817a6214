"""
Nearest-point path distance: typical intersection vs typical point
===================================================================

Compares the exact CDFs for the two reference points in the sparse
regime (1 line/km, 0.5 points/km) and checks a short Monte-Carlo run
against each. No plotting: the numbers are printed.
"""

import numpy as np

from manhattan_cox import ModelParams, cdf_intersection, cdf_typical, estimate_cdf, ks_compare
from manhattan_cox.montecarlo import default_grid

params = ModelParams(lambda_l=1.0, lambda_c=0.5)

# A few distances in km, and the two exact CDFs there.
r = np.array([0.25, 0.5, 1.0, 2.0, 4.0])
print("distance  intersection  typical point")
for t, a, b in zip(r, cdf_intersection(r, params), cdf_typical(r, params)):
    print(f"{t:8.2f}  {a:12.4f}  {b:13.4f}")

# The typical point sits on a single street, so at small distances it
# only sees points along that street: slope 2*lambda_c instead of 4*lambda_c.
h = 1e-4
print("slopes at 0:", cdf_intersection(h, params) / h, cdf_typical(h, params) / h)

# Monte-Carlo check, 5000 trials per reference point. The band is a 95%
# DKW band plus a small slack, so roughly one run in twenty falls outside it.
for mode in ("intersection", "typical-point"):
    grid = default_grid(params, mode, 100)
    emp = estimate_cdf(params, mode, 5000, grid, seed=0)
    rep = ks_compare(emp, lambda t: cdf_intersection(t, params) if mode == "intersection" else cdf_typical(t, params),
                     mode=mode, params=params)
    print(f"{mode:14s} ks={rep.ks_statistic:.4f}  band={rep.tolerance:.4f}  pass={rep.passed}")
