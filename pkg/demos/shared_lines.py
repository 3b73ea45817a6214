"""
Typical point: horizontal streets shared by both sides
======================================================

Given the two nearest vertical streets, the typical-point CDF treats the
searches beyond the left and the right crossing as independent. A
horizontal street can cross both search zones, so they are not. This
script prints the size of the resulting overestimate for the four
regimes and then checks the densest-street regime against simulation.

    python3 demos/shared_lines.py [trials]

The default of 50000 trials takes a few minutes on one core.
"""

import sys

import numpy as np

from manhattan_cox import ModelParams, cdf_typical, shared_line_excess, simulate_distances
from manhattan_cox.montecarlo import default_grid

regimes = {"DL-DP": (10.0, 5.0), "SL-DP": (1.0, 5.0), "DL-SP": (10.0, 0.5), "SL-SP": (1.0, 0.5)}

# The excess depends on lambda_l / lambda_c only; it grows with street density.
print("regime  l/c   peak excess  at distance (km)")
for name, lc in regimes.items():
    p = ModelParams(*lc)
    grid = default_grid(p, "typical-point", 40)[1:]
    excess = np.array([shared_line_excess(float(r), p) for r in grid])
    k = int(np.argmax(excess))
    print(f"{name:6s}  {lc[0] / lc[1]:4.1f}  {excess[k]:11.2e}  {grid[k]:.3f}")

# Simulation at DL-SP: empirical minus formula, next to minus the excess.
n = int(sys.argv[1]) if len(sys.argv) > 1 else 50_000
p = ModelParams(10.0, 0.5)
d = simulate_distances(p, "typical-point", n, seed=20_000_000)
print(f"\nDL-SP, {n} trials")
print("distance  emp - formula  -excess    std err")
for r in (0.2, 0.3, 0.4, 0.5):
    f = cdf_typical(r, p)
    print(f"{r:8.2f}  {np.mean(d <= r) - f:+13.5f}  {-shared_line_excess(r, p):+.5f}  {np.sqrt(f * (1 - f) / n):.5f}")
