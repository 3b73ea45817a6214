"""
Anatomy of a single realization
===============================

Samples one Palm-conditioned street layout with its Cox points, runs the
shortest-path search from the origin and compares the result with the L1
distance to the nearest point. At a typical point the two can differ,
because no street runs north-south through the origin.
"""

from manhattan_cox import ModelParams, build_network, l1_nearest, shortest_path_to_nearest
from manhattan_cox.pathnet import simulate_realization

params = ModelParams(lambda_l=1.0, lambda_c=0.5)

# Look for a seed where the typical point needs a detour.
for seed in range(200):
    lines, points, res = simulate_realization(params, "typical-point", seed)
    l1 = l1_nearest(lines, points)
    if res.distance > l1 + 1e-9:
        break

print(f"seed {seed}: window half-width {res.half_width:g} km after {res.attempts} attempt(s)")
print(f"  {lines.n_vertical} vertical and {lines.n_horizontal} horizontal streets, {points.n_points} points")
print(f"  path distance {res.distance:.4f} km to {tuple(round(v, 4) for v in res.witness)}")
print(f"  L1 distance to the L1-nearest point {l1:.4f} km")

# The same search on the explicit network.
net = build_network(lines, points)
print(f"  explicit network: {len(net.nodes())} nodes, {len(net.edges())} edges")
assert shortest_path_to_nearest(net).distance == res.distance

# At a typical intersection the L1 distance is always achieved.
lines, points, res = simulate_realization(params, "intersection", seed)
print(f"intersection, same seed: path {res.distance:.4f} km, L1 {l1_nearest(lines, points):.4f} km")
