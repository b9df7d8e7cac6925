"""
Local search: greedy seed, then single swaps until nothing improves
===================================================================

The workhorse subroutine.  Start from a greedy pick (largest residual
norm each round), then repeatedly exchange one selected point for one
outsider whenever that multiplies the squared volume by more than zeta.
The returned set is a zeta-approximate local optimum, which is exactly
the property the coreset constructions lean on.
"""

import numpy as np

from detmax import PointSet, brute_force_opt, CardinalityConstraint, greedy_init, local_opt, nu, verify_local_opt

rng = np.random.default_rng(28)

n, d = 40, 4
coords = rng.standard_normal((n, d))
# stretch a few directions so the interesting optima are not obvious
coords[:10] *= 3.0
points = PointSet(d, [(i, coords[i], None) for i in range(n)])
V = list(range(n))

seed = greedy_init(points, V, d)
print("greedy seed:        ", seed, " nu =", round(nu(points, seed), 4))

res = local_opt(points, V, d, zeta=1.01)
print("after local search: ", res.ids, " nu =", round(res.value, 4))
print("swaps applied:", res.swap_count)

# the certificate: no single exchange gains more than a factor 1.01
assert verify_local_opt(points, V, res.ids, 1.01) is None
print("verified: no swap improves by more than zeta")

# brute force on this size is still affordable -- compare
opt = brute_force_opt(points, CardinalityConstraint(d, V))
print("\nbrute-force optimum:", opt.ids, " value =", round(opt.log_value, 4))
print("local-opt gap (log):", round(opt.log_value - res.value, 4))

# the gap is bounded by the local-search guarantee; usually it is tiny.
# Rerunning with the same inputs gives the identical trajectory:
again = local_opt(points, V, d, zeta=1.01)
assert again.ids == res.ids and again.swap_count == res.swap_count
print("deterministic rerun: same set, same swap count")
