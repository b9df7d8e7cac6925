"""
Why the summaries cannot be smaller, and a hard distributed input
=================================================================

Two constructions probe the limits.  First, a 4-point set V in the
plane (two groups, one pick each) where every 3-point subset of V gets
crushed by some adversarial completion -- so any always-good summary
must keep all s*k = 4 points.  Second, a larger rotated instance whose
planted optimum is invisible to any solver that drops the planted
duplicates: near-orthogonal directions hide the mass until the right
copies line up.
"""

import math
from itertools import combinations, permutations

from detmax import (
    brute_force_opt,
    hard_instance,
    lb_low_dim_instance,
    merge_pointsets,
    objective_value,
)

M = 100.0

# ------------------------------------------------------------------
# every 3-subset of V fails against some adversary
# ------------------------------------------------------------------
v, _, _ = lb_low_dim_instance(2, (1, 1), 2, M)
adversaries = [
    lb_low_dim_instance(2, (1, 1), 2, M, probe, perm)
    for probe in range(2)
    for perm in permutations(range(2))
]
print("V holds both basis vectors in each of 2 groups (4 points).")
for U in combinations(sorted(v.ids), 3):
    worst = math.inf
    for _, vp, cons in adversaries:
        opt_u = brute_force_opt(merge_pointsets(v.restrict(U), vp), cons).log_value
        opt_v = brute_force_opt(merge_pointsets(v, vp), cons).log_value
        worst = min(worst, opt_u - opt_v)
    print("  keep %s: worst log ratio %8.3f  (=-2 ln M = %.3f)"
          % (U, worst, -2 * math.log(M)))

# ------------------------------------------------------------------
# the planted optimum of the hard input
# ------------------------------------------------------------------
inst = hard_instance(d=4, beta=0.0117, k=8, seed=3, M=1000.0, g_cap=5)
print("\nhard input: %d points in R^%d across %d machines, tau = %.3f"
      % (len(inst.combined), inst.params["d"], len(inst.sets), inst.tau))

planted = objective_value(inst.combined, inst.planted_set)
rest = sorted(set(inst.combined.ids) - set(inst.planted_ids))
without = brute_force_opt(inst.combined.restrict(rest), inst.constraint).log_value
print("planted selection value: %.4f (formula says %.4f)"
      % (planted, inst.planted_log_value))
print("best value once the planted copies are gone: %.4f" % without)
print("advantage factor: %.1fx" % math.exp(planted - without))
