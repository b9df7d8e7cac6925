"""
Volumes, determinants, and the two log-domain objectives
========================================================

A selection of k vectors in R^d is scored by the determinant of the sum
of outer products when k >= d, and by the squared k-volume it spans when
k < d.  Both live in log space here, so a rank-deficient selection comes
back as -inf instead of crashing or underflowing.
"""

import math

import numpy as np

from detmax import PointSet, mu, mu_cauchy_binet, nu, objective_value

rng = np.random.default_rng(7)

# ------------------------------------------------------------------
# a small ground set: 8 points in R^3
# ------------------------------------------------------------------
coords = rng.standard_normal((8, 3))
points = PointSet(3, [(i, coords[i], None) for i in range(8)])

pick = [0, 2, 5]
print("nu  (squared 3-volume, log):", nu(points, pick))
print("mu  (logdet of sum vv^T):   ", mu(points, pick))
# with k == d the two notions coincide
print("difference:", abs(nu(points, pick) - mu(points, pick)))

# ------------------------------------------------------------------
# k > d: mu equals the sum over all d-subsets of their squared volumes
# ------------------------------------------------------------------
big = [0, 1, 2, 3, 6]
direct = mu(points, big)
summed = mu_cauchy_binet(points, big)
print("\nk = 5 in d = 3")
print("  logdet route:      %.12f" % direct)
print("  d-subset sum route: %.12f" % summed)
assert abs(direct - summed) < 1e-10

# ------------------------------------------------------------------
# degenerate selections are a value, not an error
# ------------------------------------------------------------------
flat = PointSet(3, [(0, [1.0, 0, 0], None), (1, [2.0, 0, 0], None),
                    (2, [0, 1.0, 0], None)])
print("\ncollinear pair spans no area:", nu(flat, [0, 1]))
print("but adding a third direction helps:", nu(flat, [0, 2]))

# objective_value dispatches on |S| vs d, so callers never branch
for sel in ([0, 2], [0, 1, 2]):
    print("objective_value(%s) = %s" % (sel, objective_value(flat, sel)))

# a planted optimum to close on: axis-aligned boxes maximize volume
box = PointSet(3, [(i, 2.0 * np.eye(3)[i], None) for i in range(3)])
print("\n2x2x2 box, log squared volume:", nu(box, [0, 1, 2]),
      "= ln(64) =", math.log(64.0))
