"""Exact relaxation thresholds under pure label shift.

When source and target share class conditionals and only the class
proportions differ (p vs q), the relaxed transport cost hits zero at
exactly computable relaxation levels:

  per-class:  beta_k >= (q_k - p_k)_+       (componentwise, sums to <= 1)
  global:     beta   >= max_k (q_k / p_k - 1)_+   (can be arbitrarily large)

The shared-atom construction realizes the shared-conditional premise
exactly, so the thresholds are sharp to solver precision.
"""

import numpy as np

from imdot import shared_atom_label_shift
from imdot.measures import cost_matrix
from imdot.ot import partial_ot_beta_split, partial_ot_global, partial_ot_per_class

p = np.array([0.8, 0.2])
q = np.array([0.5, 0.5])
source, conditionals, target = shared_atom_label_shift(
    [[[0.0, 0.0]], [[1.0, 0.0]]], p, q)
costs = [cost_matrix(target.points, c.points) for c in conditionals]
cost_full = cost_matrix(target.points, source.points)

print("p =", p, " q =", q)
print("per-class threshold vector:", np.maximum(q - p, 0.0))
print("global threshold:          ", np.max(np.maximum(q / p - 1.0, 0.0)))

for beta2 in (0.35, 0.30, 0.29, 0.20):
    value = partial_ot_per_class(target, conditionals, p, [0.0, beta2], costs).objective
    print(f"  per-class cost at beta_2 = {beta2:<5}: {value:.6f}")

for beta in (2.0, 1.5, 1.49, 1.0):
    value, _ = partial_ot_global(target, source, cost_full, beta)
    print(f"  global cost at beta = {beta:<5}:      {value:.6f}")

# The budget-split solver finds the good allocation on its own.
split = partial_ot_beta_split(target, conditionals, p, 0.3, costs)
print("splitting a 0.3 budget:", split.beta, "-> cost", split.objective)
