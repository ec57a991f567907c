"""The row heuristic: promote a_3 above a_2 by rewriting row 3 only.

Each step copies an entry of row q scaled by alpha into row p, smallest
entries first, and recomputes the ranking until a_3 outranks a_2.
"""

import numpy as np

from pcman import Algorithm, ManipulationRequest, find_m, row_compute_changes, validate
from pcman.core import TEXT_RECIPROCITY_TOL, consistency_index

C = validate(
    [
        [1, 0.3203, 6.4158, 1.5449],
        [3.1224, 1, 3.2254, 1.7171],
        [0.1559, 0.3100, 1, 0.1390],
        [0.6473, 0.5824, 7.1927, 1],
    ],
    tol=TEXT_RECIPROCITY_TOL,
)
p, q = 2, 1  # 0-based: a_3 and a_2

m, res, trace = row_compute_changes(C, 1.2, p, q)
for k, step in enumerate(trace, start=1):
    i, j = step.modified_pair
    print(f"step {k}: c[{i + 1},{j + 1}] <- {step.new_values[0]:.4f}   "
          f"w = {np.round(step.weights_after.weights, 4)}   CI = {step.ci_after:.4f}   "
          f"r(a_3) = {step.ranks_after[0]}, r(a_2) = {step.ranks_after[1]}")
print("modified entries:", m, "(bribe cost", m // 2, "comparisons)")
print(np.round(res.entries, 4))

# the driver sweeps alpha from 9 down to 1.1 and keeps the cheapest result
best = find_m(C, ManipulationRequest(p, q, Algorithm.ROW))
print(f"sweep: alpha = {best.alpha_used}, m_res = {best.m_res}, "
      f"CI = {best.final_ci:.4f}, success = {best.success}")
print("input CI was", round(consistency_index(C), 4))
