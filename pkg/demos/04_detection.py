"""Spotting the row heuristic after the fact.

Rewriting c_pj as alpha * c_qj leaves the ratios c_pj / c_qj equal to alpha
across several columns, which honest judgements almost never produce.
"""

import numpy as np

from pcman import detect_row_manipulation, row_compute_changes
from pcman.core import consistent_from_weights
from pcman.montecarlo import GenerationConfig, generate_disturbed, rng_for

honest = generate_disturbed(GenerationConfig(n=6, d=1.5), rng_for(7))
print("honest matrix flagged:", detect_row_manipulation(honest).flagged)

# weakest alternative promoted over the strongest
m, forged, _ = row_compute_changes(honest, 1.3, 0, 5)
print("pairs rewritten by the row heuristic:", m // 2)

report = detect_row_manipulation(forged)
for s in report.suspects:
    print(f"row {s.promoted_row + 1} looks promoted over row {s.reference_row + 1}: "
          f"ratio {s.common_ratio:.4f} repeated in columns "
          f"{[k + 1 for k in s.witness_columns]}")

# consistent matrices repeat every ratio, so they are skipped rather than flagged


rep = detect_row_manipulation(consistent_from_weights([0.1, 0.2, 0.3, 0.4]))
print("consistent matrix gated:", rep.gated, "CI =", f"{rep.ci:.1e}")
