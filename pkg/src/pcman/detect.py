"""Detection of row-heuristic manipulation.

The row heuristic rewrites ``c_pj`` as ``alpha * c_qj``, which leaves a
fingerprint: the cross-row ratios ``c_pk / c_qk`` coincide (and exceed one)
for every rewritten column. Scanning all ordered row pairs for repeated
ratios finds it.

Nearly consistent matrices satisfy ``c_ik / c_jk = w_i / w_j`` for all ``k``
and would light up every row pair, so detection is skipped below a CI gate.
CI grows with the square of the log-scale perturbation, so the default gate
is ``tol ** 2``: below it no ratio can differ from another by more than
about ``tol`` and the scan could not tell rows apart anyway.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import PCMatrix, consistency_index, validate

DEFAULT_TOL = 1e-6
#: ``ci_gate`` value meaning "use ``tol ** 2``"
AUTO = "auto"


@dataclass(frozen=True)
class Suspect:
    promoted_row: int
    reference_row: int
    witness_columns: tuple
    common_ratio: float


@dataclass(frozen=True)
class DetectionReport:
    suspects: tuple
    tolerance: float
    ci: float
    gated: bool = False
    ci_gate: Optional[float] = None

    @property
    def flagged(self) -> bool:
        return bool(self.suspects)

    def pairs(self) -> set:
        return {(s.promoted_row, s.reference_row) for s in self.suspects}


def _equal_groups(ratios, cols, tol):
    """Maximal runs of ratios (sorted) lying within ``tol`` (relative) of the run's first."""
    order = np.argsort(ratios, kind="stable")
    groups = []
    start = 0
    while start < len(order):
        base = ratios[order[start]]
        end = start + 1
        while end < len(order) and ratios[order[end]] - base <= tol * abs(base):
            end += 1
        if end - start >= 2:
            members = order[start:end]
            groups.append((tuple(sorted(int(cols[m]) for m in members)),
                           float(np.mean(ratios[members]))))
        start = end
    return groups


def detect_row_manipulation(C, tol: float = DEFAULT_TOL,
                            ci_gate: Union[float, str, None] = AUTO) -> DetectionReport:
    """Flag ordered row pairs ``(i, j)`` whose ratios ``c_ik / c_jk`` repeat above one.

    Columns ``i`` and ``j`` are excluded, so a flag needs at least two
    rewritten entries besides the direct comparison. Equality is relative
    within ``tol``. Suspects are ordered lexicographically by ``(i, j)``.
    The default gate is ``tol ** 2``; set ``ci_gate=None`` to scan regardless
    of consistency.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if ci_gate == AUTO:
        ci_gate = tol ** 2
    C = C if isinstance(C, PCMatrix) else validate(C)
    ci = consistency_index(C)
    if ci_gate is not None and ci <= ci_gate:
        return DetectionReport((), tol, ci, gated=True, ci_gate=ci_gate)
    a = C.entries
    n = C.n
    suspects = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            cols = np.array([k for k in range(n) if k != i and k != j], dtype=int)
            ratios = a[i, cols] / a[j, cols]
            above = ratios > 1.0
            for witnesses, ratio in _equal_groups(ratios[above], cols[above], tol):
                suspects.append(Suspect(i, j, witnesses, ratio))
    return DetectionReport(tuple(suspects), tol, ci, gated=False, ci_gate=ci_gate)
