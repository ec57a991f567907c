"""Micro-bribery manipulation heuristics.

Both heuristics try to lift alternative ``p`` above alternative ``q`` in the
ranking while touching as few comparisons as possible:

* the *row* heuristic sets ``c_pq = alpha`` and then rewrites the remaining
  entries of row ``p`` (smallest first) as ``alpha * c_qj``;
* the *matrix* heuristic builds a consistent target matrix from the priority
  vector with ``w_p = alpha * w_q`` and copies its entries over, most distant
  (by Hadamard distance) first.

Either one stops as soon as the swap is observed. :func:`find_m` sweeps
``alpha`` and keeps the cheapest candidate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .core import (
    Method,
    PCMatrix,
    PriorityVector,
    SCALE_MAX,
    batched_power_iteration,
    ci_from_lambda,
    gmm_weights,
    power_iteration,
    positions_of,
)
from .exceptions import AlphaOutOfRange, InvalidIndices, NoSwapAchieved


SELECTIONS = ("feasible", "listing")


class Algorithm(str, enum.Enum):
    ROW = "row"
    MATRIX = "matrix"


@dataclass(frozen=True)
class StepRecord:
    modified_pair: tuple
    new_values: tuple
    weights_after: PriorityVector
    ci_after: float
    ranks_after: tuple


class Changes(NamedTuple):
    """Outcome of one ComputeChanges call for a fixed alpha."""

    m_res: int
    matrix: PCMatrix
    trace: tuple


@dataclass(frozen=True)
class SweepPoint:
    alpha: float
    m_res: int
    ci: float
    swapped: bool


@dataclass(frozen=True)
class ManipulationRequest:
    p: int
    q: int
    algorithm: Algorithm = Algorithm.ROW
    method: Method = Method.EVM
    alpha_start: float = 9.0
    alpha_step: float = 0.1
    ci_threshold: float = 0.1
    scale_bound: float = SCALE_MAX
    clamp: bool = False
    strict_alpha: bool = False
    selection: str = "feasible"

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        object.__setattr__(self, "method", Method(self.method))
        if self.p == self.q:
            raise InvalidIndices(f"p and q must differ (both are {self.p + 1})")
        if not self.alpha_start > 1:
            raise AlphaOutOfRange(f"alpha_start must exceed 1, got {self.alpha_start}")
        if not self.alpha_step > 0:
            raise ValueError(f"alpha_step must be positive, got {self.alpha_step}")
        if not self.ci_threshold > 0:
            raise ValueError(f"ci_threshold must be positive, got {self.ci_threshold}")
        if self.selection not in SELECTIONS:
            raise ValueError(f"selection must be one of {SELECTIONS}, got {self.selection!r}")
        if not self.scale_bound > 1:
            raise ValueError(f"scale_bound must exceed 1, got {self.scale_bound}")

    def alphas(self) -> list:
        return alpha_sweep(self.alpha_start, self.alpha_step)


@dataclass(frozen=True, eq=False)
class ManipulationResult:
    matrix: PCMatrix
    m_res: int
    success: bool
    swap_achieved: bool
    final_ci: float
    alpha_used: Optional[float]
    weights: PriorityVector
    p: int
    q: int
    algorithm: Algorithm
    method: Method
    ci_threshold: float
    trace: tuple = ()
    sweep: tuple = ()
    out_of_scale: tuple = field(default=())
    original: Optional[PCMatrix] = None

    @property
    def cost(self) -> int:
        """Bribe cost: one unit per modified comparison (reciprocal pair)."""
        return self.m_res // 2

    def intermediate_matrices(self) -> list:
        """Matrices after each traced step, rebuilt from ``original``."""
        if self.original is None:
            raise ValueError("result carries no original matrix")
        return replay(self.original, self.trace)


def replay(C: PCMatrix, trace) -> list:
    """Apply the recorded pair updates of ``trace`` to ``C`` one by one."""
    a = C.to_array()
    out = []
    for step in trace:
        i, j = step.modified_pair
        a[i, j], a[j, i] = step.new_values
        out.append(PCMatrix(a))
    return out


def alpha_sweep(start: float, step: float) -> list:
    """``start, start - step, ...`` while strictly above one."""
    out = []
    k = 0
    while True:
        # rounding keeps 9 - 80 * 0.1 from landing a hair above 1
        a = round(start - k * step, 12)
        if not a > 1:
            return out
        out.append(a)
        k += 1


def _check_indices(n, p, q):
    if not (0 <= p < n and 0 <= q < n):
        raise InvalidIndices(f"indices must lie in 1..{n}, got p={p + 1}, q={q + 1}")
    if p == q:
        raise InvalidIndices(f"p and q must differ (both are {p + 1})")


def _check_alpha(alpha):
    if not alpha > 1:
        raise AlphaOutOfRange(f"alpha must exceed 1, got {alpha}")


def _solve(a, method):
    """Weights and EVM eigenvalue (``None`` for GMM)."""
    if method is Method.EVM:
        return power_iteration(a)
    return gmm_weights(a), None


def _swapped(w, p, q):
    # r(a_p) > r(a_q) under ascending order with index tie-break
    return w[p] > w[q] or (w[p] == w[q] and p > q)


def _set_pair(a, i, j, value, bound, clamp):
    if clamp:
        value = min(max(value, 1.0 / bound), bound)
    a[i, j] = value
    a[j, i] = 1.0 / value


def _record(a, i, j, w, lam, method, p, q):
    if lam is None:
        _, lam = power_iteration(a)
    pos = positions_of(w)
    return StepRecord(
        modified_pair=(i, j),
        new_values=(float(a[i, j]), float(a[j, i])),
        weights_after=PriorityVector(w, method, lam if method is Method.EVM else None),
        ci_after=ci_from_lambda(lam, a.shape[0]),
        ranks_after=(int(pos[p]), int(pos[q])),
    )


class _Run(NamedTuple):
    pairs: list
    a: np.ndarray
    w: np.ndarray
    lam: Optional[float]
    trace: tuple


def _row_run(c, alpha, p, q, method, bound=SCALE_MAX, clamp=False, trace=False) -> _Run:
    a = c.copy()
    n = a.shape[0]
    steps = []
    _set_pair(a, p, q, alpha, bound, clamp)
    pairs = [(p, q)]
    w, lam = _solve(a, method)
    if trace:
        steps.append(_record(a, p, q, w, lam, method, p, q))
    cols = [j for j in range(n) if j != p and j != q]
    # stable sort: equal values keep ascending column order
    cols = [cols[k] for k in np.argsort(a[p, cols], kind="stable")]
    for j in cols:
        if _swapped(w, p, q):
            break
        _set_pair(a, p, j, alpha * a[q, j], bound, clamp)
        pairs.append((p, j))
        w, lam = _solve(a, method)
        if trace:
            steps.append(_record(a, p, j, w, lam, method, p, q))
    return _Run(pairs, a, w, lam, tuple(steps))


def respos(c, con) -> list:
    """Positions ``(i, j)`` with Hadamard distance above one, most distant first.

    Ties are broken by ``(i, j)`` lexicographically. Only the first position of
    each reciprocal pair is kept.
    """
    h = c * con.T
    ii, jj = np.nonzero(h > 1.0)
    order = np.lexsort((jj, ii, -h[ii, jj]))
    seen = set()
    out = []
    for k in order:
        i, j = int(ii[k]), int(jj[k])
        key = (min(i, j), max(i, j))
        if key not in seen:
            seen.add(key)
            out.append((i, j))
    return out


def target_weights(w, alpha, p, q) -> np.ndarray:
    """Priority vector with ``w_p`` replaced by ``alpha * w_q``."""
    wp = np.array(w, dtype=float)
    wp[p] = alpha * wp[q]
    return wp


def _matrix_run(c, alpha, p, q, method, bound=SCALE_MAX, clamp=False, trace=False) -> _Run:
    a = c.copy()
    w, lam = _solve(a, method)
    wp = target_weights(w, alpha, p, q)
    con = wp[:, None] / wp[None, :]
    steps = []
    pairs = []
    for i, j in respos(a, con):
        if _swapped(w, p, q):
            break
        _set_pair(a, i, j, con[i, j], bound, clamp)
        pairs.append((i, j))
        w, lam = _solve(a, method)
        if trace:
            steps.append(_record(a, i, j, w, lam, method, p, q))
    return _Run(pairs, a, w, lam, tuple(steps))


_RUNNERS = {Algorithm.ROW: _row_run, Algorithm.MATRIX: _matrix_run}


def _compute(C, alpha, p, q, method, algorithm, bound, clamp):
    C = C if isinstance(C, PCMatrix) else PCMatrix(np.asarray(C, dtype=float))
    _check_indices(C.n, p, q)
    _check_alpha(alpha)
    run = _RUNNERS[algorithm](C.entries, alpha, p, q, Method(method), bound, clamp, True)
    return Changes(2 * len(run.pairs), PCMatrix(run.a), run.trace)


def row_compute_changes(C, alpha, p, q, method=Method.EVM, *, bound=SCALE_MAX, clamp=False):
    """Row heuristic for a single ``alpha``; returns ``(m_res, C_res, trace)``."""
    return _compute(C, alpha, p, q, method, Algorithm.ROW, bound, clamp)


def matrix_compute_changes(C, alpha, p, q, method=Method.EVM, *, bound=SCALE_MAX, clamp=False):
    """Matrix heuristic for a single ``alpha``; returns ``(m_res, C_res, trace)``."""
    return _compute(C, alpha, p, q, method, Algorithm.MATRIX, bound, clamp)


def compute_changes(C, alpha, p, q, method=Method.EVM, algorithm=Algorithm.ROW, **kw):
    return _compute(C, alpha, p, q, method, Algorithm(algorithm), kw.get("bound", SCALE_MAX),
                    kw.get("clamp", False))


def _out_of_scale(a, pairs, bound):
    lo, hi = 1.0 / bound, bound
    return tuple((i, j) for i, j in pairs if not lo <= a[i, j] <= hi)


def _batch_solve(a, method):
    if method is Method.EVM:
        return batched_power_iteration(a)
    return gmm_weights(a), None


def _batch_swapped(w, p, q):
    return (w[:, p] > w[:, q]) | ((w[:, p] == w[:, q]) & (p > q))


def _batch_set(a, ks, i, j, values, bound, clamp):
    if clamp:
        values = np.clip(values, 1.0 / bound, bound)
    a[ks, i, j] = values
    a[ks, j, i] = 1.0 / values


def sweep_candidates(c, alphas, p, q, method=Method.EVM, algorithm=Algorithm.ROW,
                     bound=SCALE_MAX, clamp=False):
    """Run one heuristic for every alpha at once.

    Each alpha follows exactly the step sequence of the single-alpha
    heuristic; candidates simply advance in lockstep until they stop.
    Returns ``(m_res, ci, swapped)`` arrays aligned with ``alphas``.
    """
    c = np.asarray(c, dtype=float)
    method, algorithm = Method(method), Algorithm(algorithm)
    alphas = np.asarray(alphas, dtype=float)
    k, n = len(alphas), c.shape[0]
    a = np.repeat(c[None], k, axis=0)
    ks = np.arange(k)
    if algorithm is Algorithm.ROW:
        _batch_set(a, ks, p, q, alphas, bound, clamp)
        pairs = np.ones(k, dtype=int)
        cols = [j for j in range(n) if j != p and j != q]
        cols = [cols[t] for t in np.argsort(c[p, cols], kind="stable")]
        steps = [[(p, j)] * k for j in cols]
        w, lam = _batch_solve(a, method)
    else:
        w1, _ = _solve(c, method)
        w = np.repeat(w1[None], k, axis=0)
        wp = w.copy()
        wp[:, p] = alphas * w1[q]
        con = wp[:, :, None] / wp[:, None, :]
        lists = [respos(c, con[t]) for t in range(k)]
        depth = max((len(x) for x in lists), default=0)
        steps = [[x[s] if s < len(x) else None for x in lists] for s in range(depth)]
        pairs = np.zeros(k, dtype=int)
        lam = None
    lam = None if lam is None else np.asarray(lam, dtype=float)
    active = np.ones(k, dtype=bool)
    for step in steps:
        active &= ~_batch_swapped(w, p, q)
        active &= np.array([pos is not None for pos in step])
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        ii = np.array([step[t][0] for t in idx])
        jj = np.array([step[t][1] for t in idx])
        if algorithm is Algorithm.ROW:
            values = alphas[idx] * a[idx, q, jj]
        else:
            values = con[idx, ii, jj]
        _batch_set(a, idx, ii, jj, values, bound, clamp)
        pairs[idx] += 1
        w_new, lam_new = _batch_solve(a[idx], method)
        w[idx] = w_new
        if lam is not None:
            lam[idx] = lam_new
    if lam is None:
        _, lam = batched_power_iteration(a)
    ci = (lam - n) / (n - 1)
    return 2 * pairs, ci, _batch_swapped(w, p, q)


def _better(cand, best, selection, threshold):
    """Selection rule of the alpha sweep; ``cand``/``best`` are ``(m, ci, swapped)``."""
    m, ci, _ = cand
    bm, bci, _ = best
    if selection == "feasible":
        gap, bgap = _violation(cand, threshold), _violation(best, threshold)
        if gap != bgap:
            return gap < bgap
    return m < bm or (m == bm and ci < bci)


def _violation(cand, threshold):
    """How far a candidate is from a swap within the CI threshold (0 when feasible)."""
    _, ci, swapped = cand
    if not swapped:
        return np.inf
    return max(ci - threshold, 0.0)


def find_m(C: PCMatrix, request: ManipulationRequest, *, trace: bool = True,
           raise_on_no_swap: bool = False) -> ManipulationResult:
    """Sweep alpha downward and keep the cheapest candidate.

    With ``selection="listing"`` the candidate with fewest modified entries
    wins and equal counts go to the lower CI. The default ``"feasible"`` rule
    first prefers candidates that swap the pair within ``ci_threshold`` and
    then applies the same ordering. Remaining ties keep the larger alpha.

    ``success`` requires the swap and ``CI <= ci_threshold``. If the input
    already ranks ``p`` above ``q`` nothing is modified.
    """
    C = C if isinstance(C, PCMatrix) else PCMatrix(np.asarray(C, dtype=float))
    n, p, q = C.n, request.p, request.q
    _check_indices(n, p, q)
    method, algorithm = request.method, request.algorithm
    c = C.entries
    base = dict(p=p, q=q, algorithm=algorithm, method=method,
                ci_threshold=request.ci_threshold, original=C)

    w0, lam0 = _solve(c, method)
    if _swapped(w0, p, q):
        ci0 = ci_from_lambda(lam0 if lam0 is not None else power_iteration(c)[1], n)
        return ManipulationResult(
            matrix=C, m_res=0, success=bool(ci0 <= request.ci_threshold), swap_achieved=True,
            final_ci=ci0, alpha_used=None, weights=PriorityVector(w0, method, lam0), **base,
        )

    alphas = request.alphas()
    if request.strict_alpha:
        alphas = [a for a in alphas if a > c[p, q]]
    if not alphas:
        raise AlphaOutOfRange("the alpha sweep is empty")
    ms, cis, swaps = sweep_candidates(c, alphas, p, q, method, algorithm,
                                      request.scale_bound, request.clamp)
    sweep = tuple(SweepPoint(float(a), int(m), float(ci), bool(s))
                  for a, m, ci, s in zip(alphas, ms, cis, swaps))

    # sentinel from the listing: 2n (row) or n^2 (matrix), never reached
    best = (2 * n if algorithm is Algorithm.ROW else n * n, np.inf, False)
    best_alpha = None
    for pt in sweep:
        cand = (pt.m_res, pt.ci, pt.swapped)
        if _better(cand, best, request.selection, request.ci_threshold):
            best, best_alpha = cand, pt.alpha

    runner = _RUNNERS[algorithm]
    run = runner(c, best_alpha, p, q, method, request.scale_bound, request.clamp, trace)
    lam = run.lam if run.lam is not None else power_iteration(run.a)[1]
    ci = ci_from_lambda(lam, n)
    swapped = bool(_swapped(run.w, p, q))
    result = ManipulationResult(
        matrix=PCMatrix(run.a), m_res=2 * len(run.pairs),
        success=swapped and bool(ci <= request.ci_threshold), swap_achieved=swapped,
        final_ci=ci, alpha_used=best_alpha,
        weights=PriorityVector(run.w, method, run.lam), trace=run.trace, sweep=sweep,
        out_of_scale=_out_of_scale(run.a, run.pairs, request.scale_bound), **base,
    )
    if raise_on_no_swap and not swapped:
        raise NoSwapAchieved(result)
    return result
