"""Pairwise comparison matrices, priority vectors, rankings and consistency.

Indices are 0-based everywhere in the library; user-facing text (CLI,
serialized documents, error messages) is 1-based.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
import numpy.typing as npt

from .exceptions import (
    DimensionMismatch,
    MinimumSize,
    NoConvergence,
    NonPositiveEntry,
    NonPositiveWeight,
    NotReciprocal,
    NotSquare,
    RandomIndexUnavailable,
)

#: Default tolerance on ``|c_ij * c_ji - 1|``.
RECIPROCITY_TOL = 1e-9

#: Tolerance for matrices typed or printed with a handful of decimals
#: (e.g. ``0.3333`` for 1/3); used by the file readers.
TEXT_RECIPROCITY_TOL = 1e-3

#: Saaty's random consistency index, keyed by matrix size.
RANDOM_INDEX: Mapping[int, float] = {
    3: 0.58,
    4: 0.90,
    5: 1.12,
    6: 1.24,
    7: 1.32,
    8: 1.41,
    9: 1.45,
    10: 1.49,
}

#: Comparison scale used for the optional clamping in the manipulation heuristics.
SCALE_MIN, SCALE_MAX = 1.0 / 9.0, 9.0

POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000


class Method(str, enum.Enum):
    """Priority deriving method."""

    EVM = "evm"
    GMM = "gmm"


@dataclass(frozen=True, eq=False)
class PCMatrix:
    """Reciprocal matrix of positive pairwise comparisons.

    Build instances through :func:`validate`; the constructor does not check
    anything. ``entries`` is stored read-only.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries.copy()
        return self.entries.astype(dtype)

    def __getitem__(self, key):
        return self.entries[key]

    def __repr__(self):
        return f"PCMatrix(n={self.n},\n{np.array2string(self.entries, precision=4)})"

    def to_array(self) -> np.ndarray:
        """Writable copy of the entries."""
        return self.entries.copy()

    def with_pair(self, i: int, j: int, value: float) -> "PCMatrix":
        """Return a copy with ``c_ij = value`` and ``c_ji = 1 / value``."""
        arr = self.entries.copy()
        arr[i, j] = value
        arr[j, i] = 1.0 / value
        return PCMatrix(arr)

    def reciprocity_error(self) -> float:
        """Largest ``|c_ij * c_ji - 1|`` over all pairs."""
        return float(np.max(np.abs(self.entries * self.entries.T - 1.0)))


@dataclass(frozen=True, eq=False)
class PriorityVector:
    """Normalized weights; ``lambda_max`` is set only for EVM."""

    weights: np.ndarray
    method: Method
    lambda_max: Optional[float] = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.weights.astype(dtype) if dtype is not None else self.weights.copy()

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.weights[i]


@dataclass(frozen=True)
class Ranking:
    """``positions[i]`` is the rank of alternative ``i``; 1 is the lowest weight."""

    positions: tuple

    @property
    def n(self) -> int:
        return len(self.positions)

    def __getitem__(self, i):
        return self.positions[i]

    def alternative_at(self, position: int) -> int:
        """Index of the alternative holding rank ``position`` (1-based rank)."""
        return self.positions.index(position)


@dataclass(frozen=True)
class ConsistencyReport:
    ci: float
    cr: float
    ri: float
    lambda_max: float


def validate(raw: npt.ArrayLike, tol: float = RECIPROCITY_TOL) -> PCMatrix:
    """Check ``raw`` and wrap it as a :class:`PCMatrix`.

    Diagonal entries within ``tol`` of one are snapped to exactly one. Entries
    are otherwise stored unchanged, so a matrix accepted with a loose ``tol``
    keeps its (slightly non-reciprocal) values.
    """
    arr = np.array(raw, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {arr.shape}")
    n = arr.shape[0]
    if n < 2:
        raise MinimumSize(f"need at least 2 alternatives, got {n}")
    bad = ~(arr > 0) | ~np.isfinite(arr)
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise NonPositiveEntry(i, j, float(arr[i, j]))
    diag = np.diag(arr)
    close = np.abs(diag - 1.0) <= tol
    arr[np.diag_indices(n)] = np.where(close, 1.0, diag)
    err = np.abs(arr * arr.T - 1.0)
    if (err > tol).any():
        i, j = map(int, np.argwhere(err > tol)[0])
        raise NotReciprocal(i, j, float(arr[i, j] * arr[j, i]))
    return PCMatrix(arr)


def _as_pc(C) -> PCMatrix:
    return C if isinstance(C, PCMatrix) else validate(C)


def power_iteration(a: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER):
    """Dominant eigenpair of a positive matrix, weights summing to one.

    Starts from the uniform vector and stops once two successive iterates
    differ by less than ``tol`` in the max norm. Returns ``(w, lambda_max)``.
    """
    n = a.shape[0]
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        y = a @ x
        lam = y.sum()
        y /= lam
        if abs(y - x).max() < tol:
            # Rayleigh-style estimate on the final iterate
            return y, float((a @ y).sum())
        x = y
    raise NoConvergence(max_iter)


def batched_power_iteration(a: np.ndarray, tol: float = POWER_TOL,
                            max_iter: int = POWER_MAX_ITER):
    """:func:`power_iteration` over a stack ``(k, n, n)``; rows freeze once converged."""
    k, n, _ = a.shape
    x = np.full((k, n), 1.0 / n)
    done = np.zeros(k, dtype=bool)
    for _ in range(max_iter):
        y = np.matmul(a, x[:, :, None])[:, :, 0]
        y /= y.sum(axis=1, keepdims=True)
        conv = abs(y - x).max(axis=1) < tol
        live = ~done
        x[live] = y[live]
        done |= conv
        if done.all():
            lam = np.matmul(a, x[:, :, None])[:, :, 0].sum(axis=1)
            return x, lam
    raise NoConvergence(max_iter)


def derive_evm(C, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> PriorityVector:
    """Eigenvalue-method priorities (normalized principal eigenvector)."""
    C = _as_pc(C)
    w, lam = power_iteration(C.entries, tol, max_iter)
    return PriorityVector(w, Method.EVM, lam)


def gmm_weights(a: np.ndarray) -> np.ndarray:
    """Row geometric means, normalized; works on ``(n, n)`` or ``(k, n, n)``."""
    logs = np.log(a).mean(axis=-1)
    g = np.exp(logs - logs.max(axis=-1, keepdims=True))
    return g / g.sum(axis=-1, keepdims=True)


def derive_gmm(C) -> PriorityVector:
    """Geometric-mean priorities, computed in the log domain."""
    C = _as_pc(C)
    return PriorityVector(gmm_weights(C.entries), Method.GMM)


def derive(C, method: Method | str = Method.EVM) -> PriorityVector:
    method = Method(method)
    return derive_evm(C) if method is Method.EVM else derive_gmm(C)


def positions_of(weights: np.ndarray) -> np.ndarray:
    """Ascending-weight rank positions (1-based), ties by lower index first."""
    order = np.argsort(weights, kind="stable")
    pos = np.empty(len(order), dtype=int)
    pos[order] = np.arange(1, len(order) + 1)
    return pos


def rank_of(w) -> Ranking:
    weights = w.weights if isinstance(w, PriorityVector) else np.asarray(w, dtype=float)
    return Ranking(tuple(int(x) for x in positions_of(weights)))


def random_index(n: int, table: Optional[Mapping[int, float]] = None) -> float:
    table = RANDOM_INDEX if table is None else table
    try:
        ri = table[n]
    except KeyError:
        raise RandomIndexUnavailable(n) from None
    if ri <= 0:
        raise RandomIndexUnavailable(n)
    return float(ri)


def ci_from_lambda(lambda_max: float, n: int) -> float:
    return (lambda_max - n) / (n - 1)


def consistency_index(C) -> float:
    """Saaty's CI, ``(lambda_max - n) / (n - 1)``, with EVM's eigenvalue."""
    C = _as_pc(C)
    _, lam = power_iteration(C.entries)
    return ci_from_lambda(lam, C.n)


def consistency(C, ri_table: Optional[Mapping[int, float]] = None) -> ConsistencyReport:
    """CI and CR of ``C``.

    Raises :class:`RandomIndexUnavailable` when ``C.n`` is not in the table;
    use :func:`consistency_index` when only CI is needed.
    """
    C = _as_pc(C)
    _, lam = power_iteration(C.entries)
    ci = ci_from_lambda(lam, C.n)
    ri = random_index(C.n, ri_table)
    return ConsistencyReport(ci=ci, cr=ci / ri, ri=ri, lambda_max=lam)


def consistent_from_weights(w: npt.ArrayLike) -> PCMatrix:
    """The consistent matrix ``c_ij = w_i / w_j``."""
    w = np.asarray(w.weights if isinstance(w, PriorityVector) else w, dtype=float)
    for i, value in enumerate(w):
        if not value > 0:
            raise NonPositiveWeight(i, float(value))
    return PCMatrix(w[:, None] / w[None, :])


def hadamard_distance(A, B) -> np.ndarray:
    """Elementwise ``h_ij = a_ij * b_ji``; all ones when ``A == B``."""
    a = A.entries if isinstance(A, PCMatrix) else np.asarray(A, dtype=float)
    b = B.entries if isinstance(B, PCMatrix) else np.asarray(B, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return a * b.T
