"""Random PC matrices and the success-rate / bribe-count experiments.

Matrices are generated by drawing a random weight vector, building the
consistent matrix from it and multiplying each upper-triangle entry by a
random disturbance from ``[1/d, d]`` (the lower triangle is mirrored).
Weights and disturbances are log-uniform.

Experiments bucket matrices by input CI into ``[k*width, (k+1)*width)``,
manipulate each one and report the success rate and the mean number of
modified entries per bucket. Every random draw comes from a stream derived
from ``(seed, bucket, trial)``, so results do not depend on execution order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Method,
    PCMatrix,
    Ranking,
    ci_from_lambda,
    power_iteration,
    random_index,
    rank_of,
    derive,
)
from .exceptions import GenerationBudgetExceeded, RangeError
from .manip import SELECTIONS, Algorithm, ManipulationRequest, find_m

log = logging.getLogger(__name__)

# spawn-key tag for the per-bucket disturbance calibration stream
_CALIBRATION = 2**31 - 1


@dataclass(frozen=True)
class GenerationConfig:
    n: int
    d: float = 1.5
    weight_range: tuple = (1 / 15, 15.0)
    acceptance: Optional[float] = 0.1
    seed: int = 0
    max_attempts: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "weight_range", tuple(float(x) for x in self.weight_range))
        if self.n < 2:
            raise RangeError("n", f"must be at least 2, got {self.n}")
        if not self.d >= 1:
            raise RangeError("d", f"must be >= 1, got {self.d}")
        lo, hi = self.weight_range
        if not 0 < lo <= hi:
            raise RangeError("weight_range", f"must be positive and ordered, got {self.weight_range}")
        if self.acceptance is not None and not self.acceptance > 0:
            raise RangeError("acceptance", f"must be positive, got {self.acceptance}")
        if self.max_attempts < 1:
            raise RangeError("max_attempts", "must be at least 1")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    algorithms: tuple = (Algorithm.ROW, Algorithm.MATRIX)
    methods: tuple = (Method.EVM,)
    bucket_width: float = 0.005
    bucket_count: int = 20
    trials_per_bucket: int = 200
    delta_pq: int = 1
    ci_threshold: float = 0.1
    alpha_start: float = 9.0
    alpha_step: float = 0.1
    selection: str = "feasible"
    cr_gate: bool = False
    max_attempts_per_bucket: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "algorithms", tuple(Algorithm(a) for a in self.algorithms))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        checks = [
            ("n", self.n >= 3, "must be at least 3"),
            ("algorithms", bool(self.algorithms), "must be non-empty"),
            ("methods", bool(self.methods), "must be non-empty"),
            ("bucket_width", self.bucket_width > 0, "must be positive"),
            ("bucket_count", self.bucket_count >= 0, "must be non-negative"),
            ("trials_per_bucket", self.trials_per_bucket >= 0, "must be non-negative"),
            ("delta_pq", 1 <= self.delta_pq <= self.n - 1, f"must lie in 1..{self.n - 1}"),
            ("ci_threshold", self.ci_threshold > 0, "must be positive"),
            ("alpha_start", self.alpha_start > 1, "must exceed 1"),
            ("alpha_step", self.alpha_step > 0, "must be positive"),
            ("selection", self.selection in SELECTIONS, f"must be one of {SELECTIONS}"),
            ("max_attempts_per_bucket", self.max_attempts_per_bucket >= 1, "must be at least 1"),
        ]
        for name, ok, detail in checks:
            if not ok:
                raise RangeError(name, f"{detail}, got {getattr(self, name)!r}")

    def bucket_bounds(self, k: int) -> tuple:
        return round(k * self.bucket_width, 12), round((k + 1) * self.bucket_width, 12)


@dataclass(frozen=True)
class BucketStats:
    n: int
    algorithm: Algorithm
    method: Method
    delta_pq: int
    ci_low: float
    ci_high: float
    trials: int
    successes: int
    mean_m_res: float
    note: str = ""

    @property
    def sr(self) -> float:
        return self.successes / self.trials if self.trials else math.nan


@dataclass
class Corpus:
    """Matrices per bucket index, with their input CIs and generation notes."""

    matrices: dict = field(default_factory=dict)
    cis: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)


def rng_for(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def disturbed_array(rng: np.random.Generator, n: int, d: float,
                    weight_range=(1 / 15, 15.0)) -> np.ndarray:
    lo, hi = weight_range
    w = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
    a = w[:, None] / w[None, :]
    iu = np.triu_indices(n, 1)
    s = math.log(d)
    a[iu] *= np.exp(rng.uniform(-s, s, len(iu[0])))
    a.T[iu] = 1.0 / a[iu]
    return a


def _ci(a):
    return ci_from_lambda(power_iteration(a)[1], a.shape[0])


def generate_disturbed(cfg: GenerationConfig, rng: np.random.Generator) -> PCMatrix:
    """One disturbed matrix, redrawn until its CR is below ``cfg.acceptance``."""
    for _ in range(cfg.max_attempts):
        a = disturbed_array(rng, cfg.n, cfg.d, cfg.weight_range)
        if cfg.acceptance is None or cfg.n < 3:
            return PCMatrix(a)
        if _ci(a) / random_index(cfg.n) < cfg.acceptance:
            return PCMatrix(a)
    raise GenerationBudgetExceeded(
        cfg.max_attempts, f"CR < {cfg.acceptance} unreachable for n={cfg.n}, d={cfg.d}")


def _calibrate_d(n, low, high, gen, rng, budget, batch=100, rounds=20):
    """Disturbance factor whose CI distribution lands in ``[low, high)`` often.

    Starts at ``d = 1 + 4 * mid`` and rescales ``log d`` by
    ``sqrt(mid / median CI)`` (CI grows roughly with the square of the log
    disturbance). Returns ``(d, attempts_used)``.
    """
    mid = 0.5 * (low + high)
    d = 1.0 + 4.0 * mid
    used = 0
    best = (-1.0, d)
    for _ in range(rounds):
        if used + batch > budget:
            break
        cis = np.array([_ci(disturbed_array(rng, n, d, gen.weight_range)) for _ in range(batch)])
        used += batch
        hit = float(np.mean((cis >= low) & (cis < high)))
        if hit > best[0]:
            best = (hit, d)
        med = float(np.median(cis))
        if hit > 0.01 and abs(math.log(max(med, 1e-300) / mid)) < 0.25:
            return d, used
        s = math.log(d) * math.sqrt(mid / max(med, 1e-12))
        d = math.exp(min(max(s, 1e-6), 5.0))
    return best[1], used


def fill_buckets(cfg: ExperimentConfig, gen: GenerationConfig) -> Corpus:
    """Rejection-sample ``trials_per_bucket`` matrices for every CI bucket.

    A bucket that exhausts ``max_attempts_per_bucket`` keeps what it has and
    gets a note; the remaining buckets are still filled.
    """
    corpus = Corpus()
    if cfg.trials_per_bucket == 0:
        return corpus
    gate = cfg.cr_gate and gen.acceptance is not None
    for k in range(cfg.bucket_count):
        low, high = cfg.bucket_bounds(k)
        budget = cfg.max_attempts_per_bucket
        d, used = _calibrate_d(cfg.n, low, high, gen, rng_for(cfg.seed, k, _CALIBRATION), budget)
        mats, cis = [], []
        note = ""
        for t in range(cfg.trials_per_bucket):
            rng = rng_for(cfg.seed, k, t)
            while True:
                if used >= budget:
                    note = str(GenerationBudgetExceeded(
                        used, f"bucket [{low}, {high}) holds {len(mats)} matrices"))
                    break
                used += 1
                a = disturbed_array(rng, cfg.n, d, gen.weight_range)
                ci = max(_ci(a), 0.0)
                if not low <= ci < high:
                    continue
                if gate and ci / random_index(cfg.n) >= gen.acceptance:
                    continue
                mats.append(PCMatrix(a))
                cis.append(ci)
                break
            if note:
                log.warning(note)
                break
        corpus.matrices[k], corpus.cis[k] = mats, cis
        if note:
            corpus.notes[k] = note
        log.debug("bucket %d: d=%.4f, %d attempts", k, d, used)
    return corpus


def select_pq(ranking: Ranking, delta_pq: int) -> tuple:
    """Promote the lowest-ranked alternative over the one ``delta_pq`` places above."""
    if not 1 <= delta_pq <= ranking.n - 1:
        raise ValueError(f"delta_pq must lie in 1..{ranking.n - 1}, got {delta_pq}")
    return ranking.alternative_at(1), ranking.alternative_at(1 + delta_pq)


def run_trial(C: PCMatrix, cfg: ExperimentConfig, algorithm, method):
    """Manipulate one matrix; returns the :class:`ManipulationResult` (no trace)."""
    p, q = select_pq(rank_of(derive(C, method)), cfg.delta_pq)
    request = ManipulationRequest(
        p, q, algorithm=algorithm, method=method, alpha_start=cfg.alpha_start,
        alpha_step=cfg.alpha_step, ci_threshold=cfg.ci_threshold, selection=cfg.selection,
    )
    return find_m(C, request, trace=False)


def run_experiment(cfg: ExperimentConfig, gen: GenerationConfig,
                   corpus: Optional[Corpus] = None) -> list:
    """Per-bucket SR and mean modified-entry count for every algorithm and method.

    Rows are ordered by bucket, then algorithm, then method, following the
    order given in ``cfg``.
    """
    if cfg.trials_per_bucket == 0:
        return []
    if corpus is None:
        corpus = fill_buckets(cfg, gen)
    stats = []
    for k in range(cfg.bucket_count):
        low, high = cfg.bucket_bounds(k)
        mats = corpus.matrices.get(k, [])
        note = corpus.notes.get(k, "")
        for algorithm in cfg.algorithms:
            for method in cfg.methods:
                successes = 0
                m_total = 0
                for C in mats:
                    res = run_trial(C, cfg, algorithm, method)
                    successes += res.success
                    m_total += res.m_res
                mean_m = m_total / len(mats) if mats else math.nan
                stats.append(BucketStats(cfg.n, algorithm, method, cfg.delta_pq, low, high,
                                         len(mats), successes, mean_m, note))
        log.info("bucket %d [%g, %g): %d matrices", k, low, high, len(mats))
    return stats
