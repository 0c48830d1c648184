"""Monte-Carlo and exact P-values for the homogeneity test.

Simulation ``l`` (``l = 0 .. m - 1``) always draws from RNG substream ``l``,
so the exceedance counts depend only on ``(seed, m, kinds, generator)`` and
not on how the simulations are split across workers.  All requested
statistics are evaluated on the same simulated tables.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numba as nb
import numpy as np

from .rng import GENERATORS, STATE_WORDS
from .sampler import column_sampler, null_spec
from .statistics import DEFAULT_KINDS, StatisticKind, kernel_args, log_factorials, stat_kernel
from .table import ContingencyTable, HomogeneityError, check_table

__all__ = [
    "SimulationConfig",
    "MonteCarloResult",
    "ExactResult",
    "ProvenanceError",
    "ResourceLimitError",
    "BudgetExceededError",
    "estimate_pvalues",
    "exact_pvalues",
    "merge_partials",
    "outcome_count",
    "tie_slack",
]

DEFAULT_BUDGET = 10_000_000

# TBB is probed first by default and warns when too old; it is never needed here
if "NUMBA_THREADING_LAYER" not in os.environ:
    nb.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


class ProvenanceError(HomogeneityError, ValueError):
    """Partial results from different runs cannot be merged."""


class ResourceLimitError(HomogeneityError, RuntimeError):
    """A run was abandoned for lack of memory; no partial results are kept."""


class BudgetExceededError(HomogeneityError, ValueError):
    """Exact enumeration would visit more outcomes than allowed."""

    def __init__(self, required: int, budget: int):
        super().__init__(f"exact enumeration needs {required} outcomes, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class SimulationConfig:
    """Settings for :func:`estimate_pvalues`.

    ``tie_epsilon`` is relative: a simulated statistic counts as an
    exceedance when it is at least ``observed - tie_epsilon * max(1, |observed|)``.
    """

    m: int = 4_000_000
    seed: int = 0
    workers: int = 1
    kinds: tuple[StatisticKind, ...] = DEFAULT_KINDS
    tie_epsilon: float = 1e-9
    generator: str = "cmwc"

    def __post_init__(self):
        if int(self.m) < 1:
            raise ValueError(f"number of simulations must be >= 1, got {self.m}")
        if int(self.workers) < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        kinds = tuple(dict.fromkeys(self.kinds))
        if not kinds:
            raise ValueError("no statistics requested")
        if not (self.tie_epsilon >= 0.0 and math.isfinite(self.tie_epsilon)):
            raise ValueError(f"tie_epsilon must be finite and nonnegative, got {self.tie_epsilon}")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; choose from {sorted(GENERATORS)}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "workers", int(self.workers))
        object.__setattr__(self, "kinds", kinds)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "seed": self.seed,
            "workers": self.workers,
            "kinds": [k.label for k in self.kinds],
            "tie_epsilon": self.tie_epsilon,
            "generator": self.generator,
        }


@dataclass(frozen=True)
class MonteCarloResult:
    """Exceedance count for one statistic and the derived P-value estimate."""

    kind: StatisticKind
    observed: float
    exceedances: int
    m: int
    seed: int
    p_hat: float = field(init=False)
    std_err: float = field(init=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 <= self.exceedances <= self.m:
            raise ValueError(f"exceedances {self.exceedances} outside [0, {self.m}]")
        p = self.exceedances / self.m
        object.__setattr__(self, "p_hat", p)
        object.__setattr__(self, "std_err", math.sqrt(p * (1.0 - p) / self.m))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.label,
            "observed": self.observed,
            "exceedances": self.exceedances,
            "m": self.m,
            "p_hat": self.p_hat,
            "std_err": self.std_err,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ExactResult:
    kind: StatisticKind
    observed: float
    p_value: float
    outcomes: int
    # total probability of the enumerated outcomes; 1 up to rounding
    mass: float = 1.0


def tie_slack(observed: np.ndarray, tie_epsilon: float) -> np.ndarray:
    """Comparison thresholds ``observed - eps * max(1, |observed|)``; infinite stays infinite."""
    observed = np.asarray(observed, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        thr = observed - tie_epsilon * np.maximum(1.0, np.abs(observed))
    return np.where(np.isinf(observed), observed, thr)


def merge_partials(parts: Sequence[MonteCarloResult]) -> MonteCarloResult:
    """Sum the exceedances and simulation counts of per-worker partial results."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to merge")
    first = parts[0]
    for p in parts[1:]:
        if p.kind != first.kind or p.seed != first.seed or not _same_float(p.observed, first.observed):
            raise ProvenanceError(
                f"cannot merge {p.kind}/seed={p.seed} into {first.kind}/seed={first.seed}"
            )
    return MonteCarloResult(
        first.kind,
        first.observed,
        sum(p.exceedances for p in parts),
        sum(p.m for p in parts),
        first.seed,
    )


def _same_float(a: float, b: float) -> bool:
    return a == b or (math.isnan(a) and math.isnan(b))


@lru_cache(maxsize=None)
def _simulation_kernel(generator: str):
    init = GENERATORS[generator][0]
    fill_column = column_sampler(generator)

    @nb.njit(parallel=True, cache=False)
    def run(cdf, guide, col_totals, n, codes, lams, logfact, thresholds, seed, bounds, hits):
        nchunks = bounds.shape[0] - 1
        r = cdf.shape[0]
        s = col_totals.shape[0]
        nk = codes.shape[0]
        for c in nb.prange(nchunks):
            state = np.empty(STATE_WORDS, dtype=np.uint64)
            table = np.empty((r, s), dtype=np.int64)
            col = np.empty(r, dtype=np.int64)
            row_tot = np.empty(r, dtype=np.int64)
            sums = np.empty(nk)
            comps = np.empty(nk)
            out = np.empty(nk)
            for ell in range(bounds[c], bounds[c + 1]):
                init(state, seed, np.uint64(ell))
                for j in range(r):
                    row_tot[j] = 0
                for k in range(s):
                    fill_column(cdf, guide, col_totals[k], state, col)
                    for j in range(r):
                        table[j, k] = col[j]
                        row_tot[j] += col[j]
                stat_kernel(table, row_tot, col_totals, n, codes, lams, logfact, sums, comps, out)
                for i in range(nk):
                    if out[i] >= thresholds[i]:
                        hits[c, i] += 1

    return run


def _chunk_bounds(m: int, workers: int) -> np.ndarray:
    chunks = min(m, workers)
    return np.array([m * c // chunks for c in range(chunks + 1)], dtype=np.int64)


def estimate_pvalues(t, cfg: SimulationConfig | None = None, **overrides) -> list[MonteCarloResult]:
    """Monte-Carlo P-values for each statistic in ``cfg.kinds``.

    Each of the ``cfg.m`` simulated tables keeps the observed column totals,
    draws its cells from the observed row proportions, and is compared with
    its own homogeneity model.  The estimate is the fraction of simulated
    statistics at least as large as the observed one; its standard error is
    ``sqrt(p * (1 - p) / m)``.

    Keyword overrides replace fields of ``cfg`` (or of the default config).
    """
    t = check_table(t)
    if cfg is None:
        cfg = SimulationConfig(**overrides)
    elif overrides:
        cfg = SimulationConfig(**{**cfg.__dict__, **overrides})
    kinds = cfg.kinds
    codes, lams = kernel_args(kinds)
    spec = null_spec(t)
    try:
        logfact = log_factorials(int(t.col_totals.max()))
        observed = np.empty(len(kinds))
        stat_kernel(
            t.counts, t.row_totals, t.col_totals, t.n, codes, lams, logfact,
            np.empty(len(kinds)), np.empty(len(kinds)), observed,
        )
        thresholds = tie_slack(observed, cfg.tie_epsilon)
        bounds = _chunk_bounds(cfg.m, cfg.workers)
        hits = np.zeros((len(bounds) - 1, len(kinds)), dtype=np.int64)
        kernel = _simulation_kernel(cfg.generator)
        with _threads(cfg.workers):
            kernel(
                spec.cdf, spec.guide, spec.col_totals, t.n, codes, lams, logfact, thresholds,
                np.uint64(int(cfg.seed) & 0xFFFFFFFFFFFFFFFF), bounds, hits,
            )
    except MemoryError as exc:
        raise ResourceLimitError(f"out of memory during simulation: {exc}") from None

    results = []
    for i, kind in enumerate(kinds):
        parts = [
            MonteCarloResult(kind, float(observed[i]), int(hits[c, i]),
                             int(bounds[c + 1] - bounds[c]), cfg.seed)
            for c in range(hits.shape[0])
        ]
        results.append(merge_partials(parts))
    return results


class _threads:
    """Temporarily cap numba's worker threads."""

    def __init__(self, workers: int):
        self.want = max(1, min(int(workers), nb.config.NUMBA_NUM_THREADS))

    def __enter__(self):
        self.saved = nb.get_num_threads()
        nb.set_num_threads(self.want)

    def __exit__(self, *exc):
        nb.set_num_threads(self.saved)


# ---------------------------------------------------------------------------
# exact enumeration


def outcome_count(col_totals: Iterable[int], r: int) -> int:
    """Number of tables with the given column totals and ``r`` rows."""
    total = 1
    for c in col_totals:
        total *= math.comb(int(c) + r - 1, r - 1)
    return total


def _compositions(total: int, r: int):
    """Compositions of ``total`` into ``r`` nonnegative parts, in colex order."""
    if r == 1:
        yield (total,)
        return
    for last in range(total + 1):
        for head in _compositions(total - last, r - 1):
            yield head + (last,)


def _column_outcomes(total: int, log_p: np.ndarray, logfact: np.ndarray):
    """Compositions with nonzero probability and their multinomial log-probabilities."""
    comps, logprobs = [], []
    for comp in _compositions(total, len(log_p)):
        lp = logfact[total]
        ok = True
        for c, lpj in zip(comp, log_p):
            if c:
                if lpj == -np.inf:
                    ok = False
                    break
                lp += c * lpj - logfact[c]
        if ok:
            comps.append(comp)
            logprobs.append(lp)
    return np.array(comps, dtype=np.int64).reshape(-1, len(log_p)), np.array(logprobs)


@nb.njit(cache=True)
def _enumerate(comps, logprobs, offsets, sizes, col_totals, n, codes, lams, logfact, thresholds):
    s = sizes.shape[0]
    r = comps.shape[1]
    nk = codes.shape[0]
    idx = np.zeros(s, dtype=np.int64)
    table = np.empty((r, s), dtype=np.int64)
    row_tot = np.empty(r, dtype=np.int64)
    sums = np.empty(nk)
    comps_ = np.empty(nk)
    out = np.empty(nk)
    acc = np.zeros(nk)
    acc_c = np.zeros(nk)
    tot = np.zeros(1)
    tot_c = np.zeros(1)
    # suffix[k] = sum of log-probabilities of columns k .. s-1
    suffix = np.zeros(s + 1)
    for k in range(s - 1, -1, -1):
        suffix[k] = suffix[k + 1] + logprobs[offsets[k]]
    for k in range(s):
        for j in range(r):
            table[j, k] = comps[offsets[k], j]
    count = 0
    while True:
        for j in range(r):
            v = 0
            for k in range(s):
                v += table[j, k]
            row_tot[j] = v
        stat_kernel(table, row_tot, col_totals, n, codes, lams, logfact, sums, comps_, out)
        prob = math.exp(suffix[0])
        _kahan_add(tot, tot_c, 0, prob)
        for i in range(nk):
            if out[i] >= thresholds[i]:
                _kahan_add(acc, acc_c, i, prob)
        count += 1
        # advance the mixed-radix index, column 0 fastest
        k = 0
        while k < s:
            idx[k] += 1
            if idx[k] < sizes[k]:
                break
            idx[k] = 0
            k += 1
        if k == s:
            break
        for kk in range(k, -1, -1):
            row = offsets[kk] + idx[kk]
            suffix[kk] = suffix[kk + 1] + logprobs[row]
            for j in range(r):
                table[j, kk] = comps[row, j]
    return acc, tot[0], count


@nb.njit(cache=True, inline="always")
def _kahan_add(sums, comps, i, v):
    y = v - comps[i]
    t = sums[i] + y
    comps[i] = (t - sums[i]) - y
    sums[i] = t


def exact_pvalues(
    t,
    kinds: Iterable[StatisticKind] = DEFAULT_KINDS,
    budget: int = DEFAULT_BUDGET,
    tie_epsilon: float = 1e-9,
) -> list[ExactResult]:
    """Exact P-values by enumerating every table with the observed column totals.

    Each outcome is weighted by the product over columns of its multinomial
    probability under the observed row proportions.  Compositions that put
    draws on a row of probability zero are skipped, so ``outcomes`` may be
    smaller than :func:`outcome_count`.

    Raises
    ------
    BudgetExceededError
        If the outcome space is larger than ``budget``.
    """
    t = check_table(t)
    kinds = tuple(dict.fromkeys(kinds))
    if not kinds:
        raise ValueError("no statistics requested")
    r, s = t.shape
    required = outcome_count(t.col_totals, r)
    if required > budget:
        raise BudgetExceededError(required, budget)
    codes, lams = kernel_args(kinds)
    logfact = log_factorials(int(t.col_totals.max()))
    observed = np.empty(len(kinds))
    stat_kernel(
        t.counts, t.row_totals, t.col_totals, t.n, codes, lams, logfact,
        np.empty(len(kinds)), np.empty(len(kinds)), observed,
    )
    thresholds = tie_slack(observed, tie_epsilon)
    with np.errstate(divide="ignore"):
        log_p = np.log(t.row_totals / np.float64(t.n))
    blocks = [_column_outcomes(int(c), log_p, logfact) for c in t.col_totals]
    sizes = np.array([len(b[0]) for b in blocks], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    comps = np.concatenate([b[0] for b in blocks])
    logprobs = np.concatenate([b[1] for b in blocks])
    acc, total, count = _enumerate(
        comps, logprobs, offsets, sizes, t.col_totals, t.n, codes, lams, logfact, thresholds
    )
    return [
        ExactResult(kind, float(observed[i]), float(min(1.0, max(0.0, acc[i]))), int(count), float(total))
        for i, kind in enumerate(kinds)
    ]
