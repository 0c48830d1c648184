"""Simulation of tables under homogeneity with fixed column totals.

Column ``k`` of a simulated table is the histogram of ``n[., k]``
independent categorical draws over the rows, with row probabilities taken
from the observed row proportions.  Each draw inverts the cumulative
distribution by binary search.  A 256-bucket guide table brackets each
search, so the answer is the same as a full binary search over the CDF but
usually needs no iterations at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numba as nb
import numpy as np

from .rng import GENERATORS, RngState, make_uniform
from .table import ContingencyTable, check_table

__all__ = ["NullSpec", "null_spec", "sample_column", "simulate_table", "simulate_tables"]

GUIDE_SIZE = 256


@dataclass(frozen=True, eq=False)
class NullSpec:
    """Row probabilities, column totals and the precomputed row CDF."""

    row_props: np.ndarray
    col_totals: np.ndarray
    cdf: np.ndarray
    guide: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "guide", _guide_table(self.cdf))

    @classmethod
    def from_margins(cls, row_totals, col_totals) -> "NullSpec":
        row_totals = np.asarray(row_totals, dtype=np.int64)
        col_totals = np.asarray(col_totals, dtype=np.int64)
        if row_totals.ndim != 1 or col_totals.ndim != 1:
            raise ValueError("margins must be 1-d")
        if (row_totals < 0).any() or row_totals.sum() < 1:
            raise ValueError("row totals must be nonnegative with a positive sum")
        if (col_totals < 0).any() or col_totals.sum() < 1:
            raise ValueError("column totals must be nonnegative with a positive sum")
        n = np.float64(row_totals.sum())
        # integer cumsum keeps the last entry exactly 1.0
        cdf = np.cumsum(row_totals) / n
        return cls(row_totals / n, col_totals, cdf)

    @classmethod
    def from_probabilities(cls, row_props, col_totals) -> "NullSpec":
        p = np.asarray(row_props, dtype=np.float64)
        col_totals = np.asarray(col_totals, dtype=np.int64)
        if p.ndim != 1 or (p < 0).any() or not np.isfinite(p).all():
            raise ValueError("row probabilities must be a finite nonnegative vector")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"row probabilities sum to {p.sum()!r}, not 1")
        if (col_totals < 0).any() or col_totals.sum() < 1:
            raise ValueError("column totals must be nonnegative with a positive sum")
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        return cls(p, col_totals, cdf)


def null_spec(t: ContingencyTable) -> NullSpec:
    """Null distribution for ``t``: its row proportions and column totals.

    An empty column carries no draws; it is kept with total 0 so simulated
    tables have the observed shape.
    """
    t = check_table(t)
    return NullSpec.from_margins(t.row_totals, t.col_totals)


def _guide_table(cdf: np.ndarray) -> np.ndarray:
    """``guide[b]`` is the category of ``u = b / GUIDE_SIZE`` (capped at the last row)."""
    edges = np.arange(GUIDE_SIZE + 1) / GUIDE_SIZE
    guide = np.searchsorted(cdf, edges, side="right")
    return np.minimum(guide, len(cdf) - 1).astype(np.int64)


@lru_cache(maxsize=None)
def column_sampler(generator: str):
    """Jitted ``fill_column(cdf, guide, total, state, out)`` for one generator."""
    uniform = make_uniform(GENERATORS[generator][1])

    @nb.njit(cache=False)
    def fill_column(cdf, guide, total, state, out):
        for j in range(cdf.shape[0]):
            out[j] = 0
        for _ in range(total):
            u = uniform(state)
            b = int(u * GUIDE_SIZE)
            lo = guide[b]
            hi = guide[b + 1]
            # smallest j with u < cdf[j]
            while lo < hi:
                mid = (lo + hi) >> 1
                if u < cdf[mid]:
                    hi = mid
                else:
                    lo = mid + 1
            out[lo] += 1

    return fill_column


@lru_cache(maxsize=None)
def _table_sampler(generator: str):
    fill_column = column_sampler(generator)

    @nb.njit(cache=False)
    def fill_tables(cdf, guide, col_totals, state, out):
        # out has shape (count, r, s)
        r = cdf.shape[0]
        col = np.empty(r, dtype=np.int64)
        for i in range(out.shape[0]):
            for k in range(col_totals.shape[0]):
                fill_column(cdf, guide, col_totals[k], state, col)
                for j in range(r):
                    out[i, j, k] = col[j]

    return fill_tables


def sample_column(spec: NullSpec, k: int, state: RngState) -> np.ndarray:
    """Counts per row for the ``n[., k]`` draws of column ``k``."""
    out = np.empty(spec.cdf.shape[0], dtype=np.int64)
    column_sampler(state.generator)(spec.cdf, spec.guide, int(spec.col_totals[k]), state.words, out)
    return out


def simulate_tables(spec: NullSpec, state: RngState, count: int) -> np.ndarray:
    """Raw counts of ``count`` consecutive simulated tables, shape ``(count, r, s)``."""
    out = np.empty((int(count), spec.cdf.shape[0], spec.col_totals.shape[0]), dtype=np.int64)
    _table_sampler(state.generator)(spec.cdf, spec.guide, spec.col_totals, state.words, out)
    return out


def simulate_table(spec: NullSpec, state: RngState) -> ContingencyTable:
    """One simulated table; its column totals equal ``spec.col_totals``."""
    return ContingencyTable(simulate_tables(spec, state, 1)[0])
