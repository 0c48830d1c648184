"""Contingency tables, CSV I/O, and the homogeneity model.

Columns are the groups whose totals are fixed by design; rows are the
categories.  Data stored the other way round can be loaded with
``transpose=True``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "HomogeneityError",
    "TableParseError",
    "TableValidationError",
    "ContingencyTable",
    "HomogeneityModel",
    "ResidualReport",
    "check_table",
    "parse_table",
    "read_table",
    "table_to_csv",
    "homogeneity_model",
    "residuals",
]

# n * n must fit in int64 so that row_total * col_total never overflows
_MAX_TOTAL = 3_037_000_499


class HomogeneityError(Exception):
    """Base class for errors raised by this package."""


class TableParseError(HomogeneityError, ValueError):
    """The CSV text could not be read as a grid of integers."""


class TableValidationError(HomogeneityError, ValueError):
    """The counts do not form a testable contingency table."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Validated r x s table of nonnegative integer counts.

    Margins (``row_totals``, ``col_totals``, ``n``) are computed once at
    construction.  Labels are carried along for display only.
    """

    counts: np.ndarray
    row_labels: tuple[str, ...] | None = None
    col_labels: tuple[str, ...] | None = None
    row_totals: np.ndarray = field(init=False, repr=False)
    col_totals: np.ndarray = field(init=False, repr=False)
    n: int = field(init=False, repr=False)

    def __post_init__(self):
        raw = np.asarray(self.counts)
        if raw.ndim != 2:
            raise TableValidationError(f"counts must be a 2-d array, got shape {raw.shape}")
        r, s = raw.shape
        if r < 2 or s < 2:
            raise TableValidationError(
                f"need at least 2 rows and 2 columns, got {r} x {s}"
            )
        if raw.dtype.kind == "f":
            bad = np.argwhere(raw != np.round(raw))
            if bad.size:
                j, k = bad[0]
                raise TableValidationError(
                    f"cell (row {j + 1}, col {k + 1}) is not an integer: {raw[j, k]!r}"
                )
        elif raw.dtype.kind not in "iub":
            raise TableValidationError(f"counts must be integers, got dtype {raw.dtype}")
        neg = np.argwhere(raw < 0)
        if neg.size:
            j, k = neg[0]
            raise TableValidationError(
                f"cell (row {j + 1}, col {k + 1}) is negative: {raw[j, k]}"
            )
        counts = _readonly(np.array(raw, dtype=np.int64))
        n = int(counts.sum())
        if n < 1:
            raise TableValidationError("grand total is zero")
        if n > _MAX_TOTAL:
            raise TableValidationError(f"grand total {n} exceeds {_MAX_TOTAL}")
        row_labels = self._check_labels(self.row_labels, r, "row")
        col_labels = self._check_labels(self.col_labels, s, "column")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "row_labels", row_labels)
        object.__setattr__(self, "col_labels", col_labels)
        object.__setattr__(self, "row_totals", _readonly(counts.sum(axis=1)))
        object.__setattr__(self, "col_totals", _readonly(counts.sum(axis=0)))
        object.__setattr__(self, "n", n)

    @staticmethod
    def _check_labels(labels, size, what):
        if labels is None:
            return None
        labels = tuple(str(x) for x in labels)
        if len(labels) != size:
            raise TableValidationError(f"expected {size} {what} labels, got {len(labels)}")
        return labels

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def __eq__(self, other):
        if not isinstance(other, ContingencyTable):
            return NotImplemented
        return (
            np.array_equal(self.counts, other.counts)
            and self.row_labels == other.row_labels
            and self.col_labels == other.col_labels
        )

    __hash__ = None

    def transpose(self) -> "ContingencyTable":
        return ContingencyTable(self.counts.T, self.col_labels, self.row_labels)

    def percentages(self) -> np.ndarray:
        """Each count as a percentage of its column total."""
        return 100.0 * self.counts / self.col_totals[None, :]


def check_table(X, row_labels=None, col_labels=None) -> ContingencyTable:
    """Coerce ``X`` to a :class:`ContingencyTable`, validating as needed.

    Tables pass through unchanged; array-likes are validated.
    """
    if isinstance(X, ContingencyTable):
        return X
    return ContingencyTable(np.asarray(X), row_labels, col_labels)


@dataclass(frozen=True, eq=False)
class HomogeneityModel:
    """Expected counts ``n[j,.] * n[.,k] / n`` and row proportions ``n[j,.] / n``."""

    expected: np.ndarray
    row_props: np.ndarray


@dataclass(frozen=True, eq=False)
class ResidualReport:
    differences: np.ndarray
    standardized: np.ndarray


def homogeneity_model(t) -> HomogeneityModel:
    t = check_table(t)
    # integer product first, then a single division
    prod = t.row_totals[:, None] * t.col_totals[None, :]
    expected = prod.astype(np.float64) / np.float64(t.n)
    row_props = t.row_totals / np.float64(t.n)
    return HomogeneityModel(_readonly(expected), _readonly(row_props))


def residuals(t, m: HomogeneityModel | None = None) -> ResidualReport:
    """Raw and standardized differences between the table and its model.

    Standardized residuals divide by the square root of the expected count;
    cells with zero expected count (hence zero observed count) get 0.
    """
    t = check_table(t)
    if m is None:
        m = homogeneity_model(t)
    elif m.expected.shape != t.shape:
        raise ValueError(f"model shape {m.expected.shape} does not match table shape {t.shape}")
    diff = t.counts - m.expected
    root = np.sqrt(m.expected)
    std = np.divide(diff, root, out=np.zeros_like(diff), where=root > 0)
    return ResidualReport(_readonly(diff), _readonly(std))


def parse_table(
    text: str,
    has_header: bool = False,
    has_row_labels: bool = False,
    transpose: bool = False,
) -> ContingencyTable:
    """Parse CSV text into a validated table.

    Parameters
    ----------
    text : str
        CSV document.  Data cells must be base-10 nonnegative integers.
    has_header : bool
        First row holds column labels.
    has_row_labels : bool
        First column holds row labels.
    transpose : bool
        Swap rows and columns before validation, so that the fixed-total
        groups end up as columns.

    Raises
    ------
    TableParseError
        Malformed CSV, a non-integer cell, or ragged rows.
    TableValidationError
        Negative cells, fewer than two rows or columns, or a zero total.
    """
    try:
        rows = list(csv.reader(io.StringIO(text), strict=True))
    except csv.Error as exc:
        raise TableParseError(f"malformed CSV: {exc}") from None
    rows = [row for row in rows if any(cell.strip() for cell in row)]
    if not rows:
        raise TableParseError("empty table")

    col_labels = None
    if has_header:
        header, rows = rows[0], rows[1:]
        col_labels = [c.strip() for c in (header[1:] if has_row_labels else header)]
        if not rows:
            raise TableParseError("table has a header but no data rows")

    row_labels = [] if has_row_labels else None
    width = None
    data = []
    for j, row in enumerate(rows, start=1):
        if has_row_labels:
            row_labels.append(row[0].strip())
            row = row[1:]
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise TableParseError(f"row {j} has {len(row)} data cells, expected {width}")
        values = []
        for k, cell in enumerate(row, start=1):
            cell = cell.strip()
            try:
                values.append(int(cell, 10))
            except ValueError:
                raise TableParseError(
                    f"cell (row {j}, col {k}) is not an integer: {cell!r}"
                ) from None
        data.append(values)
    if col_labels is not None and len(col_labels) != width:
        raise TableParseError(f"header has {len(col_labels)} labels for {width} data columns")

    counts = np.array(data, dtype=object)
    if counts.ndim != 2 or counts.shape[1] == 0:
        raise TableValidationError("table has no data columns")
    neg = np.argwhere(counts < 0)
    if neg.size:
        j, k = neg[0]
        raise TableValidationError(f"cell (row {j + 1}, col {k + 1}) is negative: {counts[j, k]}")
    if counts.max() > np.iinfo(np.int64).max:
        raise TableValidationError("cell count does not fit in 64 bits")
    counts = counts.astype(np.int64)
    if transpose:
        counts = counts.T
        row_labels, col_labels = col_labels, row_labels
    return ContingencyTable(counts, row_labels, col_labels)


def read_table(path, **options) -> ContingencyTable:
    """Read a CSV file (UTF-8) with :func:`parse_table`."""
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_table(fh.read(), **options)


def table_to_csv(t: ContingencyTable, header: bool | None = None, row_labels: bool | None = None) -> str:
    """Serialize ``t`` in the format read by :func:`parse_table`.

    Labels are written when present unless switched off explicitly.
    """
    header = t.col_labels is not None if header is None else header
    row_labels = t.row_labels is not None if row_labels is None else row_labels
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    if header:
        cols = t.col_labels or tuple(str(k + 1) for k in range(t.shape[1]))
        writer.writerow(([""] if row_labels else []) + list(cols))
    rows = t.row_labels or tuple(str(j + 1) for j in range(t.shape[0]))
    for j in range(t.shape[0]):
        cells = [str(int(c)) for c in t.counts[j]]
        writer.writerow(([rows[j]] if row_labels else []) + cells)
    return out.getvalue()
