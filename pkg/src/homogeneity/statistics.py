"""Discrepancy statistics between a table and its homogeneity model.

Every statistic is evaluated by one numba kernel, :func:`stat_kernel`, which
is shared by the public functions here and by the Monte-Carlo and exact
enumeration loops.  Observed and simulated values therefore go through the
same arithmetic in the same (row-major, compensated) summation order, which
keeps exact ties exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numba as nb
import numpy as np

from .table import ContingencyTable, HomogeneityModel, check_table

__all__ = [
    "StatisticKind",
    "StatisticValue",
    "CHI_SQUARE",
    "LOG_LIKELIHOOD_RATIO",
    "FREEMAN_TUKEY",
    "FROBENIUS",
    "NEG_LOG_LIKELIHOOD",
    "NEG_LOG_LIKELIHOOD_NO_COEF",
    "DEFAULT_KINDS",
    "DIVERGENCE_KINDS",
    "parse_kind",
    "parse_kinds",
    "chi_square",
    "log_likelihood_ratio",
    "freeman_tukey",
    "frobenius",
    "neg_log_likelihood",
    "power_divergence",
    "compute_all",
    "log_factorials",
]

# kernel codes
_CHI2 = 0
_G2 = 1
_FT = 2
_FROB = 3
_NLL = 4
_POWER = 5
_NLL_NOCOEF = 6


@dataclass(frozen=True)
class StatisticKind:
    """Which discrepancy measure to compute.

    ``lam`` is only meaningful for the Cressie-Read power-divergence family.
    """

    name: str
    lam: float | None = None

    @classmethod
    def power_divergence(cls, lam: float) -> "StatisticKind":
        lam = float(lam)
        if not math.isfinite(lam):
            raise ValueError(f"power-divergence lambda must be finite, got {lam}")
        return cls("power_divergence", lam)

    @property
    def label(self) -> str:
        if self.name == "power_divergence":
            return f"cr:{self.lam:g}"
        return _LABELS[self.name]

    @property
    def is_divergence(self) -> bool:
        return self.name not in ("neg_log_likelihood", "neg_log_likelihood_no_coef")

    @property
    def code(self) -> int:
        return _CODES[self.name]

    def __str__(self) -> str:
        return self.label


CHI_SQUARE = StatisticKind("chi_square")
LOG_LIKELIHOOD_RATIO = StatisticKind("log_likelihood_ratio")
FREEMAN_TUKEY = StatisticKind("freeman_tukey")
FROBENIUS = StatisticKind("frobenius")
NEG_LOG_LIKELIHOOD = StatisticKind("neg_log_likelihood")
# same statistic with the multinomial coefficients dropped
NEG_LOG_LIKELIHOOD_NO_COEF = StatisticKind("neg_log_likelihood_no_coef")

_CODES = {
    "chi_square": _CHI2,
    "log_likelihood_ratio": _G2,
    "freeman_tukey": _FT,
    "frobenius": _FROB,
    "neg_log_likelihood": _NLL,
    "power_divergence": _POWER,
    "neg_log_likelihood_no_coef": _NLL_NOCOEF,
}
_LABELS = {
    "chi_square": "chi2",
    "log_likelihood_ratio": "g2",
    "freeman_tukey": "ft",
    "frobenius": "frobenius",
    "neg_log_likelihood": "nll",
    "neg_log_likelihood_no_coef": "nll-nocoef",
}
_BY_LABEL = {
    "chi2": CHI_SQUARE,
    "g2": LOG_LIKELIHOOD_RATIO,
    "ft": FREEMAN_TUKEY,
    "frobenius": FROBENIUS,
    "nll": NEG_LOG_LIKELIHOOD,
    "nll-nocoef": NEG_LOG_LIKELIHOOD_NO_COEF,
}

#: The five statistics reported for every example, in the order they are listed.
DEFAULT_KINDS = (CHI_SQUARE, LOG_LIKELIHOOD_RATIO, FREEMAN_TUKEY, NEG_LOG_LIKELIHOOD, FROBENIUS)
DIVERGENCE_KINDS = (CHI_SQUARE, LOG_LIKELIHOOD_RATIO, FREEMAN_TUKEY, FROBENIUS)


def parse_kind(text: str) -> StatisticKind:
    """Map a CLI label (``chi2``, ``g2``, ``ft``, ``frobenius``, ``nll``, ``cr:LAMBDA``) to a kind."""
    key = text.strip().lower()
    if key in _BY_LABEL:
        return _BY_LABEL[key]
    if key.startswith("cr:"):
        try:
            lam = float(key[3:])
        except ValueError:
            raise ValueError(f"bad power-divergence parameter in {text!r}") from None
        return StatisticKind.power_divergence(lam)
    raise ValueError(
        f"unknown statistic {text!r}; expected one of "
        f"{', '.join(sorted(_BY_LABEL))}, all, or cr:LAMBDA"
    )


def parse_kinds(items: str | Iterable[str]) -> tuple[StatisticKind, ...]:
    """Parse a comma-separated list (or iterable) of labels; ``all`` expands to the five standard kinds."""
    if isinstance(items, str):
        items = [items]
    kinds: list[StatisticKind] = []
    for item in items:
        for part in item.split(","):
            if not part.strip():
                continue
            new = DEFAULT_KINDS if part.strip().lower() == "all" else (parse_kind(part),)
            for kind in new:
                if kind not in kinds:
                    kinds.append(kind)
    if not kinds:
        raise ValueError("no statistics requested")
    return tuple(kinds)


@dataclass(frozen=True)
class StatisticValue:
    kind: StatisticKind
    value: float


# ---------------------------------------------------------------------------
# kernels


def log_factorials(max_count: int) -> np.ndarray:
    """Table of ``ln(i!)`` for ``i = 0 .. max_count``."""
    return np.array([math.lgamma(i + 1.0) for i in range(int(max_count) + 1)], dtype=np.float64)


@nb.njit(cache=True, inline="always")
def _kahan(sums, comps, i, v):
    y = v - comps[i]
    t = sums[i] + y
    comps[i] = (t - sums[i]) - y
    sums[i] = t


@nb.njit(cache=True)
def stat_kernel(counts, row_tot, col_tot, n, codes, lams, logfact, sums, comps, out):
    """Evaluate the requested statistics of ``counts`` against its own model.

    ``row_tot`` and ``col_tot`` must be the margins of ``counts``; ``sums``
    and ``comps`` are scratch arrays with the length of ``codes``.  Results
    are written to ``out``.
    """
    nk = codes.shape[0]
    r, s = counts.shape
    fn = np.float64(n)
    for i in range(nk):
        sums[i] = 0.0
        comps[i] = 0.0
        out[i] = 0.0
    for j in range(r):
        rj = row_tot[j]
        logp = math.log(rj / fn) if rj > 0 else 0.0
        for k in range(s):
            c = counts[j, k]
            fc = np.float64(c)
            e = np.float64(rj * col_tot[k]) / fn
            d = fc - e
            for i in range(nk):
                code = codes[i]
                if code == _CHI2:
                    if e > 0.0:
                        _kahan(sums, comps, i, d * d / e)
                elif code == _G2:
                    if c > 0:
                        _kahan(sums, comps, i, fc * math.log(fc / e))
                elif code == _FT:
                    t = math.sqrt(fc) - math.sqrt(e)
                    _kahan(sums, comps, i, t * t)
                elif code == _FROB:
                    _kahan(sums, comps, i, d * d)
                elif code == _NLL or code == _NLL_NOCOEF:
                    if c > 0:
                        v = fc * logp
                        if code == _NLL:
                            v -= logfact[c]
                        _kahan(sums, comps, i, v)
                else:
                    lam = lams[i]
                    if lam == 0.0:
                        if c > 0:
                            _kahan(sums, comps, i, fc * math.log(fc / e))
                    elif lam == -1.0:
                        if e > 0.0:
                            if c == 0:
                                out[i] = np.inf
                            else:
                                _kahan(sums, comps, i, e * math.log(e / fc))
                    elif c > 0:
                        _kahan(sums, comps, i, fc * math.expm1(lam * math.log(fc / e)))
                    elif lam < -1.0 and e > 0.0:
                        out[i] = np.inf
    for i in range(nk):
        code = codes[i]
        total = sums[i]
        if code == _G2:
            total *= 2.0
        elif code == _FT:
            total *= 4.0
        elif code == _NLL:
            for k in range(s):
                total += logfact[col_tot[k]]
            total = -total
        elif code == _NLL_NOCOEF:
            total = -total
        elif code == _POWER:
            lam = lams[i]
            if lam == 0.0 or lam == -1.0:
                total *= 2.0
            else:
                total *= 2.0 / (lam * (lam + 1.0))
        if out[i] != np.inf:
            out[i] = total


def kernel_args(kinds) -> tuple[np.ndarray, np.ndarray]:
    codes = np.array([k.code for k in kinds], dtype=np.int64)
    lams = np.array([0.0 if k.lam is None else k.lam for k in kinds], dtype=np.float64)
    return codes, lams


def _evaluate(t: ContingencyTable, kinds) -> np.ndarray:
    codes, lams = kernel_args(kinds)
    nk = len(codes)
    out = np.empty(nk)
    logfact = log_factorials(int(t.col_totals.max()))
    stat_kernel(
        t.counts, t.row_totals, t.col_totals, t.n, codes, lams, logfact,
        np.empty(nk), np.empty(nk), out,
    )
    return out


def _check_pair(t, m: HomogeneityModel | None) -> ContingencyTable:
    t = check_table(t)
    if m is not None and m.expected.shape != t.shape:
        raise ValueError(f"model shape {m.expected.shape} does not match table shape {t.shape}")
    return t


def _single(t, m, kind: StatisticKind) -> StatisticValue:
    t = _check_pair(t, m)
    return StatisticValue(kind, float(_evaluate(t, (kind,))[0]))


def chi_square(t, m: HomogeneityModel | None = None) -> StatisticValue:
    """Pearson's chi-square; cells with zero expected count contribute 0."""
    return _single(t, m, CHI_SQUARE)


def log_likelihood_ratio(t, m: HomogeneityModel | None = None) -> StatisticValue:
    """G-squared, ``2 * sum(n * ln(n / e))`` with ``0 * ln 0 = 0``."""
    return _single(t, m, LOG_LIKELIHOOD_RATIO)


def freeman_tukey(t, m: HomogeneityModel | None = None) -> StatisticValue:
    """Hellinger / Freeman-Tukey distance ``4 * sum((sqrt(n) - sqrt(e))**2)``."""
    return _single(t, m, FREEMAN_TUKEY)


def frobenius(t, m: HomogeneityModel | None = None) -> StatisticValue:
    """Unweighted sum of squared differences between counts and expected counts."""
    return _single(t, m, FROBENIUS)


def neg_log_likelihood(t, include_coefficient: bool = True) -> StatisticValue:
    """Negative log of the column-wise multinomial likelihood of the table.

    Column ``k`` is scored as a multinomial draw of size ``n[., k]`` with
    probabilities equal to the table's own row proportions.  With
    ``include_coefficient=False`` the multinomial coefficients are dropped.
    """
    kind = NEG_LOG_LIKELIHOOD if include_coefficient else NEG_LOG_LIKELIHOOD_NO_COEF
    return _single(t, None, kind)


def power_divergence(t, m: HomogeneityModel | None, lam: float) -> StatisticValue:
    """Cressie-Read power divergence with parameter ``lam``.

    ``2 / (lam * (lam + 1)) * sum(n * ((n / e)**lam - 1))``, with the
    continuous limits at ``lam = 0`` (G-squared) and ``lam = -1``
    (``2 * sum(e * ln(e / n))``).  Empty cells contribute 0 for ``lam > -1``
    and make the statistic infinite for ``lam <= -1``.
    """
    return _single(t, m, StatisticKind.power_divergence(lam))


def compute_all(
    t, m: HomogeneityModel | None = None, kinds: Iterable[StatisticKind] = DEFAULT_KINDS
) -> Mapping[StatisticKind, StatisticValue]:
    """Evaluate several statistics in one pass over the cells."""
    t = _check_pair(t, m)
    kinds = tuple(dict.fromkeys(kinds))
    if not kinds:
        raise ValueError("no statistics requested")
    values = _evaluate(t, kinds)
    return {k: StatisticValue(k, float(v)) for k, v in zip(kinds, values)}
