"""Four published example tables with their reported P-values.

Counts are stored exactly as printed.  The Republican table was itself
reconstructed by its source from rounded percentages; the printed integers
are the ground truth here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .statistics import (
    CHI_SQUARE,
    FREEMAN_TUKEY,
    FROBENIUS,
    LOG_LIKELIHOOD_RATIO,
    NEG_LOG_LIKELIHOOD,
    StatisticKind,
)
from .table import ContingencyTable, HomogeneityError

__all__ = ["PublishedDataset", "PaperDataset", "DATASETS", "get_dataset", "dataset_names", "PUBLISHED_M"]

#: Simulations per reported P-value.
PUBLISHED_M = 4_000_000


class UnknownDatasetError(HomogeneityError, KeyError):
    def __str__(self):
        return self.args[0]


@dataclass(frozen=True, eq=False)
class PublishedDataset:
    name: str
    table: ContingencyTable
    published_pvalues: Mapping[StatisticKind, float]
    source: str
    # printed model / difference / standardized tables, one decimal
    printed_model: np.ndarray
    printed_differences: np.ndarray
    printed_standardized: np.ndarray


def _pvalues(chi2, g2, ft, nll, frob):
    return {
        CHI_SQUARE: chi2,
        LOG_LIKELIHOOD_RATIO: g2,
        FREEMAN_TUKEY: ft,
        NEG_LOG_LIKELIHOOD: nll,
        FROBENIUS: frob,
    }


def _a(rows):
    return np.array(rows, dtype=np.float64)


_DANISH = PublishedDataset(
    name="danish",
    table=ContingencyTable(
        [[416, 268], [45, 22], [338, 160], [13, 6], [131, 66], [18, 10],
         [47, 16], [20, 8], [129, 92], [22, 9], [76, 32]],
        row_labels=("A", "B", "C", "E", "F", "K", "M", "Q", "V", "Y", "Z"),
        col_labels=("Poll 1", "Poll 2"),
    ),
    published_pvalues=_pvalues(0.0868, 0.0906, 0.0959, 0.0905, 0.00838),
    source="Polls in June 1983 for Danish parliamentary elections (Andersen, "
    "The Statistical Analysis of Categorical Data, ch. 4)",
    printed_model=_a(
        [[441.6, 242.4], [43.3, 23.7], [321.5, 176.5], [12.3, 6.7], [127.2, 69.8],
         [18.1, 9.9], [40.7, 22.3], [18.1, 9.9], [142.7, 78.3], [20.0, 11.0], [69.7, 38.3]]
    ),
    printed_differences=_a(
        [[-25.6, 25.6], [1.7, -1.7], [16.5, -16.5], [0.7, -0.7], [3.8, -3.8],
         [-0.1, 0.1], [6.3, -6.3], [1.9, -1.9], [-13.7, 13.7], [2.0, -2.0], [6.3, -6.3]]
    ),
    printed_standardized=_a(
        [[-1.2, 1.6], [0.3, -0.4], [0.9, -1.2], [0.2, -0.3], [0.3, -0.5],
         [-0.0, 0.0], [1.0, -1.3], [0.5, -0.6], [-1.1, 1.5], [0.4, -0.6], [0.8, -1.0]]
    ),
)

_MANIA = PublishedDataset(
    name="mania",
    table=ContingencyTable(
        [[21, 12, 38], [4, 4, 2], [3, 2, 2], [1, 1, 3], [0, 1, 0], [4, 2, 2], [36, 14, 27]],
        row_labels=(
            "Lack of efficacy", "Intolerance", "Recovered", "Noncompliance",
            "Another illness", "Administration", "Not terminated",
        ),
        col_labels=("Divalproex", "Lithium", "Placebo"),
    ),
    published_pvalues=_pvalues(0.145, 0.292, 0.493, 0.132, 0.0286),
    source="Reasons for premature termination of treatment of maniacal patients "
    "(Bowden et al., 1994)",
    printed_model=_a(
        [[27.4, 14.3, 29.4], [3.9, 2.0, 4.1], [2.7, 1.4, 2.9], [1.9, 1.0, 2.1],
         [0.4, 0.2, 0.4], [3.1, 1.6, 3.3], [29.7, 15.5, 31.8]]
    ),
    printed_differences=_a(
        [[-6.4, -2.3, 8.6], [0.1, 2.0, -2.1], [0.3, 0.6, -0.9], [-0.9, 0.0, 0.9],
         [-0.4, 0.8, -0.4], [0.9, 0.4, -1.3], [6.3, -1.5, -4.8]]
    ),
    printed_standardized=_a(
        [[-1.2, -0.6, 1.6], [0.1, 1.4, -1.0], [0.2, 0.5, -0.5], [-0.7, 0.0, 0.6],
         [-0.6, 1.8, -0.6], [0.5, 0.3, -0.7], [1.2, -0.4, -0.9]]
    ),
)

_REPUBLICAN = PublishedDataset(
    name="republican",
    table=ContingencyTable(
        [[15, 21], [69, 103], [57, 66], [4, 4], [19, 33], [31, 37], [57, 91], [8, 8], [65, 49]],
        row_labels=(
            "Michele Bachmann", "Herman Cain", "Newt Gingrich", "Jon Huntsman", "Ron Paul",
            "Rick Perry", "Mitt Romney", "Rick Santorum", "Do not know",
        ),
        col_labels=("CBS", "Pew"),
    ),
    published_pvalues=_pvalues(0.123, 0.138, 0.157, 0.114, 0.0344),
    source="2012 Republican U.S. presidential nomination, CBS News poll of November "
    "6-10, 2011 and Pew Research Center poll of November 9-11, 2011 (counts "
    "reconstructed from rounded percentages)",
    printed_model=_a(
        [[15.9, 20.1], [75.8, 96.2], [54.2, 68.8], [3.5, 4.5], [22.9, 29.1],
         [30.0, 38.0], [65.3, 82.7], [7.1, 8.9], [50.3, 63.7]]
    ),
    printed_differences=_a(
        [[-0.9, 0.9], [-6.8, 6.8], [2.8, -2.8], [0.5, -0.5], [-3.9, 3.9],
         [1.0, -1.0], [-8.3, 8.3], [0.9, -0.9], [14.7, -14.7]]
    ),
    printed_standardized=_a(
        [[-0.2, 0.2], [-0.8, 0.7], [0.4, -0.3], [0.3, -0.2], [-0.8, 0.7],
         [0.2, -0.2], [-1.0, 0.9], [0.4, -0.3], [2.1, -1.8]]
    ),
)

_MANIA2 = PublishedDataset(
    name="mania2",
    table=ContingencyTable(
        [[22, 16, 19], [7, 0, 6], [19, 11, 31], [6, 4, 5], [15, 5, 13]],
        row_labels=(
            "Effective and tolerated", "Effective but not tolerated",
            "Ineffective but tolerated", "Ineffective and not tolerated",
            "No prior lithium treatment",
        ),
        col_labels=("Divalproex", "Lithium", "Placebo"),
    ),
    published_pvalues=_pvalues(0.276, 0.171, 0.0794, 0.235, 0.199),
    source="Reactions to prior treatment with lithium of maniacal patients "
    "(Bowden et al., 1994)",
    printed_model=_a(
        [[22.0, 11.5, 23.6], [5.0, 2.6, 5.4], [23.5, 12.3, 25.2], [5.8, 3.0, 6.2],
         [12.7, 6.6, 13.6]]
    ),
    printed_differences=_a(
        [[0.0, 4.5, -4.6], [2.0, -2.6, 0.6], [-4.5, -1.3, 5.8], [0.2, 1.0, -1.2],
         [2.3, -1.6, -0.6]]
    ),
    printed_standardized=_a(
        [[0.0, 1.3, -0.9], [0.9, -1.6, 0.3], [-0.9, -0.4, 1.2], [0.1, 0.6, -0.5],
         [0.6, -0.6, -0.2]]
    ),
)

DATASETS: Mapping[str, PublishedDataset] = {
    d.name: d for d in (_DANISH, _MANIA, _REPUBLICAN, _MANIA2)
}


# name used by the interface contract
PaperDataset = PublishedDataset


def dataset_names() -> list[str]:
    return list(DATASETS)


def get_dataset(name: str) -> PublishedDataset:
    """Look up a bundled example by name (``danish``, ``mania``, ``republican``, ``mania2``)."""
    try:
        return DATASETS[name.strip().lower()]
    except KeyError:
        raise UnknownDatasetError(
            f"unknown dataset {name!r}; valid names: {', '.join(DATASETS)}"
        ) from None
