import numpy as np
import pytest

from homogeneity import DATASETS, DEFAULT_KINDS, get_dataset, homogeneity_model, residuals
from homogeneity.datasets import UnknownDatasetError, dataset_names

SHAPES = {"danish": (11, 2), "mania": (7, 3), "republican": (9, 2), "mania2": (5, 3)}


def test_names():
    assert dataset_names() == ["danish", "mania", "republican", "mania2"]


@pytest.mark.parametrize("name, shape", SHAPES.items())
def test_fixture_shape(name, shape):
    d = get_dataset(name)
    assert d.table.shape == shape
    assert len(d.table.row_labels) == shape[0]
    assert len(d.table.col_labels) == shape[1]
    assert set(d.published_pvalues) == set(DEFAULT_KINDS)
    assert all(0 < p < 1 for p in d.published_pvalues.values())
    for printed in (d.printed_model, d.printed_differences, d.printed_standardized):
        assert printed.shape == shape


@pytest.mark.parametrize("name", SHAPES)
def test_printed_tables_are_consistent(name):
    # model + difference reproduces the counts up to the one-decimal rounding
    d = get_dataset(name)
    np.testing.assert_allclose(d.printed_model + d.printed_differences, d.table.counts, atol=0.11)


@pytest.mark.parametrize("name", SHAPES)
def test_model_and_residuals_match_printed(name):
    d = get_dataset(name)
    m = homogeneity_model(d.table)
    rep = residuals(d.table, m)
    np.testing.assert_allclose(m.expected, d.printed_model, atol=0.05 + 1e-9)
    np.testing.assert_allclose(rep.differences, d.printed_differences, atol=0.05 + 1e-9)
    np.testing.assert_allclose(rep.standardized, d.printed_standardized, atol=0.05 + 1e-9)


def test_danish_totals():
    t = get_dataset("danish").table
    assert t.n == 1944
    np.testing.assert_array_equal(t.col_totals, [1255, 689])


def test_lookup_is_case_insensitive():
    assert get_dataset(" Danish ") is DATASETS["danish"]


def test_unknown():
    with pytest.raises(UnknownDatasetError, match="valid names: danish"):
        get_dataset("bogus")
    with pytest.raises(KeyError):
        get_dataset("bogus")
