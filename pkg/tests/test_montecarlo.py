import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from homogeneity import (
    CHI_SQUARE,
    FROBENIUS,
    LOG_LIKELIHOOD_RATIO,
    NEG_LOG_LIKELIHOOD,
    DEFAULT_KINDS,
    StatisticKind,
    get_dataset,
)
from homogeneity.montecarlo import (
    BudgetExceededError,
    MonteCarloResult,
    ProvenanceError,
    SimulationConfig,
    estimate_pvalues,
    exact_pvalues,
    merge_partials,
    outcome_count,
    tie_slack,
)
from oracles import brute_force_pvalues, compositions

LABELS = {k: k.label for k in DEFAULT_KINDS}
small_tables = st.tuples(st.integers(2, 3), st.integers(2, 3)).flatmap(
    lambda shape: st.lists(
        st.lists(st.integers(0, 4), min_size=shape[1], max_size=shape[1]),
        min_size=shape[0], max_size=shape[0],
    )
).filter(lambda t: sum(map(sum, t)) > 0)


def _by_label(results):
    return {r.kind.label: r for r in results}


class TestEstimate:
    def test_homogeneous_degenerate_is_one(self):
        res = estimate_pvalues([[5, 5], [0, 0]], m=1000, seed=1)
        assert all(r.p_hat == 1.0 and r.std_err == 0.0 for r in res)

    def test_homogeneous_divergences_are_one(self):
        kinds = (CHI_SQUARE, LOG_LIKELIHOOD_RATIO, FROBENIUS, StatisticKind.power_divergence(2.0))
        res = estimate_pvalues([[2, 2], [3, 3]], m=5000, seed=3, kinds=kinds)
        assert all(r.p_hat == 1.0 for r in res)

    def test_identity_two_by_two(self):
        # the simulated table is diagonal or anti-diagonal half the time
        m = 1_000_000
        res = estimate_pvalues([[1, 0], [0, 1]], m=m, seed=7, kinds=(CHI_SQUARE,))[0]
        assert abs(res.p_hat - 0.5) <= 0.002
        assert res.std_err == pytest.approx(math.sqrt(res.p_hat * (1 - res.p_hat) / m))

    @pytest.mark.parametrize("workers", [2, 3, 8])
    def test_worker_count_does_not_change_result(self, workers):
        t = get_dataset("mania2").table
        one = estimate_pvalues(t, m=20_000, seed=11, workers=1)
        many = estimate_pvalues(t, m=20_000, seed=11, workers=workers)
        assert [r.exceedances for r in one] == [r.exceedances for r in many]
        assert [r.observed for r in one] == [r.observed for r in many]

    def test_seed_changes_result(self):
        t = get_dataset("mania2").table
        a = estimate_pvalues(t, m=20_000, seed=1, kinds=(CHI_SQUARE,))[0]
        b = estimate_pvalues(t, m=20_000, seed=2, kinds=(CHI_SQUARE,))[0]
        assert a.exceedances != b.exceedances

    def test_prefix_consistency(self):
        # simulation l always uses substream l, so a longer run extends a shorter one
        t = get_dataset("mania2").table
        short = estimate_pvalues(t, m=5_000, seed=4, workers=1)
        rest = estimate_pvalues(t, m=10_000, seed=4, workers=2)
        for a, b in zip(short, rest):
            assert a.exceedances <= b.exceedances <= a.exceedances + 5_000

    def test_kind_subset_matches_full_run(self):
        t = get_dataset("mania2").table
        full = _by_label(estimate_pvalues(t, m=5_000, seed=9))
        part = _by_label(estimate_pvalues(t, m=5_000, seed=9, kinds=(FROBENIUS,)))
        assert part["frobenius"].exceedances == full["frobenius"].exceedances

    def test_generators_agree_statistically(self):
        t = get_dataset("mania2").table
        a = estimate_pvalues(t, m=100_000, seed=1, kinds=(CHI_SQUARE,))[0]
        b = estimate_pvalues(t, m=100_000, seed=1, kinds=(CHI_SQUARE,), generator="splitmix")[0]
        assert abs(a.p_hat - b.p_hat) <= 5 * math.hypot(a.std_err, b.std_err)

    def test_config_and_overrides(self):
        cfg = SimulationConfig(m=100, seed=5, kinds=(CHI_SQUARE,))
        res = estimate_pvalues([[1, 2], [3, 4]], cfg, m=200)
        assert res[0].m == 200 and res[0].seed == 5

    @pytest.mark.parametrize(
        "kw", [{"m": 0}, {"workers": 0}, {"kinds": ()}, {"tie_epsilon": -1.0},
               {"tie_epsilon": math.nan}, {"generator": "nope"}],
    )
    def test_bad_config(self, kw):
        with pytest.raises(ValueError):
            SimulationConfig(**kw)

    def test_tie_epsilon_zero_still_counts_exact_ties(self):
        res = estimate_pvalues([[1, 0], [0, 1]], m=20_000, seed=2, tie_epsilon=0.0,
                               kinds=(CHI_SQUARE,))[0]
        assert 0.45 < res.p_hat < 0.55


class TestTieSlack:
    def test_relative(self):
        np.testing.assert_allclose(tie_slack([0.0, 0.5, 1e6], 1e-9), [-1e-9, 0.5 - 1e-9, 1e6 - 1e-3])

    def test_infinite_kept(self):
        assert tie_slack([math.inf], 1e-9)[0] == math.inf


class TestMonotone:
    def test_p_value_decreases_with_observed(self):
        # a larger observed statistic can only lower the exceedance count
        base = [[3, 1], [1, 3]]
        more = [[4, 0], [0, 4]]
        a = _by_label(estimate_pvalues(base, m=50_000, seed=5))
        b = _by_label(estimate_pvalues(more, m=50_000, seed=5))
        for label in ("chi2", "g2", "ft", "frobenius"):
            assert b[label].observed > a[label].observed
            assert b[label].exceedances <= a[label].exceedances


class TestMerge:
    def test_sums_counts(self):
        parts = [MonteCarloResult(CHI_SQUARE, 2.0, 3, 10, 1), MonteCarloResult(CHI_SQUARE, 2.0, 7, 30, 1)]
        merged = merge_partials(parts)
        assert (merged.exceedances, merged.m, merged.p_hat) == (10, 40, 0.25)
        assert merged.std_err == pytest.approx(math.sqrt(0.25 * 0.75 / 40))

    @pytest.mark.parametrize(
        "other",
        [MonteCarloResult(FROBENIUS, 2.0, 1, 10, 1), MonteCarloResult(CHI_SQUARE, 2.0, 1, 10, 2),
         MonteCarloResult(CHI_SQUARE, 3.0, 1, 10, 1)],
    )
    def test_provenance(self, other):
        with pytest.raises(ProvenanceError):
            merge_partials([MonteCarloResult(CHI_SQUARE, 2.0, 1, 10, 1), other])

    def test_empty(self):
        with pytest.raises(ValueError):
            merge_partials([])

    @pytest.mark.parametrize("hits, m", [(-1, 10), (11, 10), (0, 0)])
    def test_invalid_counts(self, hits, m):
        with pytest.raises(ValueError):
            MonteCarloResult(CHI_SQUARE, 1.0, hits, m, 0)

    @given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=6))
    def test_merge_is_sum(self, pairs):
        parts = [MonteCarloResult(CHI_SQUARE, 1.0, h, h + extra + 1, 0) for h, extra in pairs]
        merged = merge_partials(parts)
        assert merged.exceedances == sum(p.exceedances for p in parts)
        assert merged.m == sum(p.m for p in parts)


class TestExact:
    def test_identity_two_by_two(self):
        res = exact_pvalues([[1, 0], [0, 1]])
        assert all(r.outcomes == 4 for r in res)
        assert all(r.p_value == pytest.approx(0.5, abs=1e-15) for r in res)

    def test_homogeneous(self):
        res = _by_label(exact_pvalues([[2, 2], [3, 3]]))
        assert res["chi2"].p_value == pytest.approx(1.0)
        assert res["frobenius"].p_value == pytest.approx(1.0)

    def test_mass_is_one(self):
        res = exact_pvalues([[3, 0, 2], [1, 4, 1], [0, 2, 3]])
        assert res[0].mass == pytest.approx(1.0, abs=1e-12)

    def test_budget(self):
        with pytest.raises(BudgetExceededError) as info:
            exact_pvalues(get_dataset("danish").table)
        assert info.value.required == outcome_count(get_dataset("danish").table.col_totals, 11)

    def test_budget_boundary(self):
        assert outcome_count([2, 2], 2) == 9
        exact_pvalues([[1, 1], [1, 1]], budget=9)
        with pytest.raises(BudgetExceededError):
            exact_pvalues([[1, 1], [1, 1]], budget=8)

    @given(st.lists(st.integers(0, 6), min_size=1, max_size=3), st.integers(1, 4))
    def test_outcome_count_matches_listing(self, cols, r):
        listed = math.prod(sum(1 for _ in compositions(c, r)) for c in cols)
        assert outcome_count(cols, r) == listed

    @settings(max_examples=30)
    @given(small_tables)
    def test_matches_brute_force(self, counts):
        want = brute_force_pvalues(counts)
        got = _by_label(exact_pvalues(counts))
        for label, p in want.items():
            assert got[label].p_value == pytest.approx(p, abs=1e-9), label

    def test_monte_carlo_agrees_with_exact(self):
        t = [[3, 1, 0], [1, 2, 4]]
        exact = _by_label(exact_pvalues(t))
        m = 200_000
        for r in estimate_pvalues(t, m=m, seed=21):
            p = exact[r.kind.label].p_value
            assert abs(r.p_hat - p) <= 5 * math.sqrt(max(p * (1 - p), 1e-12) / m) + 1e-12

    def test_nll_convention(self):
        res = _by_label(exact_pvalues([[1, 0], [0, 1]], kinds=(NEG_LOG_LIKELIHOOD,)))
        assert res["nll"].observed == pytest.approx(2 * math.log(2))
