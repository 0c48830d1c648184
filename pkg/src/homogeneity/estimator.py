"""scikit-learn style front end."""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .montecarlo import SimulationConfig, estimate_pvalues
from .statistics import DEFAULT_KINDS, StatisticKind, parse_kinds
from .table import check_table, homogeneity_model, residuals


class HomogeneityTest(BaseEstimator):
    """Monte-Carlo test of homogeneity of proportions with fixed column totals.

    Parameters
    ----------
    stats : str or sequence of str or StatisticKind, default="all"
        Statistics to test, as CLI labels (``"chi2,frobenius"``, ``"cr:0.667"``)
        or :class:`StatisticKind` objects.
    m : int, default=4_000_000
        Number of simulated tables.
    seed : int, default=0
        Base seed; simulation ``l`` uses substream ``l``.
    workers : int, default=1
        Number of work partitions (and at most this many threads).
    tie_epsilon : float, default=1e-9
        Relative slack when comparing simulated and observed statistics.
    generator : {"cmwc", "splitmix"}, default="cmwc"

    Attributes
    ----------
    table_ : ContingencyTable
    model_ : HomogeneityModel
    residuals_ : ResidualReport
    results_ : list of MonteCarloResult
    pvalues_ : dict
        P-value estimate keyed by statistic label.
    std_errs_ : dict
    """

    def __init__(self, stats="all", m=4_000_000, seed=0, workers=1, tie_epsilon=1e-9,
                 generator="cmwc"):
        self.stats = stats
        self.m = m
        self.seed = seed
        self.workers = workers
        self.tie_epsilon = tie_epsilon
        self.generator = generator

    def _kinds(self):
        if isinstance(self.stats, StatisticKind):
            return (self.stats,)
        if isinstance(self.stats, str):
            return parse_kinds(self.stats)
        items = list(self.stats)
        if all(isinstance(k, StatisticKind) for k in items):
            return tuple(items) or DEFAULT_KINDS
        return parse_kinds(items)

    def fit(self, X, y=None):
        """Run the test on the contingency table ``X`` (rows x fixed-total columns)."""
        table = check_table(X)
        cfg = SimulationConfig(
            m=self.m, seed=self.seed, workers=self.workers, kinds=self._kinds(),
            tie_epsilon=self.tie_epsilon, generator=self.generator,
        )
        self.table_ = table
        self.model_ = homogeneity_model(table)
        self.residuals_ = residuals(table, self.model_)
        self.results_ = estimate_pvalues(table, cfg)
        self.pvalues_ = {r.kind.label: r.p_hat for r in self.results_}
        self.std_errs_ = {r.kind.label: r.std_err for r in self.results_}
        return self

    def transform(self, X):
        """Standardized residuals of ``X`` against its own homogeneity model."""
        check_is_fitted(self, "results_")
        return residuals(check_table(X)).standardized

    def fit_transform(self, X, y=None):
        return self.fit(X).residuals_.standardized
