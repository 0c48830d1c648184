"""Exact Monte-Carlo tests of homogeneity of proportions in contingency tables."""

from .datasets import DATASETS, PublishedDataset, get_dataset
from .estimator import HomogeneityTest
from .montecarlo import (
    BudgetExceededError,
    ExactResult,
    MonteCarloResult,
    ProvenanceError,
    ResourceLimitError,
    SimulationConfig,
    estimate_pvalues,
    exact_pvalues,
    merge_partials,
)
from .rng import RngState, rng_init, rng_uniform
from .sampler import NullSpec, null_spec, sample_column, simulate_table
from .statistics import (
    CHI_SQUARE,
    FREEMAN_TUKEY,
    FROBENIUS,
    LOG_LIKELIHOOD_RATIO,
    NEG_LOG_LIKELIHOOD,
    NEG_LOG_LIKELIHOOD_NO_COEF,
    DEFAULT_KINDS,
    StatisticKind,
    StatisticValue,
    chi_square,
    compute_all,
    freeman_tukey,
    frobenius,
    log_likelihood_ratio,
    neg_log_likelihood,
    power_divergence,
)
from .table import (
    ContingencyTable,
    HomogeneityError,
    HomogeneityModel,
    ResidualReport,
    TableParseError,
    TableValidationError,
    check_table,
    homogeneity_model,
    parse_table,
    read_table,
    residuals,
    table_to_csv,
)

__version__ = "0.1.0"
