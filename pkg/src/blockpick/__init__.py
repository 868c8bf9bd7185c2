"""Block-length selection for moving block bootstrap variance estimation."""
from .exceptions import (
    BlockLengthError,
    BlockpickError,
    ConditionSViolation,
    ConfigError,
    DegenerateEstimateError,
    DimensionError,
    ExperimentAborted,
    ModelError,
    NoAnalyticTruth,
)
from .hhj import HhjConfig, MseCurve, block_grid, hhj_oracle_select, hhj_select, subsample_mse_curve
from .mbb import MbbEstimate, block_means, mbb_variance, mbb_variance_general, mbb_variance_mean_exact
from .nppi import NppiConfig, bias_hat, jab_variance, nppi_select
from .oracle import OracleResult, compute_oracle, fn_curve, optimal_block, theorem1_residual, true_mse_curve
from .processes import (
    ProcessModel,
    TheoreticalConstants,
    generate,
    optimal_block_approx,
    theoretical_constants,
    true_autocovariance,
)
from .pw import PwConfig, flat_top_lambda, pw_estimates, pw_select, sample_autocov
from .selection import BlockSelection
from .statistic import SmoothStatistic, builtin_statistic, project_series, statistic_value

__version__ = "0.1.0"
