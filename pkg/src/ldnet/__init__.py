"""Least-distance deep-network regression with group-lasso variable selection.

The least-distance loss is the Euclidean norm of the whole multivariate
residual, so one network shares strength across correlated responses and
resists outliers; a (adaptive) group-lasso penalty on the first-layer weight
groups adds variable selection.
"""

from .datagen import Dataset, ErrorSpec, contaminate, gen_example1, gen_example3, sample_errors
from .errors import ConfigurationError, DivergenceError, InputShapeError, NumericError
from .estimators import DNNRegressor, IndependentDNNRegressor
from .harness import ExperimentConfig, emit_report, load_csv, prepare_slump, run_experiment
from .losses import LossSpec, empirical_objective, ld_output_delta, ls_loss, ls_output_delta, smoothed_ld
from .metrics import (
    MetricsReport,
    SelectionResult,
    distance_correlation,
    frobenius_norm_diff,
    irrelevant_weight_frobenius,
    model_error_mse,
    mspe,
    pairwise_dcor,
    select_variables,
    selection_counts,
)
from .network import NetworkConfig, forward, init_params, predict_batch
from .penalties import PenaltySpec, adaptive_weights, group_norms, penalty_gradient, penalty_value
from .trainer import (
    FitReport,
    TrainConfig,
    backprop,
    finite_diff_gradient,
    fit,
    fit_independent,
    gradient_audit,
    tune_lambda,
    tune_lambda_cv,
)

__version__ = "0.1.0"
