"""Conditional tail-index regression for heavy-tailed data.

The tail index of ``y`` given covariates ``x`` is modelled as
``alpha(x) = exp(x'beta)``. Above a threshold ``w`` the transform
``-ln(ln(y/w)) - euler_gamma`` is linear in ``x`` with a centred Gumbel error,
so ``beta`` can be estimated by OLS; an exponential-regression MLE, threshold
selection and Monte Carlo tooling are included for comparison.
"""

from .errors import (
    BandwidthTooLarge,
    DegenerateObservation,
    DimensionMismatch,
    DomainError,
    ExperimentFailed,
    GridExhausted,
    InputError,
    InsufficientData,
    NonConvergence,
    NumericalError,
    SingularDesign,
    TailRegError,
    UnsupportedDesign,
)
from .estimators import FitResult, hill_estimator, mle_fit, ols_fit, t_stats
from .misspec import OmittedVarSpec
from .model import (
    EULER_GAMMA,
    GUMBEL_VARIANCE,
    TailSample,
    TailSide,
    add_intercept,
    expected_tail_index,
    tail_index,
    tail_subsample,
    transform_response,
)
from .montecarlo import McConfig, McReport, reproduce_table, run_experiment
from .samplers import DgpSpec, SeedSpec, generate_dataset
from .threshold import ThresholdScan, select_threshold

__version__ = "0.1.0"

__all__ = [
    "BandwidthTooLarge", "DegenerateObservation", "DimensionMismatch", "DomainError",
    "ExperimentFailed", "GridExhausted", "InputError", "InsufficientData", "NonConvergence",
    "NumericalError", "SingularDesign", "TailRegError", "UnsupportedDesign",
    "FitResult", "hill_estimator", "mle_fit", "ols_fit", "t_stats",
    "OmittedVarSpec",
    "EULER_GAMMA", "GUMBEL_VARIANCE", "TailSample", "TailSide", "add_intercept",
    "expected_tail_index", "tail_index", "tail_subsample", "transform_response",
    "McConfig", "McReport", "reproduce_table", "run_experiment",
    "DgpSpec", "SeedSpec", "generate_dataset",
    "ThresholdScan", "select_threshold",
]
