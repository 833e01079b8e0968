"""Checkerboard tail copula estimation with a direct multiplier bootstrap."""

from ._validation import (
    ExtrapolationError,
    InfeasibleTuningError,
    OracleUnavailableError,
    TiesError,
)
from .bootstrap import (
    BootstrapDistribution,
    ConfidenceInterval,
    MultiplierBootstrap,
    MultiplierDraw,
    MultiplierLaw,
    bootstrap_distribution,
    bootstrap_tail_replicate,
    confidence_interval,
    draw_multipliers,
)
from .checkerboard import CheckerboardGrid, LazyCheckerboard, build_grid, checkerboard
from .copula_models import (
    Clayton,
    Comonotone,
    Gaussian,
    Independence,
    StudentT,
    TailOracle,
    make_model,
)
from .empirical import (
    EmpiricalCopula,
    PseudoObservations,
    WeightedEmpiricalCopula,
    empirical_copula,
    pseudo_observations,
)
from .simulation import ExperimentConfig, emit_results, load_config, run_experiment
from .tail import (
    TailCopulaEstimator,
    TailExtrapolationWarning,
    lambda_hat,
    lower_tail_estimate,
    upper_tail_estimate,
)
from .tuning import FiniteSampleWarning, TuningPlan, plan

__version__ = "0.1.0"

__all__ = [
    "BootstrapDistribution",
    "CheckerboardGrid",
    "Clayton",
    "Comonotone",
    "ConfidenceInterval",
    "EmpiricalCopula",
    "ExperimentConfig",
    "ExtrapolationError",
    "FiniteSampleWarning",
    "Gaussian",
    "Independence",
    "InfeasibleTuningError",
    "LazyCheckerboard",
    "MultiplierBootstrap",
    "MultiplierDraw",
    "MultiplierLaw",
    "OracleUnavailableError",
    "PseudoObservations",
    "StudentT",
    "TailCopulaEstimator",
    "TailExtrapolationWarning",
    "TailOracle",
    "TiesError",
    "TuningPlan",
    "WeightedEmpiricalCopula",
    "bootstrap_distribution",
    "bootstrap_tail_replicate",
    "build_grid",
    "checkerboard",
    "confidence_interval",
    "draw_multipliers",
    "emit_results",
    "empirical_copula",
    "lambda_hat",
    "load_config",
    "lower_tail_estimate",
    "make_model",
    "plan",
    "pseudo_observations",
    "run_experiment",
    "upper_tail_estimate",
]
