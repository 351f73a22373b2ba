"""arbohub: arbovirus forecast registry, surveillance datastore, and scoring hub."""

from .epiweek import EpiWeek, epiweek_from_date, epiweek_to_start_date, weeks_in_year
from .models import Account, ModelRecord, PredictionRecord, PredictionRow
from .scoring import (
    GaussianForecast,
    ObservationSeries,
    ScoreReport,
    crps_normal,
    log_score_normal,
    mae,
    mse,
    score_prediction,
    sigma_from_interval,
)
from .validation import (
    DomainConfig,
    FieldError,
    ValidationErrors,
    precheck_prediction,
    validate_model_meta,
    validate_prediction,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Account",
    "DomainConfig",
    "EpiWeek",
    "FieldError",
    "GaussianForecast",
    "ModelRecord",
    "ObservationSeries",
    "PredictionRecord",
    "PredictionRow",
    "ScoreReport",
    "ValidationErrors",
    "crps_normal",
    "epiweek_from_date",
    "epiweek_to_start_date",
    "log_score_normal",
    "mae",
    "mse",
    "precheck_prediction",
    "score_prediction",
    "sigma_from_interval",
    "validate_model_meta",
    "validate_prediction",
    "weeks_in_year",
]
