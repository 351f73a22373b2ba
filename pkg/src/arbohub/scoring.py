"""Proper scoring rules and point metrics for Gaussian interval forecasts.

A forecast row carries a median ``pred`` and a 95% interval (lower, upper).
The predictive distribution is taken to be Normal(mu, sigma) with
mu = pred and sigma = (upper - lower) / 4, and is scored against the
observed count with the closed-form Gaussian CRPS and log score, plus the
point metrics MAE and MSE. CRPS/MAE/MSE are lower-is-better; the log score
is the log predictive density and is higher-is-better.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as Date
from typing import Iterable, Sequence

from .models import PredictionRecord

__all__ = [
    "METRICS",
    "ORIENTATION",
    "GaussianForecast",
    "Observation",
    "ObservationSeries",
    "ScoreReport",
    "RowDiagnostic",
    "sigma_from_interval",
    "crps_normal",
    "log_score_normal",
    "mae",
    "mse",
    "score_prediction",
    "ScoringError",
    "DegenerateInterval",
    "InvalidNumber",
    "InvalidScale",
    "EmptyInput",
    "LengthMismatch",
    "NoOverlap",
]

METRICS = ("crps", "log_score", "mae", "mse")

# Which direction is better, attached to every report so that consumers
# rank models correctly instead of hard-coding a sort direction.
ORIENTATION = {
    "crps": "lower",
    "log_score": "higher",
    "mae": "lower",
    "mse": "lower",
}

_SQRT_2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


class ScoringError(Exception):
    pass


class DegenerateInterval(ScoringError):
    pass


class InvalidNumber(ScoringError):
    pass


class InvalidScale(ScoringError):
    pass


class EmptyInput(ScoringError):
    pass


class LengthMismatch(ScoringError):
    pass


class NoOverlap(ScoringError):
    """No prediction row matched any observation."""


def _std_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT_2PI


def _std_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / _SQRT_2))


def sigma_from_interval(lower: float, upper: float) -> float:
    """Gaussian scale implied by a 95% interval: (upper - lower) / 4."""
    for name, value in (("lower", lower), ("upper", upper)):
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise InvalidNumber(f"{name} must be a finite number, got {value!r}")
    if upper <= lower:
        raise DegenerateInterval(f"upper ({upper}) must exceed lower ({lower})")
    return (upper - lower) / 4.0


def _check_scale(sigma: float) -> None:
    if not isinstance(sigma, (int, float)) or isinstance(sigma, bool) or not math.isfinite(sigma) or sigma <= 0:
        raise InvalidScale(f"sigma must be a positive finite number, got {sigma!r}")


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise InvalidNumber(f"{name} must be a finite number, got {value!r}")


def crps_normal(mu: float, sigma: float, y: float) -> float:
    """Closed-form CRPS of Normal(mu, sigma) against observation y.

        CRPS = sigma * ( w * (2 * Phi(w) - 1) + 2 * phi(w) - 1 / sqrt(pi) )

    with w = (y - mu) / sigma. Nonnegative for all finite inputs, and
    converges to |y - mu| as sigma -> 0.
    """
    _check_finite(mu=mu, y=y)
    _check_scale(sigma)
    w = (y - mu) / sigma
    return sigma * (w * (2.0 * _std_cdf(w) - 1.0) + 2.0 * _std_pdf(w) - _INV_SQRT_PI)


def log_score_normal(mu: float, sigma: float, y: float) -> float:
    """Log predictive density of Normal(mu, sigma) at y: log(phi(w) / sigma).

    Evaluated in log space so extreme standardized errors do not underflow.
    Higher is better.
    """
    _check_finite(mu=mu, y=y)
    _check_scale(sigma)
    w = (y - mu) / sigma
    return -0.5 * w * w - math.log(sigma) - 0.5 * math.log(2.0 * math.pi)


def _check_pair(pred: Sequence[float], obs: Sequence[float]) -> None:
    if len(pred) != len(obs):
        raise LengthMismatch(f"got {len(pred)} predictions and {len(obs)} observations")
    if not pred:
        raise EmptyInput("cannot aggregate over zero pairs")


def mae(pred: Sequence[float], obs: Sequence[float]) -> float:
    """Mean absolute error over paired values."""
    _check_pair(pred, obs)
    return sum(abs(p - y) for p, y in zip(pred, obs)) / len(pred)


def mse(pred: Sequence[float], obs: Sequence[float]) -> float:
    """Mean squared error over paired values."""
    _check_pair(pred, obs)
    return sum((p - y) ** 2 for p, y in zip(pred, obs)) / len(pred)


@dataclass(frozen=True)
class GaussianForecast:
    """Normal predictive distribution with mu from pred, sigma from the interval."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        _check_finite(mu=self.mu)
        _check_scale(self.sigma)

    @classmethod
    def from_interval(cls, pred: float, lower: float, upper: float) -> "GaussianForecast":
        return cls(mu=pred, sigma=sigma_from_interval(lower, upper))

    def crps(self, y: float) -> float:
        return crps_normal(self.mu, self.sigma, y)

    def log_score(self, y: float) -> float:
        return log_score_normal(self.mu, self.sigma, y)


@dataclass(frozen=True)
class Observation:
    date: Date
    adm_key: str | int
    value: float


@dataclass(frozen=True)
class ObservationSeries:
    """Observed counts keyed by (date, adm key); the ground truth for scoring."""

    observations: tuple[Observation, ...]

    def __post_init__(self) -> None:
        seen = set()
        for obs in self.observations:
            key = (obs.date, obs.adm_key)
            if key in seen:
                raise ValueError(f"duplicate observation for {key}")
            seen.add(key)
            if obs.value < 0:
                raise ValueError(f"observed count for {key} is negative")

    @classmethod
    def from_tuples(cls, tuples: Iterable[tuple]) -> "ObservationSeries":
        return cls(tuple(Observation(d, k, float(v)) for d, k, v in tuples))

    def __len__(self) -> int:
        return len(self.observations)

    def lookup(self) -> dict[tuple, float]:
        return {(o.date, o.adm_key): o.value for o in self.observations}


@dataclass(frozen=True)
class RowDiagnostic:
    row: int
    date: Date
    reason: str

    def to_wire(self) -> dict:
        return {"row": self.row, "date": self.date.isoformat(), "reason": self.reason}


@dataclass(frozen=True)
class ScoreReport:
    """Per-prediction evaluation: mean metric values over the matched rows."""

    prediction_id: int | None
    scores: dict[str, float]
    n_matched: int
    n_unmatched: int
    first_matched: Date
    last_matched: Date
    diagnostics: tuple[RowDiagnostic, ...] = ()

    def to_wire(self, metric: str | None = None) -> dict:
        if metric is not None and metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        names = METRICS if metric is None else (metric,)
        return {
            "prediction_id": self.prediction_id,
            "scores": {name: self.scores[name] for name in names},
            "orientation": {name: ORIENTATION[name] for name in names},
            "n_matched": self.n_matched,
            "n_unmatched": self.n_unmatched,
            "date_range": {
                "start": self.first_matched.isoformat(),
                "end": self.last_matched.isoformat(),
            },
            "diagnostics": [d.to_wire() for d in self.diagnostics],
        }


def score_prediction(
    prediction: PredictionRecord, observations: ObservationSeries
) -> ScoreReport:
    """Join prediction rows to observations and aggregate all four metrics.

    Rows join on (date, adm key at the prediction's adm level). Unmatched
    rows and rows with a zero-width interval are excluded and counted in
    n_unmatched with a per-row diagnostic; aggregates are unweighted means
    over the matched rows in row order. Raises NoOverlap when nothing
    matches.
    """
    observed = observations.lookup()
    preds: list[float] = []
    actuals: list[float] = []
    crps_total = 0.0
    log_total = 0.0
    matched_dates: list[Date] = []
    diagnostics: list[RowDiagnostic] = []

    for idx, row in enumerate(prediction.rows):
        key = (row.date, row.adm_key(prediction.adm_level))
        if key not in observed:
            diagnostics.append(RowDiagnostic(idx, row.date, "no matching observation"))
            continue
        try:
            forecast = GaussianForecast.from_interval(row.pred, row.lower, row.upper)
        except DegenerateInterval:
            diagnostics.append(
                RowDiagnostic(idx, row.date, "degenerate interval (upper == lower)")
            )
            continue
        y = observed[key]
        crps_total += forecast.crps(y)
        log_total += forecast.log_score(y)
        preds.append(row.pred)
        actuals.append(y)
        matched_dates.append(row.date)

    if not matched_dates:
        raise NoOverlap(
            f"none of the {len(prediction.rows)} rows matched an observation"
        )

    n = len(matched_dates)
    scores = {
        "crps": crps_total / n,
        "log_score": log_total / n,
        "mae": mae(preds, actuals),
        "mse": mse(preds, actuals),
    }
    return ScoreReport(
        prediction_id=prediction.id,
        scores=scores,
        n_matched=n,
        n_unmatched=len(diagnostics),
        first_matched=min(matched_dates),
        last_matched=max(matched_dates),
        diagnostics=tuple(diagnostics),
    )
