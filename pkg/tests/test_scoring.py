import math
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arbohub.models import PredictionRecord, PredictionRow
from arbohub.scoring import (
    METRICS,
    ORIENTATION,
    DegenerateInterval,
    EmptyInput,
    GaussianForecast,
    InvalidNumber,
    InvalidScale,
    LengthMismatch,
    NoOverlap,
    ObservationSeries,
    crps_normal,
    log_score_normal,
    mae,
    mse,
    score_prediction,
    sigma_from_interval,
)

from oracles import crps_quad

# Frozen expected values. The CRPS ones were computed with the
# adaptive-quadrature oracle (crps_quad, epsabs 1e-10); the log-score ones
# are the analytic log-density identities -log(sigma*sqrt(2*pi)) - w^2/2.
CRPS_AT_CENTER = 0.2336949772551091  # crps_quad(0, 1, 0)
CRPS_ONE_SIGMA_OFF = 0.6024413576276163  # crps_quad(0, 1, 1)
LOG_SCORE_AT_CENTER = -0.9189385332046727  # -0.5 * log(2 * pi)
LOG_SCORE_ONE_SIGMA_OFF = -1.4189385332046727
LOG_SCORE_AT_CENTER_SIGMA_2 = -1.6120857137646178  # previous minus log(2)


def test_sigma_from_interval():
    assert sigma_from_interval(2, 10) == 2.0
    assert sigma_from_interval(0, 4) == 1.0
    with pytest.raises(DegenerateInterval):
        sigma_from_interval(5, 5)
    with pytest.raises(DegenerateInterval):
        sigma_from_interval(7, 3)
    with pytest.raises(InvalidNumber):
        sigma_from_interval(0, math.inf)
    with pytest.raises(InvalidNumber):
        sigma_from_interval(math.nan, 1)


def test_crps_frozen_values():
    assert crps_normal(0, 1, 0) == pytest.approx(CRPS_AT_CENTER, abs=1e-8)
    assert crps_normal(0, 1, 1) == pytest.approx(CRPS_ONE_SIGMA_OFF, abs=1e-8)
    # translation invariance reduces the shifted case to the first one
    assert crps_normal(5, 1, 5) == pytest.approx(CRPS_AT_CENTER, abs=1e-8)


def test_crps_matches_quadrature_spot_checks():
    for mu, sigma, y in [(0, 1, 0), (0, 1, 1), (2, 0.5, 3), (-3, 10, 4), (1, 0.1, 1.05)]:
        assert crps_normal(mu, sigma, y) == pytest.approx(
            crps_quad(mu, sigma, y), abs=1e-8
        )


def test_crps_rejects_bad_scale():
    with pytest.raises(InvalidScale):
        crps_normal(0, 0, 0)
    with pytest.raises(InvalidScale):
        crps_normal(0, -1, 0)


def test_log_score_frozen_values():
    assert log_score_normal(0, 1, 0) == pytest.approx(LOG_SCORE_AT_CENTER, abs=1e-12)
    assert log_score_normal(0, 1, 1) == pytest.approx(LOG_SCORE_ONE_SIGMA_OFF, abs=1e-12)
    assert log_score_normal(0, 2, 0) == pytest.approx(LOG_SCORE_AT_CENTER_SIGMA_2, abs=1e-12)
    with pytest.raises(InvalidScale):
        log_score_normal(0, 0, 0)


def test_log_score_survives_extreme_standardized_errors():
    # naive log(pdf/sigma) would underflow long before w = 1e8
    value = log_score_normal(0.0, 1e-9, 100.0)
    assert math.isfinite(value)
    assert value == pytest.approx(-0.5 * (1e11) ** 2 - math.log(1e-9) - 0.5 * math.log(2 * math.pi))


def test_log_score_maximized_at_the_median():
    mu, sigma = 3.0, 1.7
    peak = log_score_normal(mu, sigma, mu)
    assert peak == pytest.approx(-math.log(sigma * math.sqrt(2 * math.pi)), abs=1e-12)
    for y in np.linspace(mu - 8, mu + 8, 81):
        assert log_score_normal(mu, sigma, float(y)) <= peak + 1e-12


finite_mu = st.floats(min_value=-100, max_value=100)
finite_y = st.floats(min_value=-100, max_value=100)
finite_sigma = st.floats(min_value=0.01, max_value=100)


@given(finite_mu, finite_sigma, finite_y)
def test_crps_nonnegative(mu, sigma, y):
    assert crps_normal(mu, sigma, y) >= 0.0


@given(finite_mu, finite_sigma, finite_y, st.floats(min_value=-100, max_value=100))
def test_crps_translation_equivariance(mu, sigma, y, c):
    assert crps_normal(mu + c, sigma, y + c) == pytest.approx(
        crps_normal(mu, sigma, y), abs=1e-12
    )


@given(
    st.floats(min_value=-10, max_value=10),
    st.floats(min_value=0.1, max_value=10),
    st.floats(min_value=-10, max_value=10),
    st.floats(min_value=0.1, max_value=10),
)
def test_crps_positive_scale_equivariance(mu, sigma, y, c):
    assert crps_normal(c * mu, c * sigma, c * y) == pytest.approx(
        c * crps_normal(mu, sigma, y), abs=1e-12
    )


@given(st.floats(min_value=0.1, max_value=100), st.booleans())
def test_crps_point_forecast_limit(gap, flip):
    mu = 10.0
    y = mu + (gap if not flip else -gap)
    assert abs(crps_normal(mu, 1e-9, y) - abs(y - mu)) < 1e-6


def test_mae_mse_examples():
    assert mae([1, 2, 3], [1, 2, 3]) == 0.0
    assert mse([1, 2, 3], [1, 2, 3]) == 0.0
    assert mae([0, 0], [1, 3]) == 2.0
    assert mse([0, 0], [1, 3]) == 5.0


def test_mae_mse_errors():
    with pytest.raises(EmptyInput):
        mae([], [])
    with pytest.raises(EmptyInput):
        mse([], [])
    with pytest.raises(LengthMismatch):
        mae([1], [1, 2])
    with pytest.raises(LengthMismatch):
        mse([1, 2, 3], [1])


@given(st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=1, max_size=30))
def test_mae_mse_zero_iff_equal(values):
    assert mae(values, values) == 0.0
    assert mse(values, values) == 0.0
    shifted = [v + 1.0 for v in values]
    assert mae(values, shifted) > 0.0
    assert mse(values, shifted) > 0.0


def test_gaussian_forecast_from_interval():
    forecast = GaussianForecast.from_interval(pred=10.0, lower=8.0, upper=16.0)
    assert forecast.mu == 10.0
    assert forecast.sigma == 2.0
    with pytest.raises(InvalidScale):
        GaussianForecast(mu=0.0, sigma=0.0)


# -- score_prediction ---------------------------------------------------------


def _weekly_prediction(values, first=date(2023, 1, 1), width=4.0, adm_1="MG"):
    rows = tuple(
        PredictionRow(
            date=first + timedelta(weeks=i),
            pred=float(v),
            lower=float(v) - width / 2,
            upper=float(v) + width / 2,
            adm_1=adm_1,
        )
        for i, v in enumerate(values)
    )
    return PredictionRecord(
        model=1,
        description="",
        commit="a" * 40,
        predict_date=first,
        rows=rows,
        adm_level=1,
        id=7,
    )


def _series_for(prediction, values):
    return ObservationSeries.from_tuples(
        (row.date, row.adm_1, float(v)) for row, v in zip(prediction.rows, values)
    )


def test_perfect_forecast_with_width_four_intervals():
    prediction = _weekly_prediction([10, 20, 30])
    observed = _series_for(prediction, [10, 20, 30])
    report = score_prediction(prediction, observed)
    assert report.scores["mae"] == 0.0
    assert report.scores["mse"] == 0.0
    assert report.scores["crps"] == pytest.approx(CRPS_AT_CENTER, abs=1e-7)
    assert report.scores["log_score"] == pytest.approx(LOG_SCORE_AT_CENTER, abs=1e-7)
    assert report.n_matched == 3
    assert report.n_unmatched == 0
    assert report.first_matched == prediction.rows[0].date
    assert report.last_matched == prediction.rows[-1].date


def test_disjoint_observations_raise_no_overlap():
    prediction = _weekly_prediction([10, 20, 30])
    elsewhere = ObservationSeries.from_tuples(
        [(date(1999, 1, 3), "MG", 5.0), (date(1999, 1, 10), "MG", 6.0)]
    )
    with pytest.raises(NoOverlap):
        score_prediction(prediction, elsewhere)


def test_partial_match_counts_unmatched_rows():
    prediction = _weekly_prediction([10, 20, 30])
    observed = ObservationSeries.from_tuples(
        [(prediction.rows[0].date, "MG", 10.0), (prediction.rows[1].date, "MG", 25.0)]
    )
    report = score_prediction(prediction, observed)
    assert report.n_matched == 2
    assert report.n_unmatched == 1
    assert report.diagnostics[0].row == 2
    assert "no matching observation" in report.diagnostics[0].reason
    assert report.scores["mae"] == pytest.approx(2.5)
    assert report.scores["mse"] == pytest.approx(12.5)


def test_degenerate_interval_rows_are_skipped_not_fatal():
    prediction = _weekly_prediction([10, 20, 30])
    flat = PredictionRow(
        date=prediction.rows[1].date, pred=20.0, lower=20.0, upper=20.0, adm_1="MG"
    )
    prediction = PredictionRecord(
        model=1,
        description="",
        commit="a" * 40,
        predict_date=date(2023, 1, 1),
        rows=(prediction.rows[0], flat, prediction.rows[2]),
        adm_level=1,
        id=7,
    )
    observed = _series_for(prediction, [10, 20, 30])
    report = score_prediction(prediction, observed)
    assert report.n_matched == 2
    assert report.n_unmatched == 1
    assert "degenerate interval" in report.diagnostics[0].reason


def test_join_respects_adm_keys_not_just_dates():
    prediction = _weekly_prediction([10, 20, 30], adm_1="MG")
    wrong_state = ObservationSeries.from_tuples(
        (row.date, "SP", 10.0) for row in prediction.rows
    )
    with pytest.raises(NoOverlap):
        score_prediction(prediction, wrong_state)


def test_observation_series_rejects_duplicates_and_negatives():
    with pytest.raises(ValueError):
        ObservationSeries.from_tuples(
            [(date(2023, 1, 1), "MG", 1.0), (date(2023, 1, 1), "MG", 2.0)]
        )
    with pytest.raises(ValueError):
        ObservationSeries.from_tuples([(date(2023, 1, 1), "MG", -1.0)])


def test_report_serialization_and_metric_restriction():
    prediction = _weekly_prediction([10, 20])
    report = score_prediction(prediction, _series_for(prediction, [11, 19]))
    wire = report.to_wire()
    assert set(wire["scores"]) == set(METRICS)
    assert wire["orientation"] == ORIENTATION
    assert wire["prediction_id"] == 7
    only_mae = report.to_wire("mae")
    assert set(only_mae["scores"]) == {"mae"}
    assert only_mae["orientation"] == {"mae": "lower"}
    with pytest.raises(ValueError):
        report.to_wire("wis")


def test_orientation_lists_log_score_as_higher_better():
    assert ORIENTATION["log_score"] == "higher"
    assert ORIENTATION["crps"] == ORIENTATION["mae"] == ORIENTATION["mse"] == "lower"
