"""Field-level validation for model metadata and prediction uploads.

Validators never partially accept: either a fully typed record comes back
or a ValidationErrors exception carrying every failing field (row-indexed
for prediction rows) is raised.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from datetime import date
from typing import Any, Mapping
from urllib.parse import urlsplit

from .models import (
    ADM_LEVELS,
    DISEASES,
    IMPLEMENTATION_LANGUAGES,
    STATE_CODE_BY_UF,
    TIME_RESOLUTIONS,
    UF_BY_STATE_CODE,
    ModelRecord,
    PredictionRecord,
    PredictionRow,
)

_COMMIT_RE = re.compile(r"^[0-9a-fA-F]{40}$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_LANGUAGE_BY_LOWER = {lang.lower(): lang for lang in IMPLEMENTATION_LANGUAGES}


@dataclass(frozen=True)
class FieldError:
    field: str
    reason: str
    row: int | None = None

    def to_wire(self) -> dict:
        out = {"field": self.field, "reason": self.reason}
        if self.row is not None:
            out["row"] = self.row
        return out


class ValidationErrors(Exception):
    """A candidate document failed validation; lists every failing field."""

    def __init__(self, errors: list[FieldError]):
        self.errors = list(errors)
        summary = "; ".join(
            f"{e.field}{f'[row {e.row}]' if e.row is not None else ''}: {e.reason}"
            for e in self.errors
        )
        super().__init__(summary or "validation failed")


@dataclass(frozen=True)
class DomainConfig:
    """Tunable validation limits (paper leaves these open)."""

    repository_hosts: tuple[str, ...] = ("github.com", "gitlab.com")
    max_prediction_rows: int = 10_000


DEFAULT_CONFIG = DomainConfig()


def parse_wire_date(value: Any) -> date:
    """Parse the wire date format, YYYY-mm-dd exactly."""
    if isinstance(value, date):
        return value
    if not isinstance(value, str) or not _DATE_RE.match(value):
        raise ValueError("must be a date in YYYY-mm-dd format")
    return date.fromisoformat(value)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def normalize_uf(value: Any) -> str:
    """Accept a two-letter UF or a two-digit state geocode; return the UF."""
    if isinstance(value, str):
        text = value.strip()
        if text.upper() in STATE_CODE_BY_UF:
            return text.upper()
        if text.isdigit():
            value = int(text)
        else:
            raise ValueError(f"unknown UF {value!r}")
    if _is_number(value) and int(value) in UF_BY_STATE_CODE:
        return UF_BY_STATE_CODE[int(value)]
    raise ValueError(f"unknown UF or state geocode {value!r}")


def _require(candidate: Mapping, field: str, errors: list[FieldError]) -> Any:
    value = candidate.get(field)
    if value is None:
        errors.append(FieldError(field, "missing required field"))
    return value


def validate_model_meta(
    candidate: Mapping[str, Any], config: DomainConfig = DEFAULT_CONFIG
) -> ModelRecord:
    """Validate raw model metadata; return a typed record or raise ValidationErrors."""
    errors: list[FieldError] = []

    name = _require(candidate, "name", errors)
    if name is not None:
        if not isinstance(name, str) or not name.strip():
            errors.append(FieldError("name", "must be a nonempty string"))
        elif len(name) > 100:
            errors.append(FieldError("name", "must be at most 100 characters"))

    description = candidate.get("description") or ""
    if not isinstance(description, str):
        errors.append(FieldError("description", "must be a string"))
        description = ""

    repository = _require(candidate, "repository", errors)
    if repository is not None:
        reason = _check_repository(repository, config.repository_hosts)
        if reason:
            errors.append(FieldError("repository", reason))

    language = _require(candidate, "implementation_language", errors)
    if language is not None:
        canonical = (
            _LANGUAGE_BY_LOWER.get(language.strip().lower())
            if isinstance(language, str)
            else None
        )
        if canonical is None:
            errors.append(
                FieldError(
                    "implementation_language",
                    f"must be one of {', '.join(IMPLEMENTATION_LANGUAGES)}",
                )
            )
        else:
            language = canonical

    disease = _require(candidate, "disease", errors)
    if disease is not None:
        if isinstance(disease, str) and disease.strip().lower() in DISEASES:
            disease = disease.strip().lower()
        else:
            errors.append(
                FieldError("disease", f"must be one of {', '.join(DISEASES)}")
            )

    flags = {}
    for field in ("temporal", "spatial", "categorical"):
        value = _require(candidate, field, errors)
        if value is not None:
            if isinstance(value, bool):
                flags[field] = value
            else:
                errors.append(FieldError(field, "must be a boolean"))

    sprint = candidate.get("sprint")
    if sprint is None:
        sprint = False
    elif not isinstance(sprint, bool):
        errors.append(FieldError("sprint", "must be a boolean"))

    adm_level = _require(candidate, "adm_level", errors)
    if adm_level is not None and (
        not _is_number(adm_level) or int(adm_level) != adm_level or int(adm_level) not in ADM_LEVELS
    ):
        errors.append(FieldError("adm_level", "must be one of 0, 1, 2, 3"))

    time_resolution = _require(candidate, "time_resolution", errors)
    if time_resolution is not None:
        if isinstance(time_resolution, str) and time_resolution.strip().lower() in TIME_RESOLUTIONS:
            time_resolution = time_resolution.strip().lower()
        else:
            errors.append(
                FieldError(
                    "time_resolution", f"must be one of {', '.join(TIME_RESOLUTIONS)}"
                )
            )

    if errors:
        raise ValidationErrors(errors)
    return ModelRecord(
        name=name.strip(),
        description=description,
        repository=repository,
        implementation_language=language,
        disease=disease,
        temporal=flags["temporal"],
        spatial=flags["spatial"],
        categorical=flags["categorical"],
        adm_level=int(adm_level),
        time_resolution=time_resolution,
        sprint=sprint,
    )


def _check_repository(repository: Any, allowed_hosts: tuple[str, ...]) -> str | None:
    if not isinstance(repository, str):
        return "must be a URL string"
    parts = urlsplit(repository)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        return "must be an absolute http(s) URL"
    host = (parts.hostname or "").lower()
    if host not in tuple(h.lower() for h in allowed_hosts):
        return f"host must be one of {', '.join(allowed_hosts)}"
    return None


# ---------------------------------------------------------------------------
# Prediction uploads
# ---------------------------------------------------------------------------


def _parse_adm_field(level: int, value: Any) -> str | int:
    """Normalize one adm_N value or raise ValueError with the reason."""
    if level == 0:
        if isinstance(value, str) and re.match(r"^[A-Za-z]{2}$", value.strip()):
            return value.strip().upper()
        raise ValueError("must be a 2-letter country code")
    if level == 1:
        return normalize_uf(value)
    if level == 2:
        if isinstance(value, str) and value.strip().isdigit():
            value = int(value.strip())
        if _is_number(value) and int(value) == value and 1_000_000 <= int(value) <= 9_999_999:
            return int(value)
        raise ValueError("must be a 7-digit municipality geocode")
    if isinstance(value, str) and value.strip().isdigit():
        value = int(value.strip())
    if _is_number(value) and int(value) == value:
        return int(value)
    raise ValueError("must be an integer geocode")


def _parse_row(raw: Any, idx: int, errors: list[FieldError]) -> PredictionRow | None:
    """Model-independent checks for one prediction row."""
    if not isinstance(raw, Mapping):
        errors.append(FieldError("prediction", "row must be an object", row=idx))
        return None

    n_before = len(errors)

    row_date = raw.get("date")
    if row_date is None:
        errors.append(FieldError("date", "must not be null", row=idx))
    else:
        try:
            row_date = parse_wire_date(row_date)
        except ValueError as exc:
            errors.append(FieldError("date", str(exc), row=idx))

    values = {}
    for field in ("pred", "lower", "upper"):
        value = raw.get(field)
        if value is None:
            errors.append(FieldError(field, "must not be null", row=idx))
        elif not _is_number(value) or not math.isfinite(value):
            errors.append(FieldError(field, "must be a finite number", row=idx))
        else:
            values[field] = float(value)

    if len(values) == 3:
        if not (values["lower"] <= values["pred"] <= values["upper"]):
            errors.append(
                FieldError(
                    "pred",
                    f"interval ordering violated: lower <= pred <= upper required, "
                    f"got ({values['lower']}, {values['pred']}, {values['upper']})",
                    row=idx,
                )
            )

    adm: dict[str, str | int | None] = {}
    for level in ADM_LEVELS:
        field = f"adm_{level}"
        value = raw.get(field)
        if value is None:
            adm[field] = None
            continue
        try:
            adm[field] = _parse_adm_field(level, value)
        except ValueError as exc:
            errors.append(FieldError(field, str(exc), row=idx))
            adm[field] = None

    if len(errors) > n_before:
        return None
    return PredictionRow(
        date=row_date,
        pred=values["pred"],
        lower=values["lower"],
        upper=values["upper"],
        adm_0=adm["adm_0"],
        adm_1=adm["adm_1"],
        adm_2=adm["adm_2"],
        adm_3=adm["adm_3"],
    )


def _check_header(candidate: Mapping, config: DomainConfig) -> tuple[dict, list[FieldError]]:
    errors: list[FieldError] = []

    commit = _require(candidate, "commit", errors)
    if commit is not None:
        if isinstance(commit, str) and _COMMIT_RE.match(commit):
            commit = commit.lower()
        else:
            errors.append(
                FieldError("commit", "must be exactly 40 hexadecimal characters")
            )

    predict_date = _require(candidate, "predict_date", errors)
    if predict_date is not None:
        try:
            predict_date = parse_wire_date(predict_date)
        except ValueError as exc:
            errors.append(FieldError("predict_date", str(exc)))

    description = candidate.get("description") or ""
    if not isinstance(description, str):
        errors.append(FieldError("description", "must be a string"))
        description = ""

    rows = candidate.get("prediction")
    if rows is None:
        errors.append(FieldError("prediction", "missing required field"))
    elif not isinstance(rows, (list, tuple)):
        errors.append(FieldError("prediction", "must be an array of row objects"))
        rows = None
    elif not rows:
        errors.append(FieldError("prediction", "must contain at least one row"))
        rows = None
    elif len(rows) > config.max_prediction_rows:
        errors.append(
            FieldError(
                "prediction",
                f"row count {len(rows)} exceeds the maximum of {config.max_prediction_rows}",
            )
        )
        rows = None

    header = {
        "commit": commit,
        "predict_date": predict_date,
        "description": description,
        "rows": rows,
    }
    return header, errors


def precheck_prediction(
    candidate: Mapping[str, Any], config: DomainConfig = DEFAULT_CONFIG
) -> list[FieldError]:
    """Model-independent subset of prediction validation.

    Lets a client reject malformed uploads before any network call; the
    adm-level requirement and key uniqueness still need the registered
    model and are enforced by validate_prediction.
    """
    header, errors = _check_header(candidate, config)
    if header["rows"] is not None:
        for idx, raw in enumerate(header["rows"]):
            _parse_row(raw, idx, errors)
    return errors


def validate_prediction(
    candidate: Mapping[str, Any],
    model: ModelRecord,
    config: DomainConfig = DEFAULT_CONFIG,
    strict_spacing: bool = False,
) -> PredictionRecord:
    """Validate a prediction upload against its registered model.

    Enforces every row invariant plus the adm rule: the adm field matching
    ``model.adm_level`` must be present and non-null in every row, and
    (date, adm key) pairs must be unique within the upload. Returns the
    typed record or raises ValidationErrors carrying all field- and
    row-level failures.

    With ``strict_spacing`` the rows of a weekly model are additionally
    checked for 7-day spacing per adm unit; violations are warnings, not
    errors.
    """
    header, errors = _check_header(candidate, config)

    if candidate.get("model") is not None and candidate["model"] != model.id:
        errors.append(
            FieldError("model", f"does not reference model id {model.id}")
        )

    rows: list[PredictionRow] = []
    adm_field = f"adm_{model.adm_level}"
    seen: dict[tuple, int] = {}
    if header["rows"] is not None:
        for idx, raw in enumerate(header["rows"]):
            row = _parse_row(raw, idx, errors)
            if row is None:
                continue
            key = row.adm_key(model.adm_level)
            if key is None:
                errors.append(
                    FieldError(
                        adm_field,
                        f"{adm_field} is required for an adm_level {model.adm_level} model",
                        row=idx,
                    )
                )
                continue
            dup = seen.get((row.date, key))
            if dup is not None:
                errors.append(
                    FieldError(
                        "date",
                        f"duplicate (date, {adm_field}) pair also present at row {dup}",
                        row=idx,
                    )
                )
                continue
            seen[(row.date, key)] = idx
            rows.append(row)

    if errors:
        raise ValidationErrors(errors)

    record = PredictionRecord(
        model=model.id if model.id is not None else candidate.get("model"),
        description=header["description"],
        commit=header["commit"],
        predict_date=header["predict_date"],
        rows=tuple(rows),
        adm_level=model.adm_level,
    )
    if strict_spacing and model.time_resolution == "week":
        for message in weekly_spacing_warnings(record):
            warnings.warn(message, stacklevel=2)
    return record


def weekly_spacing_warnings(record: PredictionRecord) -> list[str]:
    """Rows of a weekly model that are not 7 days apart, per adm unit."""
    by_key: dict[Any, list] = {}
    for row in record.rows:
        by_key.setdefault(row.adm_key(record.adm_level), []).append(row.date)
    messages = []
    for key, dates in by_key.items():
        dates.sort()
        for a, b in zip(dates, dates[1:]):
            if (b - a).days != 7:
                messages.append(
                    f"rows for {key} dated {a} and {b} are {(b - a).days} days apart"
                )
    return messages
