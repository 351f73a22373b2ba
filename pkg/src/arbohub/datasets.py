"""Ingestion, filtered querying, and pagination of the observed datasets.

Four dataset kinds are served: infodengue (weekly case counts), climate
(daily municipal series), episcanner (per-epidemic fitted parameters), and
ovitrap (egg-count collections). Each kind has a fixed CSV dictionary, a
natural key for upserts, and row-level invariants; ingestion validates
every row and is atomic per file.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, IO, Mapping

from .db import Database
from .epiweek import EpiWeek, epiweek_to_start_date
from .models import DISEASES, STATE_CODE_BY_UF
from .scoring import ObservationSeries
from .validation import FieldError, ValidationErrors, normalize_uf, parse_wire_date

DATASET_KINDS = ("infodengue", "climate", "episcanner", "ovitrap")

GROUND_TRUTH_COLUMNS = ("casos", "casos_est")


class IngestError(Exception):
    """Whole-file ingestion failure."""


class UnknownDatasetKind(IngestError):
    pass


class MissingColumns(IngestError):
    def __init__(self, kind: str, missing: list[str]):
        self.missing = missing
        super().__init__(f"{kind} file is missing required columns: {', '.join(missing)}")


class UnknownAdmKey(Exception):
    """The requested administrative unit does not identify anything."""


# (name, cell type, required) per kind, in canonical column order.
_COLUMNS: dict[str, tuple[tuple[str, str, bool], ...]] = {
    "infodengue": (
        ("disease", "text", True),
        ("municipio_geocodigo", "int", True),
        ("SE", "epiweek", True),
        ("data_iniSE", "date", True),
        ("casos", "int", True),
        ("casos_est", "real", True),
        ("casos_prov", "int", False),
        ("p_rt1", "real", True),
        ("p_inc100k", "real", True),
        ("nivel", "int", True),
        ("versao_modelo", "text", False),
        ("Rt", "real", True),
        ("municipio_nome", "text", False),
        ("pop", "int", True),
        ("receptivo", "int", True),
        ("transmissao", "int", True),
        ("nivel_inc", "int", True),
    ),
    "climate": (
        ("geocodigo", "int", True),
        ("date", "date", True),
        ("temp_min", "real", True),
        ("temp_med", "real", True),
        ("temp_max", "real", True),
        ("precip_min", "real", True),
        ("precip_med", "real", True),
        ("precip_max", "real", True),
        ("precip_tot", "real", True),
        ("pressao_min", "real", True),
        ("pressao_med", "real", True),
        ("pressao_max", "real", True),
        ("umid_min", "real", True),
        ("umid_med", "real", True),
        ("umid_max", "real", True),
    ),
    "episcanner": (
        ("disease", "text", True),
        ("geocode", "int", True),
        ("year", "int", True),
        ("CID10", "text", False),
        ("muni_name", "text", False),
        ("peak_week", "real", False),
        ("beta", "real", False),
        ("gamma", "real", False),
        ("R0", "real", True),
        ("total_cases", "int", True),
        ("alpha", "real", False),
        ("sum_res", "real", False),
        ("ep_ini", "epiweek_text", True),
        ("ep_end", "epiweek_text", True),
        ("ep_dur", "int", True),
    ),
    "ovitrap": (
        ("trap_id", "text", True),
        ("collection_date", "date", True),
        ("latitude", "real", True),
        ("longitude", "real", True),
        ("install_date", "date", True),
        ("epi_week", "epiweek", True),
        ("year", "int", False),
        ("egg_count", "int", True),
        ("status", "text", True),
        ("geocode", "int", True),
    ),
}

_NATURAL_KEY = {
    "infodengue": ("disease", "municipio_geocodigo", "SE"),
    "climate": ("geocodigo", "date"),
    "episcanner": ("disease", "geocode", "year"),
    "ovitrap": ("trap_id", "collection_date"),
}

_DATE_FILTER_COLUMN = {
    "infodengue": "data_iniSE",
    "climate": "date",
    "episcanner": "year",  # start/end match on calendar year
    "ovitrap": "collection_date",
}

_GEOCODE_COLUMN = {
    "infodengue": "municipio_geocodigo",
    "climate": "geocodigo",
    "episcanner": "geocode",
    "ovitrap": "geocode",
}

_ALLOWED_FILTERS = {
    "infodengue": ("disease", "geocode", "uf", "start", "end"),
    "climate": ("geocode", "uf", "start", "end"),
    "episcanner": ("disease", "geocode", "uf", "start", "end"),
    "ovitrap": ("geocode", "uf", "start", "end"),
}


def dataset_columns(kind: str) -> tuple[str, ...]:
    """Canonical column order for a dataset kind (also the CSV contract)."""
    _check_kind(kind)
    return tuple(name for name, _, _ in _COLUMNS[kind])


def _check_kind(kind: str) -> None:
    if kind not in DATASET_KINDS:
        raise UnknownDatasetKind(
            f"unknown dataset kind {kind!r}; expected one of {', '.join(DATASET_KINDS)}"
        )


def _normalize_disease(value: str) -> str:
    text = value.strip().lower()
    return "chikungunya" if text == "chik" else text


def _parse_cell(value: str | None, cell_type: str) -> Any:
    """Parse one CSV cell; empty string means null. Raises ValueError."""
    if value is None or value.strip() == "":
        return None
    text = value.strip()
    if cell_type == "int":
        try:
            return int(text)
        except ValueError:
            raise ValueError(f"{text!r} is not an integer")
    if cell_type == "real":
        try:
            out = float(text)
        except ValueError:
            raise ValueError(f"{text!r} is not a number")
        if not math.isfinite(out):
            raise ValueError(f"{text!r} is not finite")
        return out
    if cell_type == "date":
        return parse_wire_date(text)
    if cell_type in ("epiweek", "epiweek_text"):
        if not re.fullmatch(r"\d{6}", text):
            raise ValueError(f"{text!r} is not a YYYYWW week")
        encoded = int(text)
        EpiWeek.from_int(encoded)  # range check
        return text if cell_type == "epiweek_text" else encoded
    return text


def _check_infodengue(row: dict) -> list[str]:
    reasons = []
    disease = _normalize_disease(row["disease"])
    if disease not in DISEASES:
        reasons.append(f"disease must be one of {', '.join(DISEASES)}")
    row["disease"] = disease
    if not 1 <= row["nivel"] <= 4:
        reasons.append("nivel out of range 1..4")
    if not 0 <= row["receptivo"] <= 3:
        reasons.append("receptivo out of range 0..3")
    if not 0 <= row["transmissao"] <= 3:
        reasons.append("transmissao out of range 0..3")
    if not 0 <= row["nivel_inc"] <= 2:
        reasons.append("nivel_inc out of range 0..2")
    if not 0.0 <= row["p_rt1"] <= 1.0:
        reasons.append("p_rt1 out of range 0..1")
    for name in ("casos", "casos_est", "p_inc100k", "Rt"):
        if row[name] < 0:
            reasons.append(f"{name} must be nonnegative")
    if row["pop"] <= 0:
        reasons.append("pop must be positive")
    if not 1_000_000 <= row["municipio_geocodigo"] <= 9_999_999:
        reasons.append("municipio_geocodigo must be a 7-digit geocode")
    else:
        start = epiweek_to_start_date(EpiWeek.from_int(row["SE"]))
        if row["data_iniSE"] != start:
            reasons.append(
                f"data_iniSE {row['data_iniSE']} is not the Sunday opening week {row['SE']}"
            )
    return reasons


def _check_climate(row: dict) -> list[str]:
    reasons = []
    for triple in ("temp", "precip", "pressao", "umid"):
        lo, mid, hi = (row[f"{triple}_min"], row[f"{triple}_med"], row[f"{triple}_max"])
        if not lo <= mid <= hi:
            reasons.append(f"{triple} min/med/max are not ordered")
    for name in ("precip_min", "precip_med", "precip_max", "precip_tot"):
        if row[name] < 0:
            reasons.append(f"{name} must be nonnegative")
    for name in ("umid_min", "umid_med", "umid_max"):
        if not 0.0 <= row[name] <= 100.0:
            reasons.append(f"{name} out of range 0..100")
    if not 1_000_000 <= row["geocodigo"] <= 9_999_999:
        reasons.append("geocodigo must be a 7-digit geocode")
    return reasons


def _check_episcanner(row: dict) -> list[str]:
    reasons = []
    row["disease"] = _normalize_disease(row["disease"])
    if row["R0"] <= 0:
        reasons.append("R0 must be positive")
    if row["total_cases"] < 0:
        reasons.append("total_cases must be nonnegative")
    if row["ep_dur"] < 1:
        reasons.append("ep_dur must be at least 1 week")
    ini = EpiWeek.from_int(int(row["ep_ini"]))
    end = EpiWeek.from_int(int(row["ep_end"]))
    if end < ini:
        reasons.append("ep_end precedes ep_ini")
    else:
        span = (end.start_date - ini.start_date).days // 7 + 1
        if abs(row["ep_dur"] - span) > 1:
            reasons.append(
                f"ep_dur {row['ep_dur']} inconsistent with ep_ini..ep_end span of {span} weeks"
            )
    return reasons


def _check_ovitrap(row: dict) -> list[str]:
    reasons = []
    status = row["status"].strip().lower()
    if status not in ("positive", "negative"):
        reasons.append("status must be 'positive' or 'negative'")
    row["status"] = status
    if row["egg_count"] < 0:
        reasons.append("egg_count must be nonnegative")
    elif status in ("positive", "negative") and (status == "positive") != (row["egg_count"] > 0):
        reasons.append(f"status {status!r} inconsistent with egg_count {row['egg_count']}")
    if row["collection_date"] < row["install_date"]:
        reasons.append("collection_date precedes install_date")
    if not -90.0 <= row["latitude"] <= 90.0:
        reasons.append("latitude out of range -90..90")
    if not -180.0 <= row["longitude"] <= 180.0:
        reasons.append("longitude out of range -180..180")
    return reasons


_ROW_CHECKS = {
    "infodengue": _check_infodengue,
    "climate": _check_climate,
    "episcanner": _check_episcanner,
    "ovitrap": _check_ovitrap,
}


@dataclass(frozen=True)
class RowRejection:
    row: int
    reason: str

    def to_wire(self) -> dict:
        return {"row": self.row, "reason": self.reason}


@dataclass(frozen=True)
class IngestReport:
    kind: str
    read: int
    inserted: int
    updated: int
    rejected: int
    rejections: tuple[RowRejection, ...] = ()

    def to_wire(self) -> dict:
        return {
            "kind": self.kind,
            "read": self.read,
            "inserted": self.inserted,
            "updated": self.updated,
            "rejected": self.rejected,
            "rejections": [r.to_wire() for r in self.rejections],
        }


def ingest_dataset(
    db: Database,
    kind: str,
    source: str | Path | IO[str],
    disease: str | None = None,
) -> IngestReport:
    """Validate and upsert one CSV file into the store, atomically.

    Rows are upserted by the kind's natural key; a malformed row is
    rejected with a reason and the rest of the file still lands. A missing
    required column rejects the whole file. ``disease`` supplies the
    infodengue disease when the file carries no such column.
    """
    _check_kind(kind)
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return ingest_dataset(db, kind, handle, disease=disease)

    reader = csv.DictReader(source)
    header = set(reader.fieldnames or ())
    columns = _COLUMNS[kind]
    default_disease = _normalize_disease(disease) if disease else None
    missing = [
        name
        for name, _, required in columns
        if required and name not in header and not (name == "disease" and default_disease)
    ]
    if missing:
        raise MissingColumns(kind, missing)

    parsed_rows: list[dict] = []
    rejections: list[RowRejection] = []
    read = 0
    for idx, raw in enumerate(reader, start=1):
        read += 1
        reasons: list[str] = []
        row: dict[str, Any] = {}
        for name, cell_type, required in columns:
            value = raw.get(name)
            if value is None and name == "disease" and default_disease:
                value = default_disease
            try:
                parsed = _parse_cell(value, cell_type)
            except ValueError as exc:
                reasons.append(f"{name}: {exc}")
                continue
            if parsed is None and required:
                reasons.append(f"{name}: missing value")
                continue
            row[name] = parsed
        if not reasons:
            reasons.extend(_ROW_CHECKS[kind](row))
        if reasons:
            rejections.append(RowRejection(idx, "; ".join(reasons)))
        else:
            parsed_rows.append(row)

    inserted = updated = 0
    names = [name for name, _, _ in columns]
    key = _NATURAL_KEY[kind]
    placeholders = ", ".join("?" for _ in names)
    insert_sql = f"INSERT INTO {kind} ({', '.join(names)}) VALUES ({placeholders})"
    update_cols = [name for name in names if name not in key]
    update_sql = (
        f"UPDATE {kind} SET {', '.join(f'{c} = ?' for c in update_cols)} "
        f"WHERE {' AND '.join(f'{c} = ?' for c in key)}"
    )
    exists_sql = f"SELECT 1 FROM {kind} WHERE {' AND '.join(f'{c} = ?' for c in key)}"

    with db.transaction() as conn:
        for row in parsed_rows:
            stored = {name: _to_storage(row[name]) for name in names}
            key_values = [stored[c] for c in key]
            if conn.execute(exists_sql, key_values).fetchone():
                conn.execute(update_sql, [stored[c] for c in update_cols] + key_values)
                updated += 1
            else:
                conn.execute(insert_sql, [stored[c] for c in names])
                inserted += 1

    return IngestReport(
        kind=kind,
        read=read,
        inserted=inserted,
        updated=updated,
        rejected=len(rejections),
        rejections=tuple(rejections),
    )


def _to_storage(value: Any) -> Any:
    from datetime import date

    return value.isoformat() if isinstance(value, date) else value


@dataclass(frozen=True)
class PageEnvelope:
    """Wire envelope for paginated results: an items list plus a pagination block."""

    items: tuple[dict, ...]
    page: int
    per_page: int
    total_items: int

    @property
    def total_pages(self) -> int:
        return math.ceil(self.total_items / self.per_page)

    def to_wire(self) -> dict:
        return {
            "items": list(self.items),
            "pagination": {
                "page": self.page,
                "per_page": self.per_page,
                "total_items": self.total_items,
                "total_pages": self.total_pages,
            },
        }


def _page_params(page: Any, per_page: Any, max_per_page: int) -> list[FieldError]:
    errors = []
    if not isinstance(page, int) or isinstance(page, bool) or page < 1:
        errors.append(FieldError("page", "must be an integer >= 1"))
    if (
        not isinstance(per_page, int)
        or isinstance(per_page, bool)
        or not 1 <= per_page <= max_per_page
    ):
        errors.append(FieldError("per_page", f"must be between 1 and {max_per_page}"))
    return errors


def query_dataset(
    db: Database,
    kind: str,
    filters: Mapping[str, Any] | None = None,
    page: int = 1,
    per_page: int = 100,
    max_per_page: int = 300,
) -> PageEnvelope:
    """Records of one kind matching all provided filters, paginated.

    Filters: disease (infodengue/episcanner), geocode, uf, start, end.
    Date bounds apply to the kind's date column (calendar year for
    episcanner). Results are ordered by the natural key; a page past the
    end yields empty items with a correct pagination block.
    """
    _check_kind(kind)
    filters = dict(filters or {})
    errors = _page_params(page, per_page, max_per_page)

    allowed = _ALLOWED_FILTERS[kind]
    for name in filters:
        if name not in allowed:
            errors.append(
                FieldError(name, f"unknown filter for {kind}; allowed: {', '.join(allowed)}")
            )

    where: list[str] = []
    params: list[Any] = []
    geocode_col = _GEOCODE_COLUMN[kind]

    if "disease" in filters and "disease" in allowed:
        disease = _normalize_disease(str(filters["disease"]))
        if disease not in DISEASES:
            errors.append(FieldError("disease", f"must be one of {', '.join(DISEASES)}"))
        else:
            where.append("disease = ?")
            params.append(disease)
    if "geocode" in filters and "geocode" in allowed:
        try:
            geocode = int(filters["geocode"])
        except (TypeError, ValueError):
            errors.append(FieldError("geocode", "must be an integer geocode"))
        else:
            where.append(f"{geocode_col} = ?")
            params.append(geocode)
    if "uf" in filters and "uf" in allowed:
        try:
            uf = normalize_uf(filters["uf"])
        except ValueError as exc:
            errors.append(FieldError("uf", str(exc)))
        else:
            code = STATE_CODE_BY_UF[uf]
            where.append(f"{geocode_col} >= ? AND {geocode_col} < ?")
            params.extend([code * 100_000, (code + 1) * 100_000])
    for bound, op in (("start", ">="), ("end", "<=")):
        if bound in filters:
            try:
                day = parse_wire_date(filters[bound])
            except ValueError as exc:
                errors.append(FieldError(bound, str(exc)))
                continue
            column = _DATE_FILTER_COLUMN[kind]
            if column == "year":
                where.append(f"year {op} ?")
                params.append(day.year)
            else:
                where.append(f"{column} {op} ?")
                params.append(day.isoformat())

    if errors:
        raise ValidationErrors(errors)

    where_sql = f" WHERE {' AND '.join(where)}" if where else ""
    order_sql = ", ".join(_NATURAL_KEY[kind])
    with db.read() as conn:
        total = conn.execute(f"SELECT COUNT(*) FROM {kind}{where_sql}", params).fetchone()[0]
        rows = conn.execute(
            f"SELECT * FROM {kind}{where_sql} ORDER BY {order_sql} LIMIT ? OFFSET ?",
            params + [per_page, (page - 1) * per_page],
        ).fetchall()
    items = tuple({k: row[k] for k in row.keys()} for row in rows)
    return PageEnvelope(items=items, page=page, per_page=per_page, total_items=total)


def observed_series_for(
    db: Database,
    disease: str,
    adm_level: int,
    adm_key: str | int | None,
    start: Any = None,
    end: Any = None,
    value_column: str = "casos",
) -> ObservationSeries:
    """Weekly observed counts for one administrative unit, as scoring ground truth.

    adm_level 2 returns a municipality's own series; level 1 sums the
    municipalities of a state week by week; level 0 sums nationally. Weeks
    with no stored data are absent, not zero-filled. ``value_column``
    selects notified (casos) or nowcast-estimated (casos_est) counts.
    """
    disease = _normalize_disease(str(disease))
    if disease not in DISEASES:
        raise UnknownAdmKey(f"unknown disease {disease!r}")
    if value_column not in GROUND_TRUTH_COLUMNS:
        raise ValueError(f"value_column must be one of {', '.join(GROUND_TRUTH_COLUMNS)}")

    where = ["disease = ?"]
    params: list[Any] = [disease]
    if start is not None:
        where.append("data_iniSE >= ?")
        params.append(parse_wire_date(start).isoformat())
    if end is not None:
        where.append("data_iniSE <= ?")
        params.append(parse_wire_date(end).isoformat())

    if adm_level == 2:
        if isinstance(adm_key, str) and adm_key.strip().isdigit():
            adm_key = int(adm_key.strip())
        if not isinstance(adm_key, int) or not 1_000_000 <= adm_key <= 9_999_999:
            raise UnknownAdmKey(f"{adm_key!r} is not a 7-digit municipality geocode")
        where.append("municipio_geocodigo = ?")
        params.append(adm_key)
        key: str | int = adm_key
    elif adm_level == 1:
        try:
            key = normalize_uf(adm_key)
        except ValueError as exc:
            raise UnknownAdmKey(str(exc)) from None
        code = STATE_CODE_BY_UF[key]
        where.append("municipio_geocodigo >= ? AND municipio_geocodigo < ?")
        params.extend([code * 100_000, (code + 1) * 100_000])
    elif adm_level == 0:
        if adm_key is not None and str(adm_key).strip().upper() != "BR":
            raise UnknownAdmKey(f"national series is keyed 'BR', got {adm_key!r}")
        key = "BR"
    else:
        raise UnknownAdmKey(f"observed series support adm levels 0..2, got {adm_level}")

    sql = (
        f"SELECT data_iniSE, SUM({value_column}) AS value FROM infodengue "
        f"WHERE {' AND '.join(where)} GROUP BY data_iniSE ORDER BY data_iniSE"
    )
    with db.read() as conn:
        rows = conn.execute(sql, params).fetchall()
    return ObservationSeries.from_tuples(
        (parse_wire_date(row["data_iniSE"]), key, float(row["value"])) for row in rows
    )
