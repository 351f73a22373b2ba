"""Synthetic observed-data fixtures for tests, demos, and dashboard seeding.

Values are deterministic unless case counts are passed in, so fixtures can
be regenerated bit-identically.
"""

from __future__ import annotations

import csv
import io
import math
from datetime import date, timedelta
from typing import Sequence

from .datasets import dataset_columns
from .epiweek import epiweek_from_date

DEFAULT_POP = 100_000


def week_starts(first: date, count: int) -> list[date]:
    """``count`` consecutive epidemiological week openings, starting at
    the week containing ``first``."""
    start = epiweek_from_date(first).start_date
    return [start + timedelta(weeks=i) for i in range(count)]


def case_curve(n_weeks: int, peak: float = 120.0, base: float = 10.0) -> list[int]:
    """A smooth single-season epidemic wave of weekly counts."""
    return [
        int(round(base + peak * math.exp(-0.5 * ((i - n_weeks / 2) / (n_weeks / 6)) ** 2)))
        for i in range(n_weeks)
    ]


def infodengue_rows(
    geocode: int,
    n_weeks: int,
    disease: str = "dengue",
    first: date = date(2023, 1, 1),
    casos: Sequence[int] | None = None,
    pop: int = DEFAULT_POP,
) -> list[dict]:
    counts = list(casos) if casos is not None else case_curve(n_weeks)
    rows = []
    for start, count in zip(week_starts(first, n_weeks), counts):
        week = epiweek_from_date(start)
        rows.append(
            {
                "disease": disease,
                "municipio_geocodigo": geocode,
                "SE": week.to_int(),
                "data_iniSE": start.isoformat(),
                "casos": count,
                "casos_est": float(count),
                "casos_prov": count,
                "p_rt1": 0.5,
                "p_inc100k": round(count / pop * 100_000, 4),
                "nivel": 1 + min(3, count // 60),
                "versao_modelo": "synthetic-1",
                "Rt": 1.1,
                "municipio_nome": f"Municipality {geocode}",
                "pop": pop,
                "receptivo": 1,
                "transmissao": 1,
                "nivel_inc": 0,
            }
        )
    return rows


def climate_rows(geocode: int, n_days: int, first: date = date(2023, 1, 1)) -> list[dict]:
    rows = []
    for i in range(n_days):
        day = first + timedelta(days=i)
        temp = 24.0 + 4.0 * math.sin(2 * math.pi * i / 365)
        rain = max(0.0, 5.0 + 4.0 * math.sin(2 * math.pi * i / 30))
        rows.append(
            {
                "geocodigo": geocode,
                "date": day.isoformat(),
                "temp_min": round(temp - 5.0, 2),
                "temp_med": round(temp, 2),
                "temp_max": round(temp + 5.0, 2),
                "precip_min": 0.0,
                "precip_med": round(rain / 2, 2),
                "precip_max": round(rain, 2),
                "precip_tot": round(rain * 1.5, 2),
                "pressao_min": 0.99,
                "pressao_med": 1.0,
                "pressao_max": 1.01,
                "umid_min": 55.0,
                "umid_med": 70.0,
                "umid_max": 85.0,
            }
        )
    return rows


def episcanner_rows(
    geocode: int, years: Sequence[int], disease: str = "dengue"
) -> list[dict]:
    rows = []
    for year in years:
        rows.append(
            {
                "disease": disease,
                "geocode": geocode,
                "year": year,
                "CID10": "A90",
                "muni_name": f"Municipality {geocode}",
                "peak_week": 12.5,
                "beta": 0.55,
                "gamma": 0.33,
                "R0": 1.67,
                "total_cases": 1500 + 10 * (year % 10),
                "alpha": 0.12,
                "sum_res": 0.034,
                "ep_ini": f"{year * 100 + 1}",
                "ep_end": f"{year * 100 + 20}",
                "ep_dur": 20,
            }
        )
    return rows


def ovitrap_rows(
    geocode: int, n_traps: int, collection: date = date(2023, 3, 12)
) -> list[dict]:
    rows = []
    for i in range(n_traps):
        eggs = (i * 17) % 60
        rows.append(
            {
                "trap_id": f"T{i:04d}",
                "collection_date": collection.isoformat(),
                "latitude": round(-19.9 + i * 0.01, 4),
                "longitude": round(-43.9 - i * 0.01, 4),
                "install_date": (collection - timedelta(days=7)).isoformat(),
                "epi_week": epiweek_from_date(collection).to_int(),
                "year": collection.year,
                "egg_count": eggs,
                "status": "positive" if eggs > 0 else "negative",
                "geocode": geocode,
            }
        )
    return rows


def to_csv(kind: str, rows: list[dict]) -> str:
    """Serialize fixture rows in the kind's canonical CSV contract."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=dataset_columns(kind))
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return buffer.getvalue()
