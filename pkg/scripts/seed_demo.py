"""Populate a data directory with a demo season: observed data, three
models of varying skill, and their predictions, ready for the dashboard.

    python scripts/seed_demo.py [--data-dir demo-data]
    arbohub-server serve --data-dir demo-data

Prints the issued API key so further uploads can be scripted against the
running server.
"""

import argparse
import io
import sys
from datetime import date
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from arbohub import fixtures
from arbohub.datasets import ingest_dataset
from arbohub.db import Database
from arbohub.registry import Registry
from arbohub.validation import validate_model_meta, validate_prediction

MG_MUNICIPALITIES = (3106200, 3170206, 3143302)  # Belo Horizonte, Uberlandia, Montes Claros
SEASON_START = date(2023, 10, 1)
N_WEEKS = 40

MODELS = [
    # (name, language, bias, extra interval width)
    ("wave-follower", "Python", 0.0, 10.0),
    ("optimist", "R", -12.0, 24.0),
    ("wide-band", "Julia", 5.0, 60.0),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--data-dir", default="demo-data")
    args = parser.parse_args()

    db = Database(Path(args.data_dir) / "arbohub.sqlite")
    registry = Registry(db)
    account, token = registry.create_account("demo")

    totals = None
    for i, geocode in enumerate(MG_MUNICIPALITIES):
        counts = fixtures.case_curve(N_WEEKS, peak=120.0 + 60.0 * i, base=8.0 + 4.0 * i)
        rows = fixtures.infodengue_rows(geocode, N_WEEKS, first=SEASON_START, casos=counts)
        ingest_dataset(db, "infodengue", io.StringIO(fixtures.to_csv("infodengue", rows)))
        week_dates = [row["data_iniSE"] for row in rows]
        totals = counts if totals is None else [a + b for a, b in zip(totals, counts)]

    ingest_dataset(
        db, "climate",
        io.StringIO(fixtures.to_csv("climate", fixtures.climate_rows(MG_MUNICIPALITIES[0], 120, SEASON_START))),
    )
    ingest_dataset(
        db, "episcanner",
        io.StringIO(fixtures.to_csv("episcanner", fixtures.episcanner_rows(MG_MUNICIPALITIES[0], [2022, 2023]))),
    )
    ingest_dataset(
        db, "ovitrap",
        io.StringIO(fixtures.to_csv("ovitrap", fixtures.ovitrap_rows(MG_MUNICIPALITIES[0], 25, SEASON_START))),
    )

    for name, language, bias, widen in MODELS:
        model = validate_model_meta(
            {
                "name": name,
                "description": f"demo model '{name}' seeded for the comparison view",
                "repository": f"https://github.com/example/{name}",
                "implementation_language": language,
                "disease": "dengue",
                "temporal": True,
                "spatial": False,
                "categorical": False,
                "adm_level": 1,
                "time_resolution": "week",
                "sprint": True,
            }
        )
        stored = registry.insert_model(model, owner=account.id)
        rows = [
            {
                "date": day,
                "pred": max(0.0, total + bias),
                "lower": max(0.0, total + bias - widen / 2),
                "upper": total + bias + widen / 2,
                "adm_1": "MG",
            }
            for day, total in zip(week_dates, totals)
        ]
        record = validate_prediction(
            {
                "model": stored.id,
                "description": f"{name} season forecast",
                "commit": f"{abs(hash(name)) % 16**8:08x}" * 5,
                "predict_date": SEASON_START.isoformat(),
                "prediction": rows,
            },
            stored,
        )
        prediction = registry.insert_prediction(record)
        print(f"model {stored.id} ({name}) -> prediction {prediction.id}")

    print(f"seeded {args.data_dir} with {N_WEEKS} weeks across {len(MG_MUNICIPALITIES)} municipalities")
    print(f"api key: {token}")


if __name__ == "__main__":
    main()
