"""Acceptance gate: one test per release criterion, each printing PASS/FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Every tolerance is pinned here; nothing is deferred to calibration.
"""

import csv
import functools
import io
import json
import time
from datetime import date, timedelta

import numpy as np
import pytest
from click.testing import CliRunner

from arbohub import admin, cli, fixtures
from arbohub.client import ApiClient, ClientConfig
from arbohub.datasets import dataset_columns, ingest_dataset, query_dataset
from arbohub.epiweek import EpiWeek, epiweek_from_date
from arbohub.scoring import crps_normal, log_score_normal, sigma_from_interval

from oracles import crps_gauss_legendre, crps_quad, enumerate_epiweeks

BH = 3106200  # Belo Horizonte, MG
UBERLANDIA = 3170206


def criterion(number, label):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[acceptance] criterion {number} ({label}): FAIL")
                raise
            print(f"[acceptance] criterion {number} ({label}): PASS")

        return wrapper

    return decorate


@criterion(1, "CRPS oracle equivalence on the full grid, under 5 s")
def test_crps_oracle_equivalence_grid():
    mus = np.arange(-5.0, 5.5, 1.0)
    sigmas = np.array([0.1, 1.0, 10.0])
    ys = np.arange(-10.0, 10.25, 0.5)
    grid_mu, grid_sigma, grid_y = np.meshgrid(mus, sigmas, ys, indexing="ij")
    assert grid_mu.size == 11 * 3 * 41

    started = time.perf_counter()
    integrated = crps_gauss_legendre(grid_mu, grid_sigma, grid_y)
    closed = np.vectorize(crps_normal)(grid_mu, grid_sigma, grid_y)
    elapsed = time.perf_counter() - started

    worst = float(np.abs(integrated - closed).max())
    assert worst < 1e-6, f"max |closed - integrated| = {worst}"
    assert elapsed < 5.0, f"grid comparison took {elapsed:.2f}s"

    # cross-check the fixed-order integration against adaptive quadrature
    rng = np.random.default_rng(7)
    for _ in range(20):
        mu = float(rng.choice(mus))
        sigma = float(rng.choice(sigmas))
        y = float(rng.choice(ys))
        assert abs(crps_quad(mu, sigma, y) - crps_normal(mu, sigma, y)) < 1e-6


@criterion(2, "analytic spot values for CRPS, log score, and sigma rule")
def test_analytic_spot_values():
    assert crps_normal(0, 1, 0) == pytest.approx(0.2336949, abs=1e-6)
    assert crps_normal(0, 1, 1) == pytest.approx(0.6024413, abs=1e-6)
    # the 1e-9 tolerance refers to the analytic value -log(sqrt(2*pi)),
    # whose 7-decimal rounding is -0.9189385
    assert log_score_normal(0, 1, 0) == pytest.approx(-0.5 * np.log(2 * np.pi), abs=1e-9)
    assert log_score_normal(0, 1, 0) == pytest.approx(-0.9189385, abs=1e-6)
    assert sigma_from_interval(2, 10) == 2.0


@criterion(3, "CRPS properties over 1,000 randomized cases")
def test_crps_randomized_properties():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        mu = float(rng.uniform(-100, 100))
        sigma = float(rng.uniform(0.01, 100))
        y = float(rng.uniform(-100, 100))
        c = float(rng.uniform(-100, 100))
        scale = float(rng.uniform(0.1, 10))

        value = crps_normal(mu, sigma, y)
        assert value >= 0.0
        assert abs(crps_normal(mu + c, sigma, y + c) - value) < 1e-12

        small_mu = mu / 10.0
        small_y = y / 10.0
        small_sigma = max(sigma / 10.0, 0.01)
        assert (
            abs(
                crps_normal(scale * small_mu, scale * small_sigma, scale * small_y)
                - scale * crps_normal(small_mu, small_sigma, small_y)
            )
            < 1e-12
        )

        gap = float(rng.uniform(0.1, 100))
        assert abs(crps_normal(mu, 1e-9, mu + gap) - gap) < 1e-6


@criterion(4, "adm-level validation protocol over HTTP")
def test_validation_protocol(client, account_token, model_meta):
    _, token = account_token
    headers = {"X-API-Key": token}
    model_id = client.post(
        "/api/registry/models", json=model_meta, headers=headers
    ).json()["id"]

    def upload(rows):
        return client.post(
            "/api/registry/predictions",
            json={
                "model": model_id,
                "description": "",
                "commit": "a" * 40,
                "predict_date": "2023-01-01",
                "prediction": rows,
            },
            headers=headers,
        )

    good = [
        {"date": f"2023-01-{1 + 7 * i:02d}", "pred": 10.0, "lower": 8.0, "upper": 12.0, "adm_1": "MG"}
        for i in range(3)
    ]
    assert upload(good).status_code == 201

    lacking = [{k: v for k, v in row.items() if k != "adm_1"} for row in good]
    response = upload(lacking)
    assert response.status_code == 422
    details = response.json()["details"]
    assert all(d["field"] == "adm_1" for d in details)
    assert sorted(d["row"] for d in details) == [0, 1, 2]

    broken = [dict(row) for row in good]
    broken[1].update(lower=10.0, pred=5.0, upper=20.0)   # lower > pred
    broken[2].update(lower=8.0, pred=30.0, upper=12.0)   # pred > upper
    response = upload(broken)
    assert response.status_code == 422
    assert sorted(d["row"] for d in response.json()["details"]) == [1, 2]


@criterion(5, "pagination invariant over 250 synthetic rows")
def test_pagination_invariant(client, db):
    for geocode in (BH, UBERLANDIA):
        rows = fixtures.infodengue_rows(geocode, 125)
        ingest_dataset(db, "infodengue", io.StringIO(fixtures.to_csv("infodengue", rows)))

    pages = []
    for page in (1, 2, 3):
        response = client.get(
            "/api/datastore/infodengue", params={"page": page, "per_page": 100}
        )
        assert response.status_code == 200
        body = response.json()
        assert set(body.keys()) == {"items", "pagination"}
        assert set(body["pagination"].keys()) == {"page", "per_page", "total_items", "total_pages"}
        assert body["pagination"]["total_pages"] == 3
        assert body["pagination"]["total_items"] == 250
        pages.append(body["items"])

    assert [len(p) for p in pages] == [100, 100, 50]
    everything = [item for page in pages for item in page]
    keys = {(i["disease"], i["municipio_geocodigo"], i["SE"]) for i in everything}
    assert len(keys) == 250
    beyond = client.get("/api/datastore/infodengue", params={"page": 4, "per_page": 100}).json()
    assert beyond["items"] == []


@criterion(6, "end-to-end: key, model, 52-week upload, ingest, score")
def test_end_to_end_flow(tmp_path):
    runner = CliRunner()
    data_dir = tmp_path / "hub-data"

    issued = runner.invoke(
        admin.main, ["create-account", "--name", "e2e", "--data-dir", str(data_dir)],
        catch_exceptions=False,
    )
    assert issued.exit_code == 0
    token = issued.stdout.strip()
    assert len(token) >= 32

    from fastapi.testclient import TestClient

    from arbohub.server import ServerConfig, create_app

    app = create_app(ServerConfig(data_dir=data_dir))
    with TestClient(app) as client:
        headers = {"X-API-Key": token}
        model_id = client.post(
            "/api/registry/models",
            json={
                "name": "e2e-weekly-state",
                "description": "end to end fixture",
                "repository": "https://github.com/example/e2e",
                "implementation_language": "Python",
                "disease": "dengue",
                "temporal": True,
                "spatial": False,
                "categorical": False,
                "adm_level": 1,
                "time_resolution": "week",
                "sprint": False,
            },
            headers=headers,
        ).json()["id"]

        observed_rows = fixtures.infodengue_rows(BH, 52, first=date(2023, 1, 1))
        prediction_rows = [
            {
                "date": row["data_iniSE"],
                "pred": float(row["casos"]),
                "lower": float(row["casos"]) - 2.0,
                "upper": float(row["casos"]) + 2.0,
                "adm_1": "MG",
            }
            for row in observed_rows
        ]
        response = client.post(
            "/api/registry/predictions",
            json={
                "model": model_id,
                "description": "52 weekly rows for MG",
                "commit": "f" * 40,
                "predict_date": "2023-01-01",
                "prediction": prediction_rows,
            },
            headers=headers,
        )
        assert response.status_code == 201
        prediction_id = response.json()["id"]

        csv_path = tmp_path / "observed.csv"
        csv_path.write_text(fixtures.to_csv("infodengue", observed_rows))
        ingested = runner.invoke(
            admin.main,
            ["ingest", "infodengue", str(csv_path), "--data-dir", str(data_dir)],
            catch_exceptions=False,
        )
        assert ingested.exit_code == 0
        assert json.loads(ingested.stdout)["inserted"] == 52

        report = client.get(f"/api/registry/predictions/{prediction_id}/score")
        assert report.status_code == 200
        body = report.json()
        assert set(body["scores"].keys()) == {"crps", "log_score", "mae", "mse"}
        assert body["n_matched"] == 52
        assert body["scores"]["mae"] == 0.0
        assert body["scores"]["mse"] == 0.0
        assert body["scores"]["crps"] == pytest.approx(0.2336949, abs=1e-6)
        assert body["scores"]["log_score"] == pytest.approx(-0.9189385, abs=1e-6)


@criterion(7, "epi-week oracle agreement for every date 2010..2030")
def test_epiweek_oracle_full_range():
    oracle = enumerate_epiweeks(2010, 2030)
    day = date(2010, 1, 1)
    last = date(2030, 12, 31)
    checked = 0
    while day <= last:
        week = epiweek_from_date(day)
        assert (week.year, week.week) == oracle[day], f"mismatch at {day}"
        checked += 1
        day += timedelta(days=1)
    assert checked == 7670
    assert epiweek_from_date(date(2022, 1, 1)) == EpiWeek(2021, 52)


@criterion(8, "ingestion round-trip, idempotence, and row-level rejection")
def test_ingestion_criteria(db):
    kind_fixtures = {
        "infodengue": fixtures.infodengue_rows(BH, 5),
        "climate": fixtures.climate_rows(BH, 5),
        "episcanner": fixtures.episcanner_rows(BH, [2021, 2022, 2023]),
        "ovitrap": fixtures.ovitrap_rows(BH, 5),
    }
    natural_keys = {
        "infodengue": ("disease", "municipio_geocodigo", "SE"),
        "climate": ("geocodigo", "date"),
        "episcanner": ("disease", "geocode", "year"),
        "ovitrap": ("trap_id", "collection_date"),
    }
    for kind, rows in kind_fixtures.items():
        first = ingest_dataset(db, kind, io.StringIO(fixtures.to_csv(kind, rows)))
        assert first.inserted == len(rows) and first.rejected == 0

        envelope = query_dataset(db, kind, {}, page=1, per_page=100)
        key = natural_keys[kind]
        returned = {tuple(item[c] for c in key): item for item in envelope.items}
        for row in rows:
            item = returned[tuple(row[c] for c in key)]
            for column in dataset_columns(kind):
                if isinstance(row[column], float):
                    assert item[column] == pytest.approx(row[column], abs=1e-9)
                else:
                    assert item[column] == row[column], (kind, column)

        with db.read() as conn:
            before = [dict(r) for r in conn.execute(f"SELECT * FROM {kind} ORDER BY rowid")]
        again = ingest_dataset(db, kind, io.StringIO(fixtures.to_csv(kind, rows)))
        assert again.inserted == 0 and again.updated == len(rows)
        with db.read() as conn:
            after = [dict(r) for r in conn.execute(f"SELECT * FROM {kind} ORDER BY rowid")]
        assert before == after

    rows = fixtures.infodengue_rows(UBERLANDIA, 3)
    rows[1]["nivel"] = 7
    report = ingest_dataset(db, "infodengue", io.StringIO(fixtures.to_csv("infodengue", rows)))
    assert report.inserted == 2
    assert report.rejected == 1
    assert "nivel out of range 1..4" in report.rejections[0].reason


@criterion(9, "offline client score equals server score to 1e-9")
def test_offline_online_parity(live_server, tmp_path):
    counts = [3, 8, 13, 21, 34]
    rows_fixture = fixtures.infodengue_rows(BH, len(counts), casos=counts, first=date(2024, 1, 1))
    ingest_dataset(
        live_server["db"], "infodengue", io.StringIO(fixtures.to_csv("infodengue", rows_fixture))
    )

    prediction_rows = [
        {
            "date": row["data_iniSE"],
            "pred": float(row["casos"]) + bump,
            "lower": float(row["casos"]) - 4.0,
            "upper": float(row["casos"]) + 6.0,
            "adm_1": "MG",
        }
        for row, bump in zip(rows_fixture, (0.5, -1.0, 2.0, 0.0, 3.0))
    ]
    with ApiClient(
        ClientConfig(api_url=live_server["url"], api_key=live_server["token"])
    ) as api:
        model_id = api.register_model(
            {
                "name": "parity-acceptance",
                "repository": "https://github.com/example/parity",
                "implementation_language": "Julia",
                "disease": "dengue",
                "temporal": True,
                "spatial": False,
                "categorical": False,
                "adm_level": 1,
                "time_resolution": "week",
            }
        )["id"]
        prediction_id = api.upload_prediction(
            {
                "model": model_id,
                "description": "parity",
                "commit": "9" * 40,
                "predict_date": "2024-01-01",
                "prediction": prediction_rows,
            }
        )["id"]
        server_report = api.get_score(prediction_id)

    rows_path = tmp_path / "rows.json"
    rows_path.write_text(json.dumps(prediction_rows))
    observed_path = tmp_path / "observed.csv"
    with open(observed_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["date", "adm", "value"])
        for row in rows_fixture:
            writer.writerow([row["data_iniSE"], "MG", row["casos"]])

    result = CliRunner().invoke(
        cli.main,
        ["score", "--prediction", str(rows_path), "--observed", str(observed_path)],
        catch_exceptions=False,
    )
    assert result.exit_code == 0, result.stderr
    offline = json.loads(result.stdout)

    for metric in ("crps", "log_score", "mae", "mse"):
        assert offline["scores"][metric] == pytest.approx(
            server_report["scores"][metric], abs=1e-9
        ), metric
    assert offline["n_matched"] == server_report["n_matched"] == len(counts)
    assert offline["n_unmatched"] == server_report["n_unmatched"] == 0
