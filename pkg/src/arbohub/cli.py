"""Command-line client: fetch datasets, register models, upload, score.

Machine-parseable results (CSV/JSON) go to stdout, diagnostics to stderr.
Exit codes: 0 success, 1 validation failure, 2 network failure, 3 other
server error.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from datetime import date
from pathlib import Path

import click

from .client import ApiClient, ClientConfig, ClientError, ServerRejection
from .datasets import dataset_columns, DATASET_KINDS
from .models import ModelRecord
from .scoring import METRICS, NoOverlap, ObservationSeries, score_prediction
from .validation import (
    FieldError,
    ValidationErrors,
    normalize_uf,
    parse_wire_date,
    precheck_prediction,
    validate_prediction,
)

EXIT_VALIDATION = 1
EXIT_NETWORK = 2
EXIT_SERVER = 3


def _fail_validation(errors) -> None:
    """Render field errors as an aligned table on stderr and exit 1."""
    rows = [
        ("-" if e.row is None else str(e.row), e.field, e.reason)
        for e in errors
    ]
    widths = [max(len(r[i]) for r in rows + [("row", "field", "reason")]) for i in range(3)]
    click.echo(
        f"{'row'.ljust(widths[0])}  {'field'.ljust(widths[1])}  reason", err=True
    )
    for row, field, reason in rows:
        click.echo(f"{row.ljust(widths[0])}  {field.ljust(widths[1])}  {reason}", err=True)
    sys.exit(EXIT_VALIDATION)


def _run(action):
    try:
        return action()
    except ValidationErrors as exc:
        _fail_validation(exc.errors)
    except ServerRejection as exc:
        click.echo(str(exc), err=True)
        if exc.status == 422 and exc.details:
            _fail_validation(
                [
                    FieldError(d.get("field", "?"), d.get("reason", ""), d.get("row"))
                    for d in exc.details
                ]
            )
        sys.exit(exc.exit_code)
    except NoOverlap as exc:
        click.echo(f"no overlap: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except ClientError as exc:
        click.echo(str(exc), err=True)
        sys.exit(exc.exit_code)


@click.group()
@click.option("--api-url", envvar="ARBOHUB_API_URL", help="Base URL of the hub API.")
@click.option("--api-key", envvar="ARBOHUB_API_KEY", help="API key for mutating calls.")
@click.option("--config", "config_file", type=click.Path(), envvar="ARBOHUB_CONFIG",
              help="JSON config file with api_url/api_key/timeout/retries.")
@click.option("--timeout", type=float, default=None, help="Request timeout in seconds.")
@click.option("--retries", type=int, default=None, help="Attempts per request on network failure.")
@click.pass_context
def main(ctx, api_url, api_key, config_file, timeout, retries):
    """Client for an arbovirus forecast hub."""
    ctx.ensure_object(dict)
    ctx.obj.update(
        api_url=api_url, api_key=api_key, config_file=config_file,
        timeout=timeout, retries=retries,
    )


def _client(ctx) -> ApiClient:
    try:
        config = ClientConfig.resolve(
            api_url=ctx.obj.get("api_url"),
            api_key=ctx.obj.get("api_key"),
            timeout=ctx.obj.get("timeout"),
            retries=ctx.obj.get("retries"),
            config_file=ctx.obj.get("config_file"),
        )
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(EXIT_VALIDATION)
    transport = ctx.obj.get("transport")  # injected by tests
    return ApiClient(config, transport=transport)


@main.command()
@click.argument("kind", type=click.Choice(DATASET_KINDS))
@click.option("--disease", default=None)
@click.option("--geocode", default=None)
@click.option("--uf", default=None)
@click.option("--start", default=None)
@click.option("--end", default=None)
@click.option("--per-page", type=int, default=100, show_default=True)
@click.option("--out", required=True, type=click.Path(), help="Output file; .csv or .json by extension, '-' for JSON on stdout.")
@click.pass_context
def fetch(ctx, kind, disease, geocode, uf, start, end, per_page, out):
    """Download a full filtered dataset, iterating every page."""
    filters = {
        key: value
        for key, value in {
            "disease": disease, "geocode": geocode, "uf": uf,
            "start": start, "end": end,
        }.items()
        if value is not None
    }

    def action():
        with _client(ctx) as client:
            items = client.fetch_dataset(kind, filters, per_page=per_page)
        if out == "-":
            json.dump(items, sys.stdout, indent=2)
            sys.stdout.write("\n")
        elif out.endswith(".json"):
            Path(out).write_text(json.dumps(items, indent=2) + "\n")
        else:
            buffer = io.StringIO()
            writer = csv.DictWriter(buffer, fieldnames=dataset_columns(kind))
            writer.writeheader()
            writer.writerows(items)
            Path(out).write_text(buffer.getvalue())
        click.echo(f"fetched {len(items)} rows of {kind} -> {out}", err=True)

    _run(action)


@main.command("register-model")
@click.option("--file", "meta_file", type=click.Path(exists=True), help="JSON file with the model metadata.")
@click.option("--name", default=None)
@click.option("--description", default=None)
@click.option("--repository", default=None)
@click.option("--implementation-language", default=None)
@click.option("--disease", default=None)
@click.option("--temporal/--no-temporal", default=None)
@click.option("--spatial/--no-spatial", default=None)
@click.option("--categorical/--no-categorical", default=None)
@click.option("--adm-level", type=int, default=None)
@click.option("--time-resolution", default=None)
@click.option("--sprint/--no-sprint", default=None)
@click.pass_context
def register_model(ctx, meta_file, **flags):
    """Register a model from a metadata file and/or flags; prints the new id."""
    document = {}
    if meta_file:
        document.update(json.loads(Path(meta_file).read_text()))
    for key, value in flags.items():
        if value is not None:
            document[key.replace("-", "_")] = value

    def action():
        with _client(ctx) as client:
            created = client.register_model(document)
        click.echo(created["id"])

    _run(action)


def _load_rows_file(path: str) -> list[dict]:
    """Rows from a JSON array or a CSV with the prediction column headers."""
    text = Path(path).read_text()
    if path.endswith(".json"):
        rows = json.loads(text)
        if not isinstance(rows, list):
            raise click.ClickException("JSON rows file must hold an array of row objects")
        return rows
    reader = csv.DictReader(io.StringIO(text))
    header = set(reader.fieldnames or ())
    missing = [col for col in ("date", "pred", "lower", "upper") if col not in header]
    if missing:
        raise click.ClickException(f"rows file is missing required columns: {', '.join(missing)}")
    rows = []
    for raw in reader:
        row: dict = {}
        for key, value in raw.items():
            if value is None or value == "":
                row[key] = None
            elif key in ("pred", "lower", "upper"):
                try:
                    row[key] = float(value)
                except ValueError:
                    row[key] = value  # let validation report it
            else:
                row[key] = value
        rows.append(row)
    return rows


@main.command("upload-prediction")
@click.option("--model", "model_id", type=int, required=True)
@click.option("--commit", required=True)
@click.option("--predict-date", required=True)
@click.option("--data", "data_file", type=click.Path(exists=True), required=True,
              help="Row file: JSON array or CSV with the prediction columns.")
@click.option("--description", default="")
@click.pass_context
def upload_prediction(ctx, model_id, commit, predict_date, data_file, description):
    """Validate locally, then upload a prediction; prints the new id."""
    rows = _load_rows_file(data_file)
    candidate = {
        "model": model_id,
        "description": description,
        "commit": commit,
        "predict_date": predict_date,
        "prediction": rows,
    }
    errors = precheck_prediction(candidate)
    if errors:
        _fail_validation(errors)  # no request was made

    def action():
        with _client(ctx) as client:
            model = ModelRecord.from_wire(client.get_model(model_id))
            validate_prediction(candidate, model)
            created = client.upload_prediction(candidate)
        click.echo(created["id"])

    _run(action)


def _infer_adm_level(rows: list[dict]) -> int:
    complete = [
        level
        for level in (3, 2, 1, 0)
        if rows and all(row.get(f"adm_{level}") not in (None, "") for row in rows)
    ]
    if not complete:
        raise click.ClickException(
            "rows carry no adm column filled on every row; pass --adm-level"
        )
    return complete[0]


def _coerce_obs_key(key, adm_level: int):
    """Match observed adm keys to the types prediction rows carry."""
    if not isinstance(key, str):
        return key
    key = key.strip()
    if adm_level == 1:
        return normalize_uf(key)
    if adm_level == 0:
        return key.upper()
    if key.isdigit():
        return int(key)
    raise click.ClickException(f"observed adm key {key!r} is not an integer geocode")


def _load_observed_csv(path: str, adm_level: int, fallback_key) -> ObservationSeries:
    """Observations from a CSV with date, optional adm, and value/casos columns."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = set(reader.fieldnames or ())
        value_column = next((c for c in ("value", "casos") if c in header), None)
        if "date" not in header or value_column is None:
            raise click.ClickException(
                "observed CSV needs a 'date' column and a 'value' (or 'casos') column"
            )
        adm_column = next((c for c in ("adm", "adm_key") if c in header), None)
        if adm_column is None and fallback_key is None:
            raise click.ClickException(
                "observed CSV needs an 'adm' column when prediction rows span several adm units"
            )
        tuples = []
        for raw in reader:
            key = _coerce_obs_key(raw[adm_column] if adm_column else fallback_key, adm_level)
            tuples.append((parse_wire_date(raw["date"]), key, float(raw[value_column])))
    return ObservationSeries.from_tuples(tuples)


@main.command()
@click.option("--prediction", "prediction_file", type=click.Path(exists=True), required=True,
              help="Prediction rows: JSON array or CSV.")
@click.option("--observed", "observed_file", type=click.Path(exists=True), required=True,
              help="Observed CSV with date, optional adm, and value/casos columns.")
@click.option("--metric", type=click.Choice(("all",) + METRICS), default="all", show_default=True)
@click.option("--adm-level", type=int, default=None,
              help="Adm level of the row keys; inferred from the rows when omitted.")
@click.pass_context
def score(ctx, prediction_file, observed_file, metric, adm_level):
    """Score prediction rows against an observed series, offline."""
    rows = _load_rows_file(prediction_file)
    level = adm_level if adm_level is not None else _infer_adm_level(rows)
    candidate = {
        "model": None,
        "description": "offline scoring",
        "commit": "0" * 40,
        "predict_date": date.today().isoformat(),
        "prediction": rows,
    }
    stub = ModelRecord(
        name="offline", description="", repository="https://github.com/offline/offline",
        implementation_language="other", disease="dengue", temporal=True, spatial=False,
        categorical=False, adm_level=level, time_resolution="week",
    )

    def action():
        record = validate_prediction(candidate, stub)
        keys = {row.adm_key(level) for row in record.rows}
        fallback = next(iter(keys)) if len(keys) == 1 else None
        observed = _load_observed_csv(observed_file, level, fallback)
        report = score_prediction(record, observed)
        payload = report.to_wire(None if metric == "all" else metric)
        click.echo(json.dumps(payload, indent=2))

    _run(action)


if __name__ == "__main__":
    main()
