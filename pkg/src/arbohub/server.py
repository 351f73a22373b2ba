"""HTTP service: datastore queries, model registry, prediction uploads, scores.

Mutating routes authenticate through the X-API-Key header before any body
validation runs; datastore reads are public. Validation failures always
answer 422 with every failing field enumerated. The machine-readable API
description is generated from the live routes at /api/openapi.
"""

from __future__ import annotations

import logging
import os
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict, Field

from . import datasets
from .datasets import UnknownAdmKey, UnknownDatasetKind
from .db import Database
from .models import Account
from .registry import Registry
from .scoring import METRICS, NoOverlap, ObservationSeries, score_prediction
from .validation import (
    DomainConfig,
    FieldError,
    ValidationErrors,
    validate_model_meta,
    validate_prediction,
)

logger = logging.getLogger("arbohub.api")

_ERROR_CODES = {
    401: "unauthorized",
    403: "forbidden",
    404: "not_found",
    409: "conflict",
    422: "validation_error",
}


@dataclass(frozen=True)
class ServerConfig:
    """Service configuration, overridable through ARBOHUB_* env variables."""

    bind_addr: str = "127.0.0.1:8000"
    data_dir: Path = Path("arbohub-data")
    max_per_page: int = 300
    default_per_page: int = 100
    ground_truth: str = "casos"
    dashboard_dir: Path | None = None
    domain: DomainConfig = field(default_factory=DomainConfig)

    @classmethod
    def from_env(cls, env=os.environ) -> "ServerConfig":
        kwargs: dict[str, Any] = {}
        if env.get("ARBOHUB_BIND_ADDR"):
            kwargs["bind_addr"] = env["ARBOHUB_BIND_ADDR"]
        if env.get("ARBOHUB_DATA_DIR"):
            kwargs["data_dir"] = Path(env["ARBOHUB_DATA_DIR"])
        if env.get("ARBOHUB_MAX_PER_PAGE"):
            kwargs["max_per_page"] = int(env["ARBOHUB_MAX_PER_PAGE"])
        if env.get("ARBOHUB_GROUND_TRUTH"):
            kwargs["ground_truth"] = env["ARBOHUB_GROUND_TRUTH"]
        if env.get("ARBOHUB_DASHBOARD_DIR"):
            kwargs["dashboard_dir"] = Path(env["ARBOHUB_DASHBOARD_DIR"])
        return cls(**kwargs)

    @property
    def db_path(self) -> Path:
        return self.data_dir / "arbohub.sqlite"

    @property
    def host(self) -> str:
        return self.bind_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_addr.rsplit(":", 1)[1])


# -- wire schemas (documentation; rule enforcement lives in validation.py) ---


class ModelIn(BaseModel):
    model_config = ConfigDict(extra="allow")

    name: Any = Field(None, description="Model name, at most 100 characters")
    description: Any = Field(None, description="Free-text description")
    repository: Any = Field(None, description="Public git repository URL (github.com or gitlab.com)")
    implementation_language: Any = Field(None, description="One of the fixed language list")
    disease: Any = Field(None, description="dengue, zika or chikungunya")
    temporal: Any = Field(None, description="Time-series model flag")
    spatial: Any = Field(None, description="Geo-spatial model flag")
    categorical: Any = Field(None, description="Categorical (vs quantitative) output flag")
    adm_level: Any = Field(None, description="Administrative level of the output: 0, 1, 2 or 3")
    time_resolution: Any = Field(None, description="day, week, month or year")
    sprint: Any = Field(None, description="Sprint 2024/25 model flag")


class PredictionRowIn(BaseModel):
    model_config = ConfigDict(extra="allow")

    date: Any = Field(None, description="Date of the predicted value (YYYY-mm-dd)")
    pred: Any = Field(None, description="Median predicted value")
    lower: Any = Field(None, description="Lower bound of the 95% prediction interval")
    upper: Any = Field(None, description="Upper bound of the 95% prediction interval")
    adm_0: Any = Field(None, description="Country code (ISO 3166-1 alpha-2)")
    adm_1: Any = Field(None, description="State: two-letter UF or two-digit geocode")
    adm_2: Any = Field(None, description="Municipality: 7-digit geocode")
    adm_3: Any = Field(None, description="Sub-municipality geocode")


class PredictionIn(BaseModel):
    model_config = ConfigDict(extra="allow")

    model: Any = Field(None, description="Registered model id")
    description: Any = Field(None, description="Free-text notes about this upload")
    commit: Any = Field(None, description="40-hex git commit of the model version")
    predict_date: Any = Field(None, description="Date the prediction was generated (YYYY-mm-dd)")
    prediction: list[PredictionRowIn] | None = Field(
        None,
        description="Forecast rows; the adm column matching the model's adm_level is mandatory",
    )


class ModelOut(BaseModel):
    id: int
    name: str
    description: str
    repository: str
    implementation_language: str
    disease: str
    temporal: bool
    spatial: bool
    categorical: bool
    adm_level: int
    time_resolution: str
    sprint: bool
    owner: int


class PredictionRowOut(BaseModel):
    date: str
    pred: float
    lower: float
    upper: float
    adm_0: str | None = None
    adm_1: str | None = None
    adm_2: int | None = None
    adm_3: int | None = None


class PredictionOut(BaseModel):
    id: int
    model: int
    description: str
    commit: str
    predict_date: str
    adm_level: int
    prediction: list[PredictionRowOut]


class PaginationOut(BaseModel):
    page: int
    per_page: int
    total_items: int
    total_pages: int


class ModelPageOut(BaseModel):
    items: list[ModelOut]
    pagination: PaginationOut


class PredictionPageOut(BaseModel):
    items: list[PredictionOut]
    pagination: PaginationOut


class DatasetPageOut(BaseModel):
    items: list[dict]
    pagination: PaginationOut


class CreatedPredictionOut(BaseModel):
    id: int


class DateRangeOut(BaseModel):
    start: str
    end: str


class RowDiagnosticOut(BaseModel):
    row: int
    date: str
    reason: str


class ScoreReportOut(BaseModel):
    prediction_id: int
    scores: dict[str, float]
    orientation: dict[str, str]
    n_matched: int
    n_unmatched: int
    date_range: DateRangeOut
    diagnostics: list[RowDiagnosticOut]


class ApiErrorDetailOut(BaseModel):
    field: str
    reason: str
    row: int | None = None


class ApiErrorOut(BaseModel):
    code: str
    message: str
    details: list[ApiErrorDetailOut] = []


def _error_response(status: int, message: str, details: list[dict] | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={
            "code": _ERROR_CODES.get(status, "error"),
            "message": message,
            "details": details or [],
        },
    )


def _reject_unknown_params(request: Request, allowed: tuple[str, ...]) -> None:
    unknown = sorted(set(request.query_params) - set(allowed))
    if unknown:
        raise ValidationErrors(
            [
                FieldError(name, f"unknown filter; allowed: {', '.join(allowed)}")
                for name in unknown
            ]
        )


def create_app(config: ServerConfig | None = None, db: Database | None = None) -> FastAPI:
    """Build the service; ``db`` may be injected for tests."""
    config = config or ServerConfig.from_env()
    database = db or Database(config.db_path)
    registry = Registry(database)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        if db is None:  # close only connections we opened ourselves
            database.close()

    app = FastAPI(
        title="arbohub",
        version="0.1.0",
        description="Arbovirus forecast registry, surveillance datastore, and scoring hub",
        openapi_url="/api/openapi",
        lifespan=lifespan,
    )
    app.state.config = config
    app.state.db = database
    app.state.registry = registry

    def require_account(
        x_api_key: str | None = Header(default=None, alias="X-API-Key"),
    ) -> Account:
        account = registry.authenticate(x_api_key)
        if account is None:
            raise HTTPException(status_code=401, detail="missing or invalid API key")
        return account

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        logger.info(
            "method=%s path=%s status=%d latency_ms=%.1f",
            request.method,
            request.url.path,
            response.status_code,
            (time.perf_counter() - started) * 1000.0,
        )
        return response

    @app.exception_handler(ValidationErrors)
    async def handle_validation_errors(request: Request, exc: ValidationErrors):
        return _error_response(422, str(exc), [e.to_wire() for e in exc.errors])

    @app.exception_handler(RequestValidationError)
    async def handle_request_validation(request: Request, exc: RequestValidationError):
        details = []
        for err in exc.errors():
            loc = [part for part in err.get("loc", ()) if part not in ("body", "query", "path")]
            row = next((part for part in loc if isinstance(part, int)), None)
            names = [part for part in loc if isinstance(part, str)]
            details.append(
                FieldError(
                    field=names[-1] if names else "body",
                    reason=err.get("msg", "invalid value"),
                    row=row,
                ).to_wire()
            )
        return _error_response(422, "request validation failed", details)

    @app.exception_handler(HTTPException)
    async def handle_http_exception(request: Request, exc: HTTPException):
        return _error_response(exc.status_code, str(exc.detail))

    @app.exception_handler(NoOverlap)
    async def handle_no_overlap(request: Request, exc: NoOverlap):
        return _error_response(409, str(exc))

    @app.exception_handler(UnknownAdmKey)
    async def handle_unknown_adm(request: Request, exc: UnknownAdmKey):
        return _error_response(422, str(exc), [{"field": "adm_key", "reason": str(exc)}])

    @app.exception_handler(UnknownDatasetKind)
    async def handle_unknown_kind(request: Request, exc: UnknownDatasetKind):
        return _error_response(404, str(exc))

    # -- registry: models ------------------------------------------------------

    @app.post(
        "/api/registry/models",
        status_code=201,
        response_model=ModelOut,
        responses={401: {"model": ApiErrorOut}, 422: {"model": ApiErrorOut}},
        tags=["registry"],
    )
    def register_model(body: ModelIn, account: Account = Depends(require_account)):
        """Register a forecasting model; the caller's account becomes its owner."""
        record = validate_model_meta(body.model_dump(), config.domain)
        return registry.insert_model(record, owner=account.id).to_wire()

    @app.get(
        "/api/registry/models",
        response_model=ModelPageOut,
        responses={422: {"model": ApiErrorOut}},
        tags=["registry"],
    )
    def list_models(
        request: Request,
        name: str | None = None,
        disease: str | None = None,
        adm_level: str | None = None,
        time_resolution: str | None = None,
        sprint: str | None = None,
        page: int = Query(1),
        per_page: int | None = Query(None),
    ):
        """Registered models matching all provided filters, paginated."""
        _reject_unknown_params(
            request,
            ("name", "disease", "adm_level", "time_resolution", "sprint", "page", "per_page"),
        )
        filters = {
            key: value
            for key, value in {
                "name": name,
                "disease": disease,
                "adm_level": adm_level,
                "time_resolution": time_resolution,
                "sprint": sprint,
            }.items()
            if value is not None
        }
        envelope = registry.list_models(
            filters,
            page=page,
            per_page=per_page if per_page is not None else config.default_per_page,
            max_per_page=config.max_per_page,
        )
        return envelope.to_wire()

    @app.get(
        "/api/registry/models/{model_id}",
        response_model=ModelOut,
        responses={404: {"model": ApiErrorOut}},
        tags=["registry"],
    )
    def get_model(model_id: int):
        """Full metadata for one registered model (its description page payload)."""
        record = registry.get_model(model_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no model with id {model_id}")
        return record.to_wire()

    # -- registry: predictions -------------------------------------------------

    @app.post(
        "/api/registry/predictions",
        status_code=201,
        response_model=CreatedPredictionOut,
        responses={
            401: {"model": ApiErrorOut},
            403: {"model": ApiErrorOut},
            404: {"model": ApiErrorOut},
            422: {"model": ApiErrorOut},
        },
        tags=["registry"],
    )
    def upload_prediction(body: PredictionIn, account: Account = Depends(require_account)):
        """Store a prediction for a model owned by the caller's account."""
        candidate = body.model_dump()
        model_id = candidate.get("model")
        if not isinstance(model_id, int) or isinstance(model_id, bool):
            raise ValidationErrors([FieldError("model", "must be an integer model id")])
        model = registry.get_model(model_id)
        if model is None:
            raise HTTPException(status_code=404, detail=f"no model with id {model_id}")
        if model.owner != account.id:
            raise HTTPException(
                status_code=403,
                detail="predictions may only be uploaded by the model's owner",
            )
        record = validate_prediction(candidate, model, config.domain)
        return {"id": registry.insert_prediction(record).id}

    @app.get(
        "/api/registry/predictions",
        response_model=PredictionPageOut,
        responses={422: {"model": ApiErrorOut}},
        tags=["registry"],
    )
    def list_predictions(
        request: Request,
        model_id: str | None = None,
        disease: str | None = None,
        adm_1: str | None = None,
        start: str | None = None,
        end: str | None = None,
        page: int = Query(1),
        per_page: int | None = Query(None),
    ):
        """Stored predictions matching all provided filters, paginated."""
        _reject_unknown_params(
            request, ("model_id", "disease", "adm_1", "start", "end", "page", "per_page")
        )
        filters = {
            key: value
            for key, value in {
                "model_id": model_id,
                "disease": disease,
                "adm_1": adm_1,
                "start": start,
                "end": end,
            }.items()
            if value is not None
        }
        envelope = registry.list_predictions(
            filters,
            page=page,
            per_page=per_page if per_page is not None else config.default_per_page,
            max_per_page=config.max_per_page,
        )
        return envelope.to_wire()

    @app.get(
        "/api/registry/predictions/{prediction_id}/score",
        response_model=ScoreReportOut,
        responses={
            404: {"model": ApiErrorOut},
            409: {"model": ApiErrorOut},
            422: {"model": ApiErrorOut},
        },
        tags=["registry"],
    )
    def get_score(
        prediction_id: int,
        metric: str | None = None,
        start: str | None = None,
        end: str | None = None,
    ):
        """Evaluate one prediction against the stored observed series.

        Without ``metric`` all four metrics are reported; with it the
        payload is restricted to that metric.
        """
        if metric is not None and metric not in METRICS:
            raise ValidationErrors(
                [FieldError("metric", f"must be one of {', '.join(METRICS)}")]
            )
        prediction = registry.get_prediction(prediction_id)
        if prediction is None:
            raise HTTPException(
                status_code=404, detail=f"no prediction with id {prediction_id}"
            )
        model = registry.get_model(prediction.model)

        keys: list = []
        for row in prediction.rows:
            key = row.adm_key(prediction.adm_level)
            if key not in keys:
                keys.append(key)
        tuples: list[tuple] = []
        for key in keys:
            series = datasets.observed_series_for(
                database,
                model.disease,
                prediction.adm_level,
                key,
                start=start,
                end=end,
                value_column=config.ground_truth,
            )
            tuples.extend((o.date, o.adm_key, o.value) for o in series.observations)
        report = score_prediction(prediction, ObservationSeries.from_tuples(tuples))
        return report.to_wire(metric)

    # -- datastore ---------------------------------------------------------------

    @app.get(
        "/api/datastore/{kind}",
        response_model=DatasetPageOut,
        responses={404: {"model": ApiErrorOut}, 422: {"model": ApiErrorOut}},
        tags=["datastore"],
    )
    def query_datastore(
        request: Request,
        kind: str,
        disease: str | None = None,
        geocode: str | None = None,
        uf: str | None = None,
        start: str | None = None,
        end: str | None = None,
        page: int = Query(1),
        per_page: int | None = Query(None),
    ):
        """Browse one observed dataset with conjunctive filters; no key required."""
        _reject_unknown_params(
            request, ("disease", "geocode", "uf", "start", "end", "page", "per_page")
        )
        filters = {
            key: value
            for key, value in {
                "disease": disease,
                "geocode": geocode,
                "uf": uf,
                "start": start,
                "end": end,
            }.items()
            if value is not None
        }
        envelope = datasets.query_dataset(
            database,
            kind,
            filters,
            page=page,
            per_page=per_page if per_page is not None else config.default_per_page,
            max_per_page=config.max_per_page,
        )
        return envelope.to_wire()

    if config.dashboard_dir and Path(config.dashboard_dir).is_dir():
        app.mount(
            "/dashboard",
            StaticFiles(directory=config.dashboard_dir, html=True),
            name="dashboard",
        )

    return app


def main() -> None:
    """Run the service with config taken from the environment."""
    import uvicorn

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s %(message)s")
    config = ServerConfig.from_env()
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()
