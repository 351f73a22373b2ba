"""Model registry persistence: accounts, API keys, models, predictions.

API keys are opaque random tokens; only a salted hash is stored, so a key
is shown exactly once at issuance. Predictions are append-only provenance:
a new commit means a new upload, never an update.
"""

from __future__ import annotations

import hashlib
import secrets
from datetime import datetime, timezone
from typing import Any, Mapping

from .datasets import PageEnvelope
from .db import Database
from .models import (
    ADM_LEVELS,
    DISEASES,
    TIME_RESOLUTIONS,
    Account,
    ModelRecord,
    PredictionRecord,
    PredictionRow,
)
from .validation import FieldError, ValidationErrors, normalize_uf, parse_wire_date

MODEL_FILTERS = ("name", "disease", "adm_level", "time_resolution", "sprint")
PREDICTION_FILTERS = ("model_id", "disease", "adm_1", "start", "end")


def _hash_key(salt: str, token: str) -> str:
    return hashlib.sha256((salt + token).encode()).hexdigest()


class Registry:
    def __init__(self, db: Database):
        self.db = db

    # -- accounts -----------------------------------------------------------

    def create_account(self, name: str) -> tuple[Account, str]:
        """Create an account and return it with its API key (shown only here)."""
        if not name or not name.strip():
            raise ValidationErrors([FieldError("name", "must be a nonempty string")])
        token = secrets.token_urlsafe(32)
        salt = secrets.token_hex(16)
        created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        with self.db.transaction() as conn:
            cursor = conn.execute(
                "INSERT INTO accounts (name, key_salt, key_hash, created_at, active) "
                "VALUES (?, ?, ?, ?, 1)",
                (name.strip(), salt, _hash_key(salt, token), created_at),
            )
            account_id = cursor.lastrowid
        return Account(id=account_id, name=name.strip(), created_at=created_at), token

    def authenticate(self, token: str | None) -> Account | None:
        """Resolve an API key to its active account, or None."""
        if not token:
            return None
        with self.db.read() as conn:
            rows = conn.execute(
                "SELECT id, name, key_salt, key_hash, created_at FROM accounts "
                "WHERE active = 1"
            ).fetchall()
        for row in rows:
            if secrets.compare_digest(row["key_hash"], _hash_key(row["key_salt"], token)):
                return Account(id=row["id"], name=row["name"], created_at=row["created_at"])
        return None

    def set_account_active(self, account_id: int, active: bool) -> None:
        with self.db.transaction() as conn:
            conn.execute(
                "UPDATE accounts SET active = ? WHERE id = ?", (int(active), account_id)
            )

    def list_accounts(self) -> list[Account]:
        with self.db.read() as conn:
            rows = conn.execute(
                "SELECT id, name, created_at, active FROM accounts ORDER BY id"
            ).fetchall()
        return [
            Account(id=r["id"], name=r["name"], created_at=r["created_at"], active=bool(r["active"]))
            for r in rows
        ]

    # -- models --------------------------------------------------------------

    def insert_model(self, record: ModelRecord, owner: int) -> ModelRecord:
        with self.db.transaction() as conn:
            cursor = conn.execute(
                "INSERT INTO models (name, description, repository, implementation_language,"
                " disease, temporal, spatial, categorical, adm_level, time_resolution, sprint, owner)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    record.name,
                    record.description,
                    record.repository,
                    record.implementation_language,
                    record.disease,
                    int(record.temporal),
                    int(record.spatial),
                    int(record.categorical),
                    record.adm_level,
                    record.time_resolution,
                    int(record.sprint),
                    owner,
                ),
            )
            model_id = cursor.lastrowid
        return record.with_identity(id=model_id, owner=owner)

    @staticmethod
    def _model_from_row(row) -> ModelRecord:
        return ModelRecord(
            id=row["id"],
            name=row["name"],
            description=row["description"],
            repository=row["repository"],
            implementation_language=row["implementation_language"],
            disease=row["disease"],
            temporal=bool(row["temporal"]),
            spatial=bool(row["spatial"]),
            categorical=bool(row["categorical"]),
            adm_level=row["adm_level"],
            time_resolution=row["time_resolution"],
            sprint=bool(row["sprint"]),
            owner=row["owner"],
        )

    def get_model(self, model_id: int) -> ModelRecord | None:
        with self.db.read() as conn:
            row = conn.execute("SELECT * FROM models WHERE id = ?", (model_id,)).fetchone()
        return self._model_from_row(row) if row else None

    def list_models(
        self,
        filters: Mapping[str, Any] | None = None,
        page: int = 1,
        per_page: int = 100,
        max_per_page: int = 300,
    ) -> PageEnvelope:
        """Models matching all provided filters, ordered by id."""
        filters = dict(filters or {})
        errors: list[FieldError] = []
        where: list[str] = []
        params: list[Any] = []

        for name in filters:
            if name not in MODEL_FILTERS:
                errors.append(
                    FieldError(name, f"unknown filter; allowed: {', '.join(MODEL_FILTERS)}")
                )
        if "name" in filters:
            where.append("name LIKE ?")
            params.append(f"%{filters['name']}%")
        if "disease" in filters:
            disease = str(filters["disease"]).strip().lower()
            if disease not in DISEASES:
                errors.append(FieldError("disease", f"must be one of {', '.join(DISEASES)}"))
            else:
                where.append("disease = ?")
                params.append(disease)
        if "adm_level" in filters:
            try:
                adm_level = int(filters["adm_level"])
                if adm_level not in ADM_LEVELS:
                    raise ValueError
            except (TypeError, ValueError):
                errors.append(FieldError("adm_level", "must be one of 0, 1, 2, 3"))
            else:
                where.append("adm_level = ?")
                params.append(adm_level)
        if "time_resolution" in filters:
            resolution = str(filters["time_resolution"]).strip().lower()
            if resolution not in TIME_RESOLUTIONS:
                errors.append(
                    FieldError("time_resolution", f"must be one of {', '.join(TIME_RESOLUTIONS)}")
                )
            else:
                where.append("time_resolution = ?")
                params.append(resolution)
        if "sprint" in filters:
            sprint = _parse_bool(filters["sprint"])
            if sprint is None:
                errors.append(FieldError("sprint", "must be true or false"))
            else:
                where.append("sprint = ?")
                params.append(int(sprint))

        errors.extend(_page_errors(page, per_page, max_per_page))
        if errors:
            raise ValidationErrors(errors)

        where_sql = f" WHERE {' AND '.join(where)}" if where else ""
        with self.db.read() as conn:
            total = conn.execute(f"SELECT COUNT(*) FROM models{where_sql}", params).fetchone()[0]
            rows = conn.execute(
                f"SELECT * FROM models{where_sql} ORDER BY id LIMIT ? OFFSET ?",
                params + [per_page, (page - 1) * per_page],
            ).fetchall()
        items = tuple(self._model_from_row(r).to_wire() for r in rows)
        return PageEnvelope(items=items, page=page, per_page=per_page, total_items=total)

    # -- predictions ----------------------------------------------------------

    def insert_prediction(self, record: PredictionRecord) -> PredictionRecord:
        with self.db.transaction() as conn:
            cursor = conn.execute(
                "INSERT INTO predictions (model, description, commit_hash, predict_date, adm_level)"
                " VALUES (?, ?, ?, ?, ?)",
                (
                    record.model,
                    record.description,
                    record.commit,
                    record.predict_date.isoformat(),
                    record.adm_level,
                ),
            )
            prediction_id = cursor.lastrowid
            conn.executemany(
                "INSERT INTO prediction_rows (prediction_id, idx, date, pred, lower, upper,"
                " adm_0, adm_1, adm_2, adm_3) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                [
                    (
                        prediction_id,
                        idx,
                        row.date.isoformat(),
                        row.pred,
                        row.lower,
                        row.upper,
                        row.adm_0,
                        row.adm_1,
                        row.adm_2,
                        row.adm_3,
                    )
                    for idx, row in enumerate(record.rows)
                ],
            )
        return record.with_id(prediction_id)

    def get_prediction(self, prediction_id: int) -> PredictionRecord | None:
        with self.db.read() as conn:
            head = conn.execute(
                "SELECT * FROM predictions WHERE id = ?", (prediction_id,)
            ).fetchone()
            if not head:
                return None
            rows = conn.execute(
                "SELECT * FROM prediction_rows WHERE prediction_id = ? ORDER BY idx",
                (prediction_id,),
            ).fetchall()
        return self._prediction_from_rows(head, rows)

    @staticmethod
    def _prediction_from_rows(head, rows) -> PredictionRecord:
        return PredictionRecord(
            id=head["id"],
            model=head["model"],
            description=head["description"],
            commit=head["commit_hash"],
            predict_date=parse_wire_date(head["predict_date"]),
            adm_level=head["adm_level"],
            rows=tuple(
                PredictionRow(
                    date=parse_wire_date(r["date"]),
                    pred=r["pred"],
                    lower=r["lower"],
                    upper=r["upper"],
                    adm_0=r["adm_0"],
                    adm_1=r["adm_1"],
                    adm_2=r["adm_2"],
                    adm_3=r["adm_3"],
                )
                for r in rows
            ),
        )

    def list_predictions(
        self,
        filters: Mapping[str, Any] | None = None,
        page: int = 1,
        per_page: int = 100,
        max_per_page: int = 300,
    ) -> PageEnvelope:
        """Predictions matching all provided filters, ordered by id.

        start/end select predictions whose row dates intersect the range;
        adm_1 selects uploads containing rows for that state.
        """
        filters = dict(filters or {})
        errors: list[FieldError] = []
        where: list[str] = []
        params: list[Any] = []

        for name in filters:
            if name not in PREDICTION_FILTERS:
                errors.append(
                    FieldError(name, f"unknown filter; allowed: {', '.join(PREDICTION_FILTERS)}")
                )
        if "model_id" in filters:
            try:
                model_id = int(filters["model_id"])
            except (TypeError, ValueError):
                errors.append(FieldError("model_id", "must be an integer model id"))
            else:
                where.append("p.model = ?")
                params.append(model_id)
        if "disease" in filters:
            disease = str(filters["disease"]).strip().lower()
            if disease not in DISEASES:
                errors.append(FieldError("disease", f"must be one of {', '.join(DISEASES)}"))
            else:
                where.append("m.disease = ?")
                params.append(disease)
        if "adm_1" in filters:
            try:
                uf = normalize_uf(filters["adm_1"])
            except ValueError as exc:
                errors.append(FieldError("adm_1", str(exc)))
            else:
                where.append(
                    "EXISTS (SELECT 1 FROM prediction_rows r WHERE r.prediction_id = p.id"
                    " AND r.adm_1 = ?)"
                )
                params.append(uf)
        date_bounds = {}
        for bound in ("start", "end"):
            if bound in filters:
                try:
                    date_bounds[bound] = parse_wire_date(filters[bound]).isoformat()
                except ValueError as exc:
                    errors.append(FieldError(bound, str(exc)))
        if date_bounds:
            clauses = ["r.prediction_id = p.id"]
            if "start" in date_bounds:
                clauses.append("r.date >= ?")
                params.append(date_bounds["start"])
            if "end" in date_bounds:
                clauses.append("r.date <= ?")
                params.append(date_bounds["end"])
            where.append(
                f"EXISTS (SELECT 1 FROM prediction_rows r WHERE {' AND '.join(clauses)})"
            )

        errors.extend(_page_errors(page, per_page, max_per_page))
        if errors:
            raise ValidationErrors(errors)

        where_sql = f" WHERE {' AND '.join(where)}" if where else ""
        base = f"FROM predictions p JOIN models m ON m.id = p.model{where_sql}"
        with self.db.read() as conn:
            total = conn.execute(f"SELECT COUNT(*) {base}", params).fetchone()[0]
            heads = conn.execute(
                f"SELECT p.* {base} ORDER BY p.id LIMIT ? OFFSET ?",
                params + [per_page, (page - 1) * per_page],
            ).fetchall()
            items = []
            for head in heads:
                rows = conn.execute(
                    "SELECT * FROM prediction_rows WHERE prediction_id = ? ORDER BY idx",
                    (head["id"],),
                ).fetchall()
                items.append(self._prediction_from_rows(head, rows).to_wire())
        return PageEnvelope(
            items=tuple(items), page=page, per_page=per_page, total_items=total
        )


def _parse_bool(value: Any) -> bool | None:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().lower() in ("true", "false"):
        return value.strip().lower() == "true"
    return None


def _page_errors(page: Any, per_page: Any, max_per_page: int) -> list[FieldError]:
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
