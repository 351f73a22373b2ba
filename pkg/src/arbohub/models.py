"""Core domain records and enumerations shared across the package."""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date

DISEASES = ("dengue", "zika", "chikungunya")
TIME_RESOLUTIONS = ("day", "week", "month", "year")
ADM_LEVELS = (0, 1, 2, 3)

IMPLEMENTATION_LANGUAGES = (
    "Python",
    "R",
    "Julia",
    "C",
    "C++",
    "C#",
    "Rust",
    "Go",
    "Java",
    "JavaScript",
    "Kotlin",
    "Zig",
    "other",
)

# IBGE two-digit state codes and their two-letter UF abbreviations.
UF_BY_STATE_CODE = {
    11: "RO", 12: "AC", 13: "AM", 14: "RR", 15: "PA", 16: "AP", 17: "TO",
    21: "MA", 22: "PI", 23: "CE", 24: "RN", 25: "PB", 26: "PE", 27: "AL",
    28: "SE", 29: "BA", 31: "MG", 32: "ES", 33: "RJ", 35: "SP", 41: "PR",
    42: "SC", 43: "RS", 50: "MS", 51: "MT", 52: "GO", 53: "DF",
}
STATE_CODE_BY_UF = {uf: code for code, uf in UF_BY_STATE_CODE.items()}


@dataclass(frozen=True)
class ModelRecord:
    """Registered forecasting model metadata."""

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
    sprint: bool = False
    id: int | None = None
    owner: int | None = None

    def with_identity(self, id: int, owner: int) -> "ModelRecord":
        return replace(self, id=id, owner=owner)

    @classmethod
    def from_wire(cls, document: dict) -> "ModelRecord":
        return cls(
            id=document.get("id"),
            name=document["name"],
            description=document.get("description", ""),
            repository=document["repository"],
            implementation_language=document["implementation_language"],
            disease=document["disease"],
            temporal=document["temporal"],
            spatial=document["spatial"],
            categorical=document["categorical"],
            adm_level=document["adm_level"],
            time_resolution=document["time_resolution"],
            sprint=document.get("sprint", False),
            owner=document.get("owner"),
        )

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "repository": self.repository,
            "implementation_language": self.implementation_language,
            "disease": self.disease,
            "temporal": self.temporal,
            "spatial": self.spatial,
            "categorical": self.categorical,
            "adm_level": self.adm_level,
            "time_resolution": self.time_resolution,
            "sprint": self.sprint,
            "owner": self.owner,
        }


@dataclass(frozen=True)
class PredictionRow:
    """One forecast point: a date plus a median and its interval bounds.

    Exactly the adm field matching the owning model's adm_level is
    guaranteed non-null after validation; the others are optional.
    """

    date: date
    pred: float
    lower: float
    upper: float
    adm_0: str | None = None
    adm_1: str | None = None
    adm_2: int | None = None
    adm_3: int | None = None

    def adm_key(self, adm_level: int) -> str | int | None:
        return (self.adm_0, self.adm_1, self.adm_2, self.adm_3)[adm_level]

    def to_wire(self) -> dict:
        return {
            "date": self.date.isoformat(),
            "pred": self.pred,
            "lower": self.lower,
            "upper": self.upper,
            "adm_0": self.adm_0,
            "adm_1": self.adm_1,
            "adm_2": self.adm_2,
            "adm_3": self.adm_3,
        }


@dataclass(frozen=True)
class PredictionRecord:
    """One validated prediction upload for a registered model."""

    model: int
    description: str
    commit: str
    predict_date: date
    rows: tuple[PredictionRow, ...]
    adm_level: int
    id: int | None = None

    def with_id(self, id: int) -> "PredictionRecord":
        return replace(self, id=id)

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "model": self.model,
            "description": self.description,
            "commit": self.commit,
            "predict_date": self.predict_date.isoformat(),
            "adm_level": self.adm_level,
            "prediction": [row.to_wire() for row in self.rows],
        }


@dataclass(frozen=True)
class Account:
    """A local account that owns models; authorized by its API key."""

    id: int
    name: str
    created_at: str
    active: bool = True

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "created_at": self.created_at,
            "active": self.active,
        }
