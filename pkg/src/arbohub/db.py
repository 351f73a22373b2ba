"""Embedded sqlite storage shared by the datastore and the registry.

A single serialized connection: every operation runs under one lock and
materializes its results before returning, so readers always see a
consistent snapshot and writes are atomic per transaction. The storage
engine is deliberately thin; anything speaking the same handful of SQL
statements could replace it.
"""

from __future__ import annotations

import sqlite3
import threading
from contextlib import contextmanager
from pathlib import Path

_SCHEMA = """
CREATE TABLE IF NOT EXISTS accounts (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    name TEXT NOT NULL,
    key_salt TEXT NOT NULL,
    key_hash TEXT NOT NULL UNIQUE,
    created_at TEXT NOT NULL,
    active INTEGER NOT NULL DEFAULT 1
);

CREATE TABLE IF NOT EXISTS models (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    name TEXT NOT NULL,
    description TEXT NOT NULL DEFAULT '',
    repository TEXT NOT NULL,
    implementation_language TEXT NOT NULL,
    disease TEXT NOT NULL,
    temporal INTEGER NOT NULL,
    spatial INTEGER NOT NULL,
    categorical INTEGER NOT NULL,
    adm_level INTEGER NOT NULL,
    time_resolution TEXT NOT NULL,
    sprint INTEGER NOT NULL DEFAULT 0,
    owner INTEGER NOT NULL REFERENCES accounts(id)
);

CREATE TABLE IF NOT EXISTS predictions (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    model INTEGER NOT NULL REFERENCES models(id),
    description TEXT NOT NULL DEFAULT '',
    commit_hash TEXT NOT NULL,
    predict_date TEXT NOT NULL,
    adm_level INTEGER NOT NULL
);

CREATE TABLE IF NOT EXISTS prediction_rows (
    prediction_id INTEGER NOT NULL REFERENCES predictions(id),
    idx INTEGER NOT NULL,
    date TEXT NOT NULL,
    pred REAL NOT NULL,
    lower REAL NOT NULL,
    upper REAL NOT NULL,
    adm_0 TEXT,
    adm_1 TEXT,
    adm_2 INTEGER,
    adm_3 INTEGER,
    PRIMARY KEY (prediction_id, idx)
);

CREATE TABLE IF NOT EXISTS infodengue (
    disease TEXT NOT NULL,
    municipio_geocodigo INTEGER NOT NULL,
    SE INTEGER NOT NULL,
    data_iniSE TEXT NOT NULL,
    casos INTEGER NOT NULL,
    casos_est REAL NOT NULL,
    casos_prov INTEGER,
    p_rt1 REAL NOT NULL,
    p_inc100k REAL NOT NULL,
    nivel INTEGER NOT NULL,
    versao_modelo TEXT,
    Rt REAL NOT NULL,
    municipio_nome TEXT,
    pop INTEGER NOT NULL,
    receptivo INTEGER NOT NULL,
    transmissao INTEGER NOT NULL,
    nivel_inc INTEGER NOT NULL,
    PRIMARY KEY (disease, municipio_geocodigo, SE)
);

CREATE TABLE IF NOT EXISTS climate (
    geocodigo INTEGER NOT NULL,
    date TEXT NOT NULL,
    temp_min REAL NOT NULL,
    temp_med REAL NOT NULL,
    temp_max REAL NOT NULL,
    precip_min REAL NOT NULL,
    precip_med REAL NOT NULL,
    precip_max REAL NOT NULL,
    precip_tot REAL NOT NULL,
    pressao_min REAL NOT NULL,
    pressao_med REAL NOT NULL,
    pressao_max REAL NOT NULL,
    umid_min REAL NOT NULL,
    umid_med REAL NOT NULL,
    umid_max REAL NOT NULL,
    PRIMARY KEY (geocodigo, date)
);

CREATE TABLE IF NOT EXISTS episcanner (
    disease TEXT NOT NULL,
    geocode INTEGER NOT NULL,
    year INTEGER NOT NULL,
    CID10 TEXT,
    muni_name TEXT,
    peak_week REAL,
    beta REAL,
    gamma REAL,
    R0 REAL NOT NULL,
    total_cases INTEGER NOT NULL,
    alpha REAL,
    sum_res REAL,
    ep_ini TEXT NOT NULL,
    ep_end TEXT NOT NULL,
    ep_dur INTEGER NOT NULL,
    PRIMARY KEY (disease, geocode, year)
);

CREATE TABLE IF NOT EXISTS ovitrap (
    trap_id TEXT NOT NULL,
    collection_date TEXT NOT NULL,
    latitude REAL NOT NULL,
    longitude REAL NOT NULL,
    install_date TEXT NOT NULL,
    epi_week INTEGER NOT NULL,
    year INTEGER NOT NULL,
    egg_count INTEGER NOT NULL,
    status TEXT NOT NULL,
    geocode INTEGER NOT NULL,
    PRIMARY KEY (trap_id, collection_date)
);
"""


class Database:
    """One sqlite connection guarded by a re-entrant lock."""

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        if self.path != ":memory:":
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._lock = threading.RLock()
        with self.transaction() as conn:
            conn.executescript(_SCHEMA)

    @contextmanager
    def transaction(self):
        """Serialized read-write scope; commits on exit, rolls back on error."""
        with self._lock:
            try:
                yield self._conn
                self._conn.commit()
            except BaseException:
                self._conn.rollback()
                raise

    @contextmanager
    def read(self):
        """Serialized read scope; callers must materialize rows before exit."""
        with self._lock:
            yield self._conn

    def close(self) -> None:
        with self._lock:
            self._conn.close()
