"""HTTP client for the hub API, used by the command-line interface.

Page fetches are pipelined up to four in flight; items are always
assembled in page order. Transport failures are retried before raising
NetworkError; 4xx/5xx answers raise ServerRejection with the parsed body.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping
from urllib.parse import urlsplit

import httpx

_MAX_IN_FLIGHT = 4


class ClientError(Exception):
    exit_code = 3


class NetworkError(ClientError):
    exit_code = 2


class ServerRejection(ClientError):
    """The server answered with an error status."""

    def __init__(self, status: int, body: Any):
        self.status = status
        self.body = body
        message = body.get("message") if isinstance(body, dict) else str(body)
        super().__init__(f"server answered {status}: {message}")

    @property
    def exit_code(self) -> int:
        return 1 if self.status == 422 else 3

    @property
    def details(self) -> list[dict]:
        if isinstance(self.body, dict):
            return self.body.get("details") or []
        return []


@dataclass(frozen=True)
class ClientConfig:
    """Connection settings; flags beat ARBOHUB_* env vars beat the config file."""

    api_url: str
    api_key: str | None = None
    timeout: float = 30.0
    retries: int = 3

    def __post_init__(self) -> None:
        parts = urlsplit(self.api_url)
        if parts.scheme not in ("http", "https") or not parts.netloc:
            raise ValueError(f"api_url must be an absolute http(s) URL, got {self.api_url!r}")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def resolve(
        cls,
        api_url: str | None = None,
        api_key: str | None = None,
        timeout: float | None = None,
        retries: int | None = None,
        config_file: str | Path | None = None,
        env: Mapping[str, str] = os.environ,
    ) -> "ClientConfig":
        from_file: dict[str, Any] = {}
        path = config_file or env.get("ARBOHUB_CONFIG")
        if path and Path(path).is_file():
            from_file = json.loads(Path(path).read_text())
        merged = {
            "api_url": api_url or env.get("ARBOHUB_API_URL") or from_file.get("api_url"),
            "api_key": api_key or env.get("ARBOHUB_API_KEY") or from_file.get("api_key"),
            "timeout": timeout if timeout is not None else from_file.get("timeout", 30.0),
            "retries": retries if retries is not None else from_file.get("retries", 3),
        }
        if not merged["api_url"]:
            raise ValueError(
                "no API url configured; pass --api-url, set ARBOHUB_API_URL, "
                "or put api_url in the config file"
            )
        return cls(**merged)


class ApiClient:
    def __init__(self, config: ClientConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        headers = {"X-API-Key": config.api_key} if config.api_key else {}
        self._client = httpx.Client(
            base_url=config.api_url,
            timeout=config.timeout,
            headers=headers,
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ApiClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _request(self, method: str, path: str, **kwargs) -> httpx.Response:
        last_error: Exception | None = None
        for attempt in range(max(1, self.config.retries)):
            try:
                return self._client.request(method, path, **kwargs)
            except httpx.TransportError as exc:
                last_error = exc
                time.sleep(min(0.2 * (attempt + 1), 1.0))
        raise NetworkError(f"{method} {path} failed after {self.config.retries} attempts: {last_error}")

    def _json(self, response: httpx.Response) -> Any:
        if response.status_code >= 400:
            try:
                body = response.json()
            except ValueError:
                body = response.text
            raise ServerRejection(response.status_code, body)
        return response.json()

    def get_json(self, path: str, params: Mapping[str, Any] | None = None) -> Any:
        return self._json(self._request("GET", path, params=dict(params or {})))

    def post_json(self, path: str, body: Any) -> Any:
        return self._json(self._request("POST", path, json=body))

    # -- higher-level operations ---------------------------------------------

    def fetch_dataset(
        self,
        kind: str,
        filters: Mapping[str, Any] | None = None,
        per_page: int = 100,
    ) -> list[dict]:
        """All records matching the filters, concatenated across pages in order."""
        params = dict(filters or {})
        params["per_page"] = per_page

        def get_page(page: int) -> dict:
            return self.get_json(f"/api/datastore/{kind}", {**params, "page": page})

        first = get_page(1)
        items = list(first["items"])
        total_pages = first["pagination"]["total_pages"]
        if total_pages > 1:
            with ThreadPoolExecutor(max_workers=_MAX_IN_FLIGHT) as pool:
                for envelope in pool.map(get_page, range(2, total_pages + 1)):
                    items.extend(envelope["items"])
        return items

    def register_model(self, document: Mapping[str, Any]) -> dict:
        return self.post_json("/api/registry/models", dict(document))

    def get_model(self, model_id: int) -> dict:
        return self.get_json(f"/api/registry/models/{model_id}")

    def upload_prediction(self, document: Mapping[str, Any]) -> dict:
        return self.post_json("/api/registry/predictions", dict(document))

    def get_score(
        self,
        prediction_id: int,
        metric: str | None = None,
        start: str | None = None,
        end: str | None = None,
    ) -> dict:
        params = {
            key: value
            for key, value in {"metric": metric, "start": start, "end": end}.items()
            if value is not None
        }
        return self.get_json(f"/api/registry/predictions/{prediction_id}/score", params)
