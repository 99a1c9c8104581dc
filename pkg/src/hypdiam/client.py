"""HTTP client for the service, defaulting to an in-process transport.

Without --server the CLI talks to the ASGI app directly (no socket, no
daemon), which keeps invocations self-contained and byte-reproducible;
with a base URL it speaks to a remote instance over httpx.
"""

from __future__ import annotations

import warnings

import httpx

from .errors import HypdiamError

warnings.filterwarnings("ignore", message=".*starlette.testclient.*")


class ServiceError(HypdiamError):
    def __init__(self, status, detail):
        super().__init__(f"service returned {status}: {detail}")
        self.status = status
        self.detail = detail


class ServiceClient:
    def __init__(self, server: str = None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            from fastapi.testclient import TestClient

            from .service.app import app

            self._client = TestClient(app)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code != 200:
            try:
                detail = resp.json().get("detail", resp.text)
            except Exception:
                detail = resp.text
            raise ServiceError(resp.status_code, detail)
        return resp.json()

    def get(self, path: str) -> dict:
        resp = self._client.get(path)
        if resp.status_code != 200:
            raise ServiceError(resp.status_code, resp.text)
        return resp.json()

    def close(self):
        self._client.close()
