"""HTTP backend for real model endpoints.

Wire format: POST {base_url}/generate with
    {"prompt", "schema", "temperature", "seed", "max_output_tokens"}
returning {"text": ...} for free text or {"structured": ..., "raw_text": ...}
for schema-guided calls; POST {base_url}/embed with {"texts": [...]}
returning {"vectors": [[...], ...]}. The compiled JSON Schema document is
forwarded so capable backends can decode under the constraint; the gateway
still re-validates.

Configuration comes from CARELOOP_MODEL_URL / CARELOOP_MODEL_TOKEN unless
passed explicitly.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np
import requests

from careloop.errors import BackendUnreachableError, GatewayTimeout
from careloop.gateway.base import BackendReply, ModelRequest

ENV_URL = "CARELOOP_MODEL_URL"
ENV_TOKEN = "CARELOOP_MODEL_TOKEN"


class RemoteBackend:
    def __init__(self, base_url: str | None = None, token: str | None = None, session: requests.Session | None = None):
        self.base_url = (base_url or os.environ.get(ENV_URL, "")).rstrip("/")
        if not self.base_url:
            raise ValueError(f"remote backend needs a base URL (arg or ${ENV_URL})")
        self.token = token if token is not None else os.environ.get(ENV_TOKEN)
        self._session = session or requests.Session()

    def _headers(self) -> dict:
        if self.token:
            return {"Authorization": f"Bearer {self.token}"}
        return {}

    def invoke(self, request: ModelRequest, compiled_schema: dict | None) -> BackendReply:
        body = {
            "prompt": request.prompt,
            "schema": compiled_schema,
            "temperature": request.temperature,
            "seed": request.seed,
            "max_output_tokens": request.max_output_tokens,
        }
        timeout = request.latency_budget_ms / 1000.0
        try:
            resp = self._session.post(
                f"{self.base_url}/generate", json=body, headers=self._headers(), timeout=timeout
            )
        except requests.Timeout as exc:
            raise GatewayTimeout(f"remote call exceeded {timeout:.1f}s") from exc
        except requests.RequestException as exc:
            raise BackendUnreachableError(f"cannot reach model endpoint {self.base_url}: {exc}") from exc
        resp.raise_for_status()
        data = resp.json()
        if "structured" in data:
            return BackendReply(payload=data["structured"])
        return BackendReply(payload=data["text"])

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        try:
            resp = self._session.post(
                f"{self.base_url}/embed", json={"texts": list(texts)}, headers=self._headers(), timeout=60
            )
        except requests.RequestException as exc:
            raise BackendUnreachableError(f"cannot reach model endpoint {self.base_url}: {exc}") from exc
        resp.raise_for_status()
        return np.asarray(resp.json()["vectors"], dtype=np.float64)
