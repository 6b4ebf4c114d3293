"""Uniform interface to text generation, structured generation, and embedding.

The gateway owns latency budgets (per-call deadline, enforced against the
injected clock), the validate-retry loop for structured outputs, and an
independent re-validation pass through the jsonschema library on every
accepted value. Backends stay dumb: they turn a request into text or a
parsed JSON value plus a simulated latency.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Protocol, Sequence

import jsonschema
import numpy as np

from careloop import schema as cs
from careloop.clock import REAL_CLOCK
from careloop.errors import GatewayTimeout, SchemaViolationError


@dataclass(frozen=True)
class ModelRequest:
    """One generation request.

    `tag` names the pipeline stage (e.g. "mx.draft") so scripted rules can
    target it; `context` carries the structured inputs that the prompt also
    renders, for scripted generators only — it is never sent to remote
    backends.
    """

    prompt: str
    tag: str = ""
    schema: cs.SchemaNode | None = None
    temperature: float = 0.0
    seed: int = 0
    max_output_tokens: int = 4096
    latency_budget_ms: int = 60_000
    context: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")
        if self.latency_budget_ms <= 0:
            raise ValueError("latency_budget_ms must be positive")


@dataclass(frozen=True)
class BackendReply:
    """Raw backend output: text or an already-parsed JSON value."""

    payload: Any
    latency_s: float = 0.0


class Backend(Protocol):
    def invoke(self, request: ModelRequest, compiled_schema: dict | None) -> BackendReply: ...

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class ModelGateway:
    """Schema-aware front door for all model calls."""

    def __init__(self, backend: Backend, clock=REAL_CLOCK, schema_retries: int = 2):
        self._backend = backend
        self._clock = clock
        self._retries = schema_retries

    @property
    def clock(self):
        return self._clock

    def generate_text(self, request: ModelRequest) -> str:
        deadline = self._clock.now() + request.latency_budget_ms / 1000.0
        reply = self._invoke(request, None, deadline)
        payload = reply.payload
        if not isinstance(payload, str):
            payload = json.dumps(payload, ensure_ascii=False)
        return payload

    def generate_structured(self, request: ModelRequest) -> Any:
        if request.schema is None:
            raise ValueError("generate_structured requires a request schema")
        compiled = cs.compile_schema(request.schema)
        deadline = self._clock.now() + request.latency_budget_ms / 1000.0
        last_report = None
        for attempt in range(self._retries + 1):
            attempt_req = replace(request, seed=request.seed + attempt)
            reply = self._invoke(attempt_req, compiled, deadline)
            value = reply.payload
            if isinstance(value, str):
                try:
                    value = json.loads(value)
                except json.JSONDecodeError as exc:
                    last_report = cs.ValidationReport(
                        ok=False, violations=(cs.Violation("$", f"invalid JSON: {exc}"),)
                    )
                    continue
            report = cs.validate(value, request.schema)
            if report.ok:
                # Independent second opinion against the compiled document.
                jsonschema.validate(value, compiled)
                return value
            last_report = report
        detail = last_report.describe() if last_report else "no report"
        raise SchemaViolationError(
            f"output for {request.tag or 'request'} failed schema validation "
            f"after {self._retries + 1} attempts: {detail}",
            violations=last_report.violations if last_report else (),
        )

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if len(texts) == 0:
            raise ValueError("embed requires a non-empty input sequence")
        vectors = self._backend.embed(texts)
        return np.asarray(vectors, dtype=np.float64)

    def _invoke(self, request: ModelRequest, compiled: dict | None, deadline: float) -> BackendReply:
        remaining = deadline - self._clock.now()
        if remaining <= 0:
            raise GatewayTimeout(f"latency budget exhausted before call {request.tag or ''!r}")
        capped = replace(request, latency_budget_ms=max(1, int(remaining * 1000)))
        reply = self._backend.invoke(capped, compiled)
        if reply.latency_s > 0:
            with self._clock.scoped():
                if reply.latency_s > remaining:
                    self._clock.sleep(remaining)
                    raise GatewayTimeout(
                        f"call {request.tag or ''!r} needed {reply.latency_s:.1f}s "
                        f"with {remaining:.1f}s remaining"
                    )
                self._clock.sleep(reply.latency_s)
        return reply
