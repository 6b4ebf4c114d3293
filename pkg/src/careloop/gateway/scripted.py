"""Deterministic scripted backend for offline testing.

Rules match a request by tag or by prompt substring, first match in
registration order wins. A rule's reply is a literal string/dict or a
callable of the request; callables must be pure so the backend stays a
pure function of (prompt, seed, schema, rules). With permissive mode on,
schema-bearing requests that match no rule get a minimal valid instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from careloop import schema as cs
from careloop.errors import NoMatchingRuleError
from careloop.gateway.base import BackendReply, ModelRequest
from careloop.gateway.embeddings import HashingEmbedder

Reply = Any  # str | dict | Callable[[ModelRequest], str | dict]


@dataclass(frozen=True)
class ScriptedRule:
    reply: Reply
    tag: str | None = None
    contains: str | None = None
    latency_s: float = 0.0

    def matches(self, request: ModelRequest) -> bool:
        if self.tag is not None and request.tag == self.tag:
            return True
        if self.contains is not None and self.contains in request.prompt:
            return True
        return False


class ScriptedBackend:
    def __init__(
        self,
        rules: Sequence[ScriptedRule] = (),
        permissive: bool = False,
        embedder: HashingEmbedder | None = None,
        default_latency_s: float = 0.0,
    ):
        self._rules: list[ScriptedRule] = list(rules)
        self._permissive = permissive
        self._embedder = embedder or HashingEmbedder()
        self._default_latency = default_latency_s

    def add_rule(
        self,
        reply: Reply,
        tag: str | None = None,
        contains: str | None = None,
        latency_s: float = 0.0,
    ) -> None:
        self._rules.append(ScriptedRule(reply=reply, tag=tag, contains=contains, latency_s=latency_s))

    def invoke(self, request: ModelRequest, compiled_schema: dict | None) -> BackendReply:
        for rule in self._rules:
            if rule.matches(request):
                payload = rule.reply(request) if callable(rule.reply) else rule.reply
                return BackendReply(payload=payload, latency_s=rule.latency_s or self._default_latency)
        if request.schema is not None and self._permissive:
            return BackendReply(payload=cs.minimal_instance(request.schema), latency_s=self._default_latency)
        raise NoMatchingRuleError(
            f"no scripted rule matches request tag={request.tag!r} "
            f"prompt[:60]={request.prompt[:60]!r}"
        )

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        return self._embedder.embed(texts)
