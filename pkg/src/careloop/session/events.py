"""Append-only event log per session.

Every state transition is an event; the live path and replay share the
same apply() code, so replaying a log reproduces the exact session state
(byte-equal JSON export). Logs are JSONL; a torn final line (crash during
write) is dropped, so the last complete event wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from careloop.core.types import canonical_json

SESSION_CREATED = "session_created"
MESSAGE = "message"
SUMMARY_UPDATE = "summary_update"
DIFFERENTIAL_UPDATE = "differential_update"
PLAN_UPDATE = "plan_update"
VISIT_READY = "visit_ready_to_close"
VISIT_CLOSED = "visit_closed"
VISIT_ADVANCE = "visit_advance"

KINDS = (
    SESSION_CREATED,
    MESSAGE,
    SUMMARY_UPDATE,
    DIFFERENTIAL_UPDATE,
    PLAN_UPDATE,
    VISIT_READY,
    VISIT_CLOSED,
    VISIT_ADVANCE,
)


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    data: dict

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")

    def to_json(self) -> str:
        return canonical_json({"seq": self.seq, "kind": self.kind, "data": self.data})

    @classmethod
    def from_json(cls, line: str) -> "Event":
        raw = json.loads(line)
        return cls(seq=raw["seq"], kind=raw["kind"], data=raw["data"])


def decode_log(text: str) -> list[Event]:
    """Parse a JSONL log, tolerating a torn final line only."""
    lines = text.splitlines()
    events: list[Event] = []
    for i, line in enumerate(lines):
        if not line.strip():
            continue
        try:
            events.append(Event.from_json(line))
        except (json.JSONDecodeError, KeyError) as exc:
            if i == len(lines) - 1:
                break  # torn tail from an interrupted write
            raise ValueError(f"corrupt event log at line {i + 1}: {exc}") from exc
    for expected, event in enumerate(events):
        if event.seq != expected:
            raise ValueError(f"event log sequence gap: expected {expected}, got {event.seq}")
    return events


class SessionStore:
    """One JSONL file per session under a directory."""

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)

    def path(self, session_id: str) -> Path:
        return self._dir / f"{session_id}.jsonl"

    def append(self, session_id: str, event: Event) -> None:
        with self.path(session_id).open("a", encoding="utf-8") as fh:
            fh.write(event.to_json() + "\n")
            fh.flush()

    def load(self, session_id: str) -> list[Event]:
        path = self.path(session_id)
        if not path.exists():
            return []
        return decode_log(path.read_text(encoding="utf-8"))

    def session_ids(self) -> list[str]:
        return sorted(p.stem for p in self._dir.glob("*.jsonl"))


class MemoryStore:
    """Drop-in store keeping logs in memory (tests, ephemeral services)."""

    def __init__(self):
        self._logs: dict[str, list[Event]] = {}

    def append(self, session_id: str, event: Event) -> None:
        self._logs.setdefault(session_id, []).append(event)

    def load(self, session_id: str) -> list[Event]:
        return list(self._logs.get(session_id, ()))

    def session_ids(self) -> list[str]:
        return sorted(self._logs)


def replay_events(events: Iterable[Event], session_cls, config) -> "object":
    """Rebuild a session by applying events in order."""
    events = list(events)
    if not events or events[0].kind != SESSION_CREATED:
        raise ValueError("log must start with a session_created event")
    session = session_cls.create_from_event(events[0], config)
    for event in events[1:]:
        session.apply(event)
    return session
