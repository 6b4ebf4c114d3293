"""Shared domain types.

All types are immutable values except AgentState, which is mutated only
through the owning session's single-writer contract. Every type has a
canonical JSON form (snake_case fields in definition order) produced by
to_dict()/from_dict(); canonical_json() is bit-stable across runs.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Iterable, Iterator, Optional, Sequence

DOC_ID_PATTERN = re.compile(r"^[a-z0-9]+$")

NOT_AVAILABLE = "N/A"


class Corpus(str, Enum):
    NICE = "NICE"
    BMJ = "BMJ"
    OTHER = "OTHER"


class Role(str, Enum):
    PATIENT = "patient"
    DOCTOR = "doctor"
    SYSTEM_REPORT = "system_report"


def canonical_json(payload: Any) -> str:
    """Stable JSON text: no whitespace, preserved key order, UTF-8 verbatim."""
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


@dataclass(frozen=True)
class GuidelineDoc:
    """A normalized Markdown guideline document."""

    doc_id: str
    corpus: Corpus
    title: str
    abstract: str
    body_markdown: str
    token_count: int

    def __post_init__(self):
        if not DOC_ID_PATTERN.match(self.doc_id):
            raise ValueError(f"doc_id must be lowercase alphanumeric: {self.doc_id!r}")
        if self.token_count < 0:
            raise ValueError("token_count must be non-negative")

    def with_abstract(self, title: str, abstract: str) -> "GuidelineDoc":
        return replace(self, title=title, abstract=abstract)

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "corpus": self.corpus.value,
            "title": self.title,
            "abstract": self.abstract,
            "body_markdown": self.body_markdown,
            "token_count": self.token_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GuidelineDoc":
        return cls(
            doc_id=data["doc_id"],
            corpus=Corpus(data["corpus"]),
            title=data["title"],
            abstract=data["abstract"],
            body_markdown=data["body_markdown"],
            token_count=data["token_count"],
        )


SUMMARY_FIELDS = (
    "chief_complaint",
    "history_of_present_illness",
    "confirmed_positive_symptoms",
    "confirmed_negative_symptoms",
    "demographics",
    "medical_history",
    "social_history",
    "family_history",
    "drug_history",
    "other_details",
)


@dataclass(frozen=True)
class PatientSummary:
    """Running free-text summary of everything known about the patient.

    "N/A" marks fields with no information yet; fields are never None.
    """

    chief_complaint: str = NOT_AVAILABLE
    history_of_present_illness: str = NOT_AVAILABLE
    confirmed_positive_symptoms: str = NOT_AVAILABLE
    confirmed_negative_symptoms: str = NOT_AVAILABLE
    demographics: str = NOT_AVAILABLE
    medical_history: str = NOT_AVAILABLE
    social_history: str = NOT_AVAILABLE
    family_history: str = NOT_AVAILABLE
    drug_history: str = NOT_AVAILABLE
    other_details: str = NOT_AVAILABLE

    def __post_init__(self):
        for f in fields(self):
            if not isinstance(getattr(self, f.name), str):
                raise ValueError(f"summary field {f.name} must be a string")

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in SUMMARY_FIELDS}

    @classmethod
    def from_dict(cls, data: dict) -> "PatientSummary":
        return cls(**{name: data[name] for name in SUMMARY_FIELDS})


@dataclass(frozen=True)
class Differential:
    """Most probable diagnosis plus ordered plausible alternatives."""

    probable_diagnosis: str
    plausible_alternative_diagnoses: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.probable_diagnosis:
            raise ValueError("probable_diagnosis must be non-empty")
        object.__setattr__(
            self,
            "plausible_alternative_diagnoses",
            tuple(self.plausible_alternative_diagnoses),
        )
        alts = self.plausible_alternative_diagnoses
        if len(set(alts)) != len(alts):
            raise ValueError("alternative diagnoses contain duplicates")
        if self.probable_diagnosis in alts:
            raise ValueError("alternatives must not repeat the probable diagnosis")

    @classmethod
    def normalized(cls, probable: str, alternatives: Iterable[str]) -> "Differential":
        """Build a valid differential by deduping in order and dropping the
        probable diagnosis from the alternatives."""
        seen = set()
        alts = []
        for alt in alternatives:
            if alt and alt != probable and alt not in seen:
                seen.add(alt)
                alts.append(alt)
        return cls(probable or "undetermined", tuple(alts))

    def as_list(self) -> list[str]:
        return [self.probable_diagnosis, *self.plausible_alternative_diagnoses]

    def to_dict(self) -> dict:
        return {
            "probable_diagnosis": self.probable_diagnosis,
            "plausible_alternative_diagnoses": list(self.plausible_alternative_diagnoses),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Differential":
        return cls(
            probable_diagnosis=data["probable_diagnosis"],
            plausible_alternative_diagnoses=tuple(data["plausible_alternative_diagnoses"]),
        )


@dataclass(frozen=True)
class ActionItem:
    """One management recommendation with citations into the plan's provenance."""

    item: str
    citations: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "citations", tuple(self.citations))

    def to_dict(self) -> dict:
        return {"item": self.item, "citations": list(self.citations)}

    @classmethod
    def from_dict(cls, data: dict) -> "ActionItem":
        return cls(item=data["item"], citations=tuple(data.get("citations", ())))


@dataclass(frozen=True)
class PlanReasoning:
    """The reasoning trace emitted alongside a plan."""

    analysis: tuple[str, ...] = ()
    management_goals: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "analysis", tuple(self.analysis))
        object.__setattr__(self, "management_goals", tuple(self.management_goals))

    def to_dict(self) -> dict:
        return {
            "analysis": list(self.analysis),
            "management_goals": list(self.management_goals),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PlanReasoning":
        return cls(
            analysis=tuple(data.get("analysis", ())),
            management_goals=tuple(data.get("management_goals", ())),
        )


PLAN_CATEGORIES = (
    "in_visit_investigations",
    "ordered_investigations",
    "recommendations_or_actions",
)


@dataclass(frozen=True)
class ManagementPlan:
    """Three categories of cited actions plus the retrieval provenance.

    Construction does not enforce citation containment (lenient citation
    verification needs to inspect violating plans); pipelines guarantee it
    on every stored plan. citation_violations() lists any offenders.
    """

    in_visit_investigations: tuple[ActionItem, ...] = ()
    ordered_investigations: tuple[ActionItem, ...] = ()
    recommendations_or_actions: tuple[ActionItem, ...] = ()
    provenance: tuple[str, ...] = ()
    reasoning: PlanReasoning = field(default_factory=PlanReasoning)

    def __post_init__(self):
        for category in PLAN_CATEGORIES:
            object.__setattr__(self, category, tuple(getattr(self, category)))
        object.__setattr__(self, "provenance", tuple(sorted(set(self.provenance))))

    def items(self) -> Iterator[tuple[str, int, ActionItem]]:
        for category in PLAN_CATEGORIES:
            for i, item in enumerate(getattr(self, category)):
                yield category, i, item

    def citation_violations(self) -> list[tuple[str, int, str]]:
        allowed = set(self.provenance)
        return [
            (category, i, cite)
            for category, i, item in self.items()
            for cite in item.citations
            if cite not in allowed
        ]

    def is_empty(self) -> bool:
        return not any(getattr(self, category) for category in PLAN_CATEGORIES)

    def to_dict(self) -> dict:
        return {
            "in_visit_investigations": [a.to_dict() for a in self.in_visit_investigations],
            "ordered_investigations": [a.to_dict() for a in self.ordered_investigations],
            "recommendations_or_actions": [a.to_dict() for a in self.recommendations_or_actions],
            "provenance": list(self.provenance),
            "reasoning": self.reasoning.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ManagementPlan":
        return cls(
            in_visit_investigations=tuple(
                ActionItem.from_dict(a) for a in data["in_visit_investigations"]
            ),
            ordered_investigations=tuple(
                ActionItem.from_dict(a) for a in data["ordered_investigations"]
            ),
            recommendations_or_actions=tuple(
                ActionItem.from_dict(a) for a in data["recommendations_or_actions"]
            ),
            provenance=tuple(data.get("provenance", ())),
            reasoning=PlanReasoning.from_dict(data.get("reasoning", {})),
        )


@dataclass(frozen=True)
class Message:
    """One transcript entry; indices are assigned by the transcript."""

    role: Role
    content: str
    visit_number: int
    index: int

    def to_dict(self) -> dict:
        return {
            "role": self.role.value,
            "content": self.content,
            "visit_number": self.visit_number,
            "index": self.index,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Message":
        return cls(
            role=Role(data["role"]),
            content=data["content"],
            visit_number=data["visit_number"],
            index=data["index"],
        )


class Transcript:
    """Append-only message history.

    Enforces strictly increasing indices, monotone visit numbers, and the
    boundary rule: system_report messages may only appear before the first
    patient/doctor message of their visit.
    """

    def __init__(self, messages: Iterable[Message] = ()):
        self._messages: list[Message] = []
        for msg in messages:
            self._check(msg)
            self._messages.append(msg)

    def _check(self, msg: Message) -> None:
        if msg.index != len(self._messages):
            raise ValueError(f"expected index {len(self._messages)}, got {msg.index}")
        if self._messages and msg.visit_number < self._messages[-1].visit_number:
            raise ValueError("visit_number must be monotone")
        if msg.role is Role.SYSTEM_REPORT:
            dialogue_in_visit = any(
                m.visit_number == msg.visit_number and m.role is not Role.SYSTEM_REPORT
                for m in self._messages
            )
            if dialogue_in_visit:
                raise ValueError("system_report messages only appear at visit boundaries")

    def append(self, role: Role, content: str, visit_number: int) -> Message:
        msg = Message(role=role, content=content, visit_number=visit_number, index=len(self._messages))
        self._check(msg)
        self._messages.append(msg)
        return msg

    def messages(self) -> tuple[Message, ...]:
        return tuple(self._messages)

    def visit_messages(self, visit_number: int) -> tuple[Message, ...]:
        return tuple(m for m in self._messages if m.visit_number == visit_number)

    def last(self) -> Optional[Message]:
        return self._messages[-1] if self._messages else None

    def __len__(self) -> int:
        return len(self._messages)

    def __iter__(self) -> Iterator[Message]:
        return iter(self._messages)

    def to_dict(self) -> list[dict]:
        return [m.to_dict() for m in self._messages]

    @classmethod
    def from_dict(cls, data: Sequence[dict]) -> "Transcript":
        return cls(Message.from_dict(d) for d in data)


class AgentState:
    """Per-session beliefs: summary, differential, latest plan, visit number.

    The plan slot is last-write-wins by a strictly increasing stamp; stamps
    are issued with next_plan_stamp() when a planning run starts, so a stale
    run's late result never overwrites a newer plan.
    """

    def __init__(
        self,
        summary: PatientSummary | None = None,
        differential: Differential | None = None,
        plan: ManagementPlan | None = None,
        visit_number: int = 1,
        plan_timestamp: int = 0,
    ):
        if visit_number < 1:
            raise ValueError("visit_number must be >= 1")
        self.summary = summary or PatientSummary()
        self.differential = differential or Differential("undetermined")
        self.plan = plan
        self.visit_number = visit_number
        self.plan_timestamp = plan_timestamp
        self._stamp_lock = threading.Lock()
        self._stamp_counter = plan_timestamp

    def next_plan_stamp(self) -> int:
        with self._stamp_lock:
            self._stamp_counter += 1
            return self._stamp_counter

    def install_plan(self, plan: ManagementPlan, stamp: int | None = None) -> bool:
        """Install the plan if its stamp is newer than the visible one."""
        if stamp is None:
            stamp = self.next_plan_stamp()
        with self._stamp_lock:
            self._stamp_counter = max(self._stamp_counter, stamp)
        if stamp <= self.plan_timestamp:
            return False
        self.plan = plan
        self.plan_timestamp = stamp
        return True

    def replace_summary(self, summary: PatientSummary) -> None:
        self.summary = summary

    def replace_differential(self, differential: Differential) -> None:
        self.differential = differential

    def set_visit(self, visit_number: int) -> None:
        if visit_number < self.visit_number:
            raise ValueError("visit_number cannot decrease")
        self.visit_number = visit_number

    def snapshot(self) -> "AgentState":
        """Value copy safe to hand to model calls outside the session lock."""
        return AgentState(
            summary=self.summary,
            differential=self.differential,
            plan=self.plan,
            visit_number=self.visit_number,
            plan_timestamp=self.plan_timestamp,
        )

    def to_dict(self) -> dict:
        return {
            "summary": self.summary.to_dict(),
            "differential": self.differential.to_dict(),
            "plan": self.plan.to_dict() if self.plan else None,
            "visit_number": self.visit_number,
            "plan_timestamp": self.plan_timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgentState":
        return cls(
            summary=PatientSummary.from_dict(data["summary"]),
            differential=Differential.from_dict(data["differential"]),
            plan=ManagementPlan.from_dict(data["plan"]) if data.get("plan") else None,
            visit_number=data["visit_number"],
            plan_timestamp=data["plan_timestamp"],
        )
