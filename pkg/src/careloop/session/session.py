"""Multi-visit session state machine and the post-visit questionnaire.

A session moves through statuses active_visit -> between_visits ->
active_visit ... -> completed, advancing its visit number by exactly one
per advancement up to the configured maximum (3 by default).
Between visits no patient messages are accepted. All mutations go through
apply(event) so live operation and log replay share one code path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from careloop import schema as cs
from careloop.config import DEFAULT_CONFIG, RuntimeConfig
from careloop.core.render import render_state, render_transcript
from careloop.core.types import (
    AgentState,
    Corpus,
    Differential,
    ManagementPlan,
    PatientSummary,
    Role,
    Transcript,
    canonical_json,
)
from careloop.corpus.index import RetrievalResult
from careloop.errors import SessionError, VisitLimitError
from careloop.gateway.base import ModelGateway, ModelRequest
from careloop.session import events as ev

log = logging.getLogger(__name__)

ACTIVE_VISIT = "active_visit"
BETWEEN_VISITS = "between_visits"
COMPLETED = "completed"


def render_report(report: dict) -> str:
    provider = report.get("provider", "unknown provider")
    intervention = report.get("intervention", "")
    result = report.get("result", "")
    return f"Report from {provider} on {intervention}: {result}"


class Session:
    def __init__(self, session_id: str, scenario: dict, config: RuntimeConfig = DEFAULT_CONFIG):
        self.session_id = session_id
        self.scenario = dict(scenario)
        self.config = config
        self.state = AgentState()
        self.transcript = Transcript()
        self.status = ACTIVE_VISIT
        self.visit_closeable = False
        self.last_retrieval: RetrievalResult | None = None
        self.event_count = 0

    # -- construction ----------------------------------------------------------

    @classmethod
    def create(cls, session_id: str, scenario: dict, config: RuntimeConfig = DEFAULT_CONFIG) -> tuple["Session", ev.Event]:
        event = ev.Event(seq=0, kind=ev.SESSION_CREATED, data={"session_id": session_id, "scenario": dict(scenario)})
        session = cls.create_from_event(event, config)
        return session, event

    @classmethod
    def create_from_event(cls, event: ev.Event, config: RuntimeConfig = DEFAULT_CONFIG) -> "Session":
        if event.kind != ev.SESSION_CREATED:
            raise ValueError("first event must be session_created")
        session = cls(event.data["session_id"], event.data["scenario"], config)
        session.event_count = 1
        return session

    @classmethod
    def replay(cls, events_list, config: RuntimeConfig = DEFAULT_CONFIG) -> "Session":
        return ev.replay_events(events_list, cls, config)

    # -- event construction (validates preconditions) ---------------------------

    def next_event(self, kind: str, data: dict) -> ev.Event:
        return ev.Event(seq=self.event_count, kind=kind, data=data)

    def message_event(self, role: Role, content: str) -> ev.Event:
        if self.status != ACTIVE_VISIT:
            raise SessionError(f"session is {self.status}; no messages accepted")
        return self.next_event(
            ev.MESSAGE,
            {"role": role.value, "content": content, "visit_number": self.state.visit_number},
        )

    def close_event(self) -> ev.Event:
        if self.status != ACTIVE_VISIT:
            raise SessionError(f"cannot close a visit while {self.status}")
        return self.next_event(ev.VISIT_CLOSED, {"visit_number": self.state.visit_number})

    def advance_event(self, reports: list[dict]) -> ev.Event:
        if self.status == COMPLETED:
            raise SessionError("session is completed")
        if self.state.visit_number >= self.config.max_visits:
            raise VisitLimitError(f"visit limit of {self.config.max_visits} reached")
        return self.next_event(
            ev.VISIT_ADVANCE,
            {"new_visit": self.state.visit_number + 1, "reports": [dict(r) for r in reports]},
        )

    # -- state transition -------------------------------------------------------

    def apply(self, event: ev.Event) -> None:
        if event.seq != self.event_count:
            raise ValueError(f"event out of order: expected {self.event_count}, got {event.seq}")
        data = event.data
        if event.kind == ev.MESSAGE:
            self.transcript.append(Role(data["role"]), data["content"], data["visit_number"])
        elif event.kind == ev.SUMMARY_UPDATE:
            self.state.replace_summary(PatientSummary.from_dict(data["summary"]))
        elif event.kind == ev.DIFFERENTIAL_UPDATE:
            self.state.replace_differential(Differential.from_dict(data["differential"]))
        elif event.kind == ev.PLAN_UPDATE:
            plan = ManagementPlan.from_dict(data["plan"])
            if self.state.install_plan(plan, data["stamp"]):
                self.last_retrieval = RetrievalResult.from_dict(data["retrieval"])
        elif event.kind == ev.VISIT_READY:
            self.visit_closeable = True
        elif event.kind == ev.VISIT_CLOSED:
            if self.state.visit_number >= self.config.max_visits:
                self.status = COMPLETED
            else:
                self.status = BETWEEN_VISITS
            self.visit_closeable = False
        elif event.kind == ev.VISIT_ADVANCE:
            new_visit = data["new_visit"]
            self.state.set_visit(new_visit)
            for report in data["reports"]:
                self.transcript.append(Role.SYSTEM_REPORT, render_report(report), new_visit)
            self.status = ACTIVE_VISIT
            self.visit_closeable = False
        elif event.kind == ev.SESSION_CREATED:
            raise ValueError("session_created may only start a log")
        self.event_count += 1

    # -- views -------------------------------------------------------------------

    def patient_message_count(self, visit_number: int | None = None) -> int:
        visit = visit_number if visit_number is not None else self.state.visit_number
        return sum(
            1 for m in self.transcript if m.visit_number == visit and m.role is Role.PATIENT
        )

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "scenario": self.scenario,
            "status": self.status,
            "visit_closeable": self.visit_closeable,
            "state": self.state.to_dict(),
            "transcript": self.transcript.to_dict(),
            "last_retrieval": self.last_retrieval.to_dict() if self.last_retrieval else None,
            "event_count": self.event_count,
        }

    def export_json(self) -> str:
        return canonical_json(self.to_dict())


# -- post-visit questionnaire ------------------------------------------------

FREE_TEXT_FIELDS = (
    "deviations",
    "alternatives",
    "competing_priorities",
    "cost_effectiveness_side_effects",
    "prognosis",
    "escalation_followup",
)

QUESTIONNAIRE_PROMPT = """\
You just finished a visit with the patient below. Fill in the post-visit
review: whether and why you deviated from any of the guidelines you relied
on, other acceptable management plans, competing priorities you weighed,
the cost, effectiveness and side effects of the proposed plan, the
prognosis with and without treatment, and your recommendations for
escalation and follow-up.

=== Patient ===
{case}

=== Conversation ===
{transcript}
"""


@dataclass(frozen=True)
class PostQuestionnaire:
    differential: tuple[str, ...]
    selected_guidelines: dict[str, tuple[str, ...]]
    plan: ManagementPlan | None
    deviations: str
    alternatives: str
    competing_priorities: str
    cost_effectiveness_side_effects: str
    prognosis: str
    escalation_followup: str
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if not 1 <= len(self.differential) <= 10:
            raise ValueError("differential must carry 1..10 items")
        for corpus, ids in self.selected_guidelines.items():
            if len(ids) > 3:
                raise ValueError(f"at most 3 guidelines may be selected for {corpus}")

    def to_dict(self) -> dict:
        return {
            "differential": list(self.differential),
            "selected_guidelines": {k: list(v) for k, v in self.selected_guidelines.items()},
            "plan": self.plan.to_dict() if self.plan else None,
            **{name: getattr(self, name) for name in FREE_TEXT_FIELDS},
            "warnings": list(self.warnings),
        }


def questionnaire_schema() -> cs.SchemaNode:
    return cs.object_of(
        [(name, cs.string()) for name in FREE_TEXT_FIELDS],
        doc="Free-text post-visit reasoning fields.",
    )


def export_questionnaire(
    session: Session,
    gateway: ModelGateway,
    corpus_of: dict[str, Corpus] | None = None,
    config: RuntimeConfig = DEFAULT_CONFIG,
) -> PostQuestionnaire:
    """Structured export of the visit: differential, applicable guidelines
    (from retrieval provenance, ranked by similarity, capped per corpus),
    the latest plan, and model-generated free-text reasoning fields.
    """
    if not len(session.transcript):
        raise SessionError("questionnaire requires at least one visit with messages")
    warnings: list[str] = []

    differential = session.state.differential.as_list()
    if len(differential) > config.max_differential_items:
        differential = differential[: config.max_differential_items]

    selected: dict[str, tuple[str, ...]] = {Corpus.NICE.value: (), Corpus.BMJ.value: ()}
    plan = session.state.plan
    if plan is None:
        warnings.append("no management plan was ever produced")
    retrieval = session.last_retrieval
    if retrieval is not None and corpus_of is not None:
        provenance = set(plan.provenance) if plan else set(retrieval.doc_ids)
        ranked = sorted(
            (d for d in retrieval.doc_ids if d in provenance),
            key=lambda d: (-retrieval.scores.get(d, 0.0), d),
        )
        for member in (Corpus.NICE, Corpus.BMJ):
            ids = [d for d in ranked if corpus_of.get(d) is member]
            selected[member.value] = tuple(ids[: config.max_guidelines_per_corpus])
            if not ids:
                warnings.append(f"no {member.value} documents in the retrieval provenance")
    else:
        warnings.append("no retrieval provenance available for guideline selection")

    prompt = QUESTIONNAIRE_PROMPT.replace("{case}", render_state(session.state)).replace(
        "{transcript}", render_transcript(session.transcript)
    )
    value = gateway.generate_structured(
        ModelRequest(
            prompt=prompt,
            tag="session.questionnaire",
            schema=questionnaire_schema(),
            context={"state": session.state, "transcript": session.transcript},
        )
    )
    return PostQuestionnaire(
        differential=tuple(differential),
        selected_guidelines=selected,
        plan=plan,
        warnings=tuple(warnings),
        **{name: value[name] for name in FREE_TEXT_FIELDS},
    )
