"""The fast conversational agent.

Each patient message is answered through a three-step chain of model calls
(plan the response, draft it, refine it) that shares one fast-path latency
budget. Patient-summary and differential updates are separate single calls
meant to run in the background; the session layer schedules them and owns
all state writes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from careloop import schema as cs
from careloop.config import DEFAULT_CONFIG, RuntimeConfig
from careloop.core.render import render_state, render_transcript
from careloop.core.types import AgentState, Differential, PatientSummary, SUMMARY_FIELDS
from careloop.dialogue.prompts import PromptLibrary, variant
from careloop.gateway.base import ModelGateway, ModelRequest

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ResponseDirectives:
    thoughts: str
    directives: tuple[str, ...]
    end_visit: bool


def directives_schema() -> cs.SchemaNode:
    # The 5-directive cap is enforced by truncation after the call.
    return cs.object_of(
        [
            ("thoughts", cs.string("What the consultation needs next.")),
            ("directives", cs.sequence(cs.string(), min_items=1), "At most 5 concrete directives."),
            ("end_visit", cs.yes_no("Whether the visit can end now.")),
        ],
        doc="Response plan for the next doctor message.",
    )


def summary_schema() -> cs.SchemaNode:
    return cs.object_of(
        [(name, cs.string("'N/A' when unknown.")) for name in SUMMARY_FIELDS],
        doc="Running patient summary.",
    )


def ddx_schema() -> cs.SchemaNode:
    return cs.object_of(
        [
            ("probable_diagnosis", cs.string("Single most likely explanation.")),
            (
                "plausible_alternative_diagnoses",
                cs.sequence(cs.string()),
                "Other reasonable explanations, most to least likely.",
            ),
        ],
        doc="Differential diagnosis.",
    )


class DialogueAgent:
    def __init__(
        self,
        gateway: ModelGateway,
        prompts: PromptLibrary | None = None,
        config: RuntimeConfig = DEFAULT_CONFIG,
    ):
        self._gateway = gateway
        self._prompts = prompts or PromptLibrary()
        self._config = config

    # -- chain of reasoning ---------------------------------------------------

    def plan_response(self, state: AgentState, transcript, budget_ms: int | None = None) -> ResponseDirectives:
        last = transcript[-1] if transcript else None
        if last is None or last.role.value != "patient":
            raise ValueError("plan_response expects the last message to be from the patient")
        prompt = self._prompts.render(
            variant("plan_response", state.visit_number),
            dialogue_history=render_transcript(transcript),
            agent_state=render_state(state),
        )
        value = self._gateway.generate_structured(
            ModelRequest(
                prompt=prompt,
                tag="dialogue.plan",
                schema=directives_schema(),
                latency_budget_ms=budget_ms or self._config.fast_path_deadline_ms,
                context={"state": state, "transcript": transcript},
            )
        )
        directives = tuple(d for d in value["directives"] if d)
        if len(directives) > self._config.max_directives:
            log.warning("truncating %d directives to %d", len(directives), self._config.max_directives)
            directives = directives[: self._config.max_directives]
        return ResponseDirectives(
            thoughts=value["thoughts"],
            directives=directives,
            end_visit=value["end_visit"] == "yes",
        )

    def draft_response(
        self, state: AgentState, transcript, directives: ResponseDirectives, budget_ms: int | None = None
    ) -> str:
        prompt = self._prompts.render(
            variant("draft_response", state.visit_number),
            dialogue_history=render_transcript(transcript),
            agent_state=render_state(state),
            response_plan="\n".join(f"- {d}" for d in directives.directives),
        )
        text = self._gateway.generate_text(
            ModelRequest(
                prompt=prompt,
                tag="dialogue.draft",
                latency_budget_ms=budget_ms or self._config.fast_path_deadline_ms,
                context={"state": state, "transcript": transcript, "directives": directives},
            )
        )
        if not text.strip():
            raise ValueError("draft step produced an empty reply")
        return text

    def refine_response(self, state: AgentState, transcript, draft: str, budget_ms: int | None = None) -> str:
        if not draft:
            raise ValueError("refine_response needs a non-empty draft")
        patient_message = ""
        for msg in reversed(list(transcript)):
            if msg.role.value == "patient":
                patient_message = msg.content
                break
        prompt = self._prompts.render(
            variant("refine_response", state.visit_number),
            dialogue_history=render_transcript(transcript),
            agent_state=render_state(state),
            patient_message=patient_message,
            drafted_response=draft,
        )
        text = self._gateway.generate_text(
            ModelRequest(
                prompt=prompt,
                tag="dialogue.refine",
                latency_budget_ms=budget_ms or self._config.fast_path_deadline_ms,
                context={"state": state, "transcript": transcript, "draft": draft},
            )
        )
        # Refinement must never empty the message.
        return text if text.strip() else draft

    def reply(self, state: AgentState, transcript) -> tuple[str, ResponseDirectives]:
        """Run the full chain within one shared fast-path deadline."""
        clock = self._gateway.clock
        deadline = clock.now() + self._config.fast_path_deadline_ms / 1000.0

        def remaining() -> int:
            return max(1, int((deadline - clock.now()) * 1000))

        directives = self.plan_response(state, transcript, budget_ms=remaining())
        draft = self.draft_response(state, transcript, directives, budget_ms=remaining())
        final = self.refine_response(state, transcript, draft, budget_ms=remaining())
        return final, directives

    # -- background state updates ----------------------------------------------

    def update_patient_summary(self, state: AgentState, transcript) -> PatientSummary:
        prompt = self._prompts.render(
            "summary_update",
            dialogue_history=render_transcript(transcript),
            agent_state=render_state(state),
        )
        value = self._gateway.generate_structured(
            ModelRequest(
                prompt=prompt,
                tag="dialogue.summary",
                schema=summary_schema(),
                context={"state": state, "transcript": transcript},
            )
        )
        return PatientSummary(**{name: value[name] for name in SUMMARY_FIELDS})

    def update_differential(self, state: AgentState, transcript) -> Differential:
        has_dialogue = any(m.role.value in ("patient", "doctor") for m in transcript)
        if not has_dialogue:
            return Differential("undetermined")
        prompt = self._prompts.render(
            "ddx_update",
            dialogue_history=render_transcript(transcript),
            agent_state=render_state(state),
        )
        value = self._gateway.generate_structured(
            ModelRequest(
                prompt=prompt,
                tag="dialogue.ddx",
                schema=ddx_schema(),
                context={"state": state, "transcript": transcript},
            )
        )
        return Differential.normalized(
            value["probable_diagnosis"], value["plausible_alternative_diagnoses"]
        )
