"""Top-down multi-visit dialogue synthesis.

Pipeline: patient vignette -> per-visit outlines -> per-visit dialogue
(drafted in a single structured call, optionally revised against a
critique) -> assembled multi-visit training record with inter-visit report
blocks. Vignettes come from a fixture corpus; there is no web-search stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from careloop import schema as cs
from careloop.config import DEFAULT_CONFIG, LIKELIHOOD_SCALE, RuntimeConfig
from careloop.gateway.base import ModelGateway, ModelRequest

END_MARKER = "END_OF_DIALOGUE"

OUTLINES_PROMPT = """\
Simulate a patient's path through an online clinic, visit by visit.

=== Clinical knowledge ===
{knowledge}

=== Patient ===
Condition: {condition}
At the first visit: {vignette}

Plan between {min_visits} and {max_visits} online visits. The doctor starts
knowing nothing about this patient. At each visit the doctor reviews any
interventions completed since last time, works toward a cautious
differential diagnosis through conversation, shares it with the patient,
and closes by updating likelihoods and ordering the next management steps.
"""

DIALOGUE_PROMPT = """\
Write one visit of an online text consultation, playing both the patient
and the doctor.

Rules: 20 to 40 messages; roles are only 'patient' and 'doctor'; realistic
chat messages with no stage notes or placeholders; the final message is the
single tag {end_marker}.

The patient (condition: {condition}): {vignette}
They open with their presenting concern on a first visit, and voice their
expectations and questions throughout.

The doctor starts with no knowledge of the patient, reviews any reports
provided in the outline, investigates through questions, shares a
differential, and ends with tailored next management steps.

=== Earlier visits ===
{history}

=== Outline for this visit ===
{outline}
{revision_block}
"""

REVISION_BLOCK = """
=== Draft to improve ===
{draft}

=== Critique to apply ===
{critique}

Rewrite the dialogue implementing the critique; if the critique found no
issues, return the draft unchanged.
"""

CRITIQUE_PROMPT = """\
You are an exacting reviewer of simulated medical conversations. Assess the
doctor's performance and the realism of the dialogue below.

=== Reference knowledge ===
{knowledge}

=== Patient ===
Condition: {condition}
{vignette}

=== Outline the dialogue should follow ===
{outline}

=== Dialogue ===
{dialogue}

Report what was done well and badly on communication and empathy, on
informing and teaching the patient, on actionable clinical management, and
on the soundness of the clinical reasoning; then judge whether the doctor
could realistically infer the diagnosis from what the patient shared,
whether the diagnosis was correct, whether actionable management steps were
given, and whether the plan agrees with the reference knowledge.
"""


# -- domain types ---------------------------------------------------------------


@dataclass(frozen=True)
class Intervention:
    provider: str
    intervention: str
    goal: str
    result: str

    def to_dict(self) -> dict:
        return {
            "provider": self.provider,
            "intervention": self.intervention,
            "goal": self.goal,
            "result": self.result,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Intervention":
        return cls(data["provider"], data["intervention"], data["goal"], data["result"])


@dataclass(frozen=True)
class InferredDx:
    condition: str
    likelihood: str

    def __post_init__(self):
        if self.likelihood not in LIKELIHOOD_SCALE:
            raise ValueError(f"likelihood {self.likelihood!r} not on the 6-level scale")

    def to_dict(self) -> dict:
        return {"condition": self.condition, "likelihood": self.likelihood}

    @classmethod
    def from_dict(cls, data: dict) -> "InferredDx":
        return cls(data["condition"], data["likelihood"])


@dataclass(frozen=True)
class VisitOutline:
    visit_number: int
    completed_interventions: tuple[Intervention, ...]
    patient_goals: tuple[str, ...]
    doctor_goals: tuple[str, ...]
    discussion_topics: tuple[str, ...]
    doctor_learned_patient_facts: tuple[str, ...]
    doctor_learned_patient_symptoms: tuple[str, ...]
    doctor_inferred_dx: tuple[InferredDx, ...]
    planned_interventions: tuple[str, ...]
    next_visit_schedule: str

    def to_dict(self) -> dict:
        return {
            "visit_number": self.visit_number,
            "completed_interventions": [i.to_dict() for i in self.completed_interventions],
            "patient_goals": list(self.patient_goals),
            "doctor_goals": list(self.doctor_goals),
            "discussion_topics": list(self.discussion_topics),
            "doctor_learned_patient_facts": list(self.doctor_learned_patient_facts),
            "doctor_learned_patient_symptoms": list(self.doctor_learned_patient_symptoms),
            "doctor_inferred_dx": [d.to_dict() for d in self.doctor_inferred_dx],
            "planned_interventions": list(self.planned_interventions),
            "next_visit_schedule": self.next_visit_schedule,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VisitOutline":
        return cls(
            visit_number=data["visit_number"],
            completed_interventions=tuple(Intervention.from_dict(i) for i in data["completed_interventions"]),
            patient_goals=tuple(data["patient_goals"]),
            doctor_goals=tuple(data["doctor_goals"]),
            discussion_topics=tuple(data["discussion_topics"]),
            doctor_learned_patient_facts=tuple(data["doctor_learned_patient_facts"]),
            doctor_learned_patient_symptoms=tuple(data["doctor_learned_patient_symptoms"]),
            doctor_inferred_dx=tuple(InferredDx.from_dict(d) for d in data["doctor_inferred_dx"]),
            planned_interventions=tuple(data["planned_interventions"]),
            next_visit_schedule=data["next_visit_schedule"],
        )


@dataclass(frozen=True)
class SimMessage:
    role: str  # "patient" | "doctor"
    content: str

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}

    @classmethod
    def from_dict(cls, data: dict) -> "SimMessage":
        return cls(data["role"], data["content"])


@dataclass(frozen=True)
class DialogueFlags:
    missing_terminal: bool = False
    length_out_of_range: bool = False
    alternation_broken: bool = False

    def any(self) -> bool:
        return self.missing_terminal or self.length_out_of_range or self.alternation_broken


@dataclass(frozen=True)
class GoodBad:
    good: tuple[str, ...] = ()
    bad: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"good": list(self.good), "bad": list(self.bad)}


@dataclass(frozen=True)
class Critique:
    communication: GoodBad
    teaching: GoodBad
    clinical_management: GoodBad
    clinical_reasoning: GoodBad
    realistic_simulation: bool
    correct_differential_diagnosis: bool
    planned_management_steps: bool
    guidelines_compliance: bool

    def gate_passed(self) -> bool:
        return (
            self.realistic_simulation
            and self.correct_differential_diagnosis
            and self.planned_management_steps
            and self.guidelines_compliance
        )

    def to_dict(self) -> dict:
        return {
            "communication": self.communication.to_dict(),
            "teaching": self.teaching.to_dict(),
            "clinical_management": self.clinical_management.to_dict(),
            "clinical_reasoning": self.clinical_reasoning.to_dict(),
            "realistic_simulation": self.realistic_simulation,
            "correct_differential_diagnosis": self.correct_differential_diagnosis,
            "planned_management_steps": self.planned_management_steps,
            "guidelines_compliance": self.guidelines_compliance,
        }


# -- schemas ----------------------------------------------------------------------


def outline_schema() -> cs.SchemaNode:
    intervention = cs.object_of(
        [
            ("provider", cs.string()),
            ("intervention", cs.string()),
            ("goal", cs.string()),
            ("result", cs.string()),
        ],
        doc="One intervention completed before this visit.",
    )
    diagnosis = cs.object_of(
        [
            ("condition", cs.string()),
            ("likelihood", cs.literal_set(LIKELIHOOD_SCALE)),
        ],
        doc="A diagnosis with its current likelihood.",
    )
    return cs.object_of(
        [
            ("visit_number", cs.integer()),
            ("completed_interventions", cs.sequence(intervention)),
            ("patient_goals", cs.sequence(cs.string())),
            ("doctor_goals", cs.sequence(cs.string())),
            ("discussion_topics", cs.sequence(cs.string())),
            ("doctor_learned_patient_facts", cs.sequence(cs.string())),
            ("doctor_learned_patient_symptoms", cs.sequence(cs.string())),
            ("doctor_inferred_dx", cs.sequence(diagnosis)),
            ("planned_interventions", cs.sequence(cs.string())),
            ("next_visit_schedule", cs.string()),
        ],
        doc="Outline for a single visit.",
    )


def outlines_schema(min_visits: int, max_visits: int) -> cs.SchemaNode:
    return cs.object_of(
        [("visits", cs.sequence(outline_schema(), min_items=min_visits, max_items=max_visits))],
        doc="Outlines for the whole patient journey.",
    )


def dialogue_schema() -> cs.SchemaNode:
    message = cs.object_of(
        [
            ("role", cs.literal_set(("patient", "doctor"))),
            ("content", cs.string()),
        ],
        doc="One chat message.",
    )
    return cs.object_of([("messages", cs.sequence(message, min_items=1))], doc="A single-visit dialogue.")


def critique_schema() -> cs.SchemaNode:
    good_bad = cs.object_of(
        [("good", cs.sequence(cs.string())), ("bad", cs.sequence(cs.string()))],
        doc="What went well and what went badly.",
    )
    return cs.object_of(
        [
            ("communication", good_bad, "Did the doctor communicate effectively and with empathy?"),
            ("teaching", good_bad, "Did the doctor inform the patient about the condition and next steps?"),
            ("clinical_management", good_bad, "Were actionable management steps recommended?"),
            ("clinical_reasoning", good_bad, "Was the reasoning sound given what the patient shared?"),
            ("realistic_simulation", cs.yes_no("Could the diagnosis be inferred from the dialogue alone?")),
            ("correct_differential_diagnosis", cs.yes_no("Was the condition diagnosed correctly?")),
            ("planned_management_steps", cs.yes_no("Were actionable management steps given?")),
            ("guidelines_compliance", cs.yes_no("Does the plan align with the reference knowledge?")),
        ],
        doc="Structured critique of a simulated visit.",
    )


# -- operations --------------------------------------------------------------------


def gen_outlines(
    vignette: str,
    condition: str,
    knowledge_context: str,
    gateway: ModelGateway,
    min_visits: int | None = None,
    max_visits: int | None = None,
    seed: int = 0,
    config: RuntimeConfig = DEFAULT_CONFIG,
) -> list[VisitOutline]:
    lo = min_visits if min_visits is not None else config.sim_min_visits
    hi = max_visits if max_visits is not None else config.sim_max_visits
    prompt = (
        OUTLINES_PROMPT.replace("{knowledge}", knowledge_context)
        .replace("{condition}", condition)
        .replace("{vignette}", vignette)
        .replace("{min_visits}", str(lo))
        .replace("{max_visits}", str(hi))
    )
    value = gateway.generate_structured(
        ModelRequest(
            prompt=prompt,
            tag="sim.outlines",
            schema=outlines_schema(lo, hi),
            seed=seed,
            context={"condition": condition, "vignette": vignette},
        )
    )
    outlines = [VisitOutline.from_dict(v) for v in value["visits"]]
    numbers = [o.visit_number for o in outlines]
    if numbers != list(range(1, len(outlines) + 1)):
        raise ValueError(f"outline visit numbers must be contiguous from 1, got {numbers}")
    return outlines


def gen_dialogue(
    outline: VisitOutline,
    prior_visits: list[tuple[VisitOutline, list[SimMessage]]],
    gateway: ModelGateway,
    condition: str = "",
    vignette: str = "",
    draft_and_critique: tuple[list[SimMessage], Critique] | None = None,
    seed: int = 0,
    config: RuntimeConfig = DEFAULT_CONFIG,
) -> tuple[list[SimMessage], DialogueFlags]:
    """Draft (or revise) one visit's dialogue; returns messages with the
    terminal marker stripped plus structural flags."""
    history_parts = []
    for i, (prev_outline, prev_messages) in enumerate(prior_visits, 1):
        rendered = "\n".join(f"{m.role}: {m.content}" for m in prev_messages)
        history_parts.append(f"# Visit {i}\n{prev_outline.to_dict()}\n{rendered}")
    revision_block = ""
    tag = "sim.dialogue.draft"
    context = {"outline": outline, "condition": condition, "vignette": vignette}
    if draft_and_critique is not None:
        draft_messages, critique = draft_and_critique
        revision_block = REVISION_BLOCK.replace(
            "{draft}", "\n".join(f"{m.role}: {m.content}" for m in draft_messages)
        ).replace("{critique}", str(critique.to_dict()))
        tag = "sim.dialogue.revise"
        context["draft"] = draft_messages
        context["critique"] = critique
    prompt = (
        DIALOGUE_PROMPT.replace("{end_marker}", END_MARKER)
        .replace("{condition}", condition)
        .replace("{vignette}", vignette)
        .replace("{history}", "\n\n".join(history_parts) or "(first visit)")
        .replace("{outline}", str(outline.to_dict()))
        .replace("{revision_block}", revision_block)
    )
    value = gateway.generate_structured(
        ModelRequest(prompt=prompt, tag=tag, schema=dialogue_schema(), seed=seed, context=context)
    )
    messages = [SimMessage.from_dict(m) for m in value["messages"]]

    missing_terminal = True
    if messages and messages[-1].content.strip() == END_MARKER:
        messages = messages[:-1]
        missing_terminal = False

    n = len(messages)
    length_out_of_range = not (config.sim_min_messages <= n <= config.sim_max_messages)
    alternation_broken = any(
        messages[i].role == messages[i + 1].role for i in range(len(messages) - 1)
    )
    flags = DialogueFlags(
        missing_terminal=missing_terminal,
        length_out_of_range=length_out_of_range,
        alternation_broken=alternation_broken,
    )
    return messages, flags


def critique_dialogue(
    dialogue: list[SimMessage],
    outline: VisitOutline,
    vignette: str,
    gateway: ModelGateway,
    knowledge_context: str = "",
    condition: str = "",
    seed: int = 0,
) -> Critique:
    prompt = (
        CRITIQUE_PROMPT.replace("{knowledge}", knowledge_context or "(none)")
        .replace("{condition}", condition)
        .replace("{vignette}", vignette)
        .replace("{outline}", str(outline.to_dict()))
        .replace("{dialogue}", "\n".join(f"{m.role}: {m.content}" for m in dialogue))
    )
    value = gateway.generate_structured(
        ModelRequest(
            prompt=prompt,
            tag="sim.critique",
            schema=critique_schema(),
            seed=seed,
            context={"dialogue": dialogue, "outline": outline},
        )
    )

    def gb(name: str) -> GoodBad:
        return GoodBad(good=tuple(value[name]["good"]), bad=tuple(value[name]["bad"]))

    return Critique(
        communication=gb("communication"),
        teaching=gb("teaching"),
        clinical_management=gb("clinical_management"),
        clinical_reasoning=gb("clinical_reasoning"),
        realistic_simulation=value["realistic_simulation"] == "yes",
        correct_differential_diagnosis=value["correct_differential_diagnosis"] == "yes",
        planned_management_steps=value["planned_management_steps"] == "yes",
        guidelines_compliance=value["guidelines_compliance"] == "yes",
    )


# -- record assembly -----------------------------------------------------------------


@dataclass(frozen=True)
class MultiVisitRecord:
    """A full synthetic patient journey: outlines, dialogues, and the report
    blocks inserted between consecutive visits."""

    condition: str
    vignette: str
    visits: tuple[tuple[VisitOutline, tuple[SimMessage, ...]], ...]
    inter_visit_reports: tuple[tuple[str, ...], ...] = field(default=())

    def message_counts(self) -> list[int]:
        return [len(messages) for _, messages in self.visits]

    def flatten(self) -> list[tuple[str, str]]:
        """Linear (kind, text) stream: visit messages with report blocks in
        between, in journey order."""
        stream: list[tuple[str, str]] = []
        for i, (_, messages) in enumerate(self.visits):
            if i > 0:
                reports = self.inter_visit_reports[i - 1] if i - 1 < len(self.inter_visit_reports) else ()
                for report in reports:
                    stream.append(("report", report))
            for message in messages:
                stream.append((message.role, message.content))
        return stream

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "vignette": self.vignette,
            "visits": [
                {"outline": outline.to_dict(), "messages": [m.to_dict() for m in messages]}
                for outline, messages in self.visits
            ],
            "inter_visit_reports": [list(r) for r in self.inter_visit_reports],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MultiVisitRecord":
        return cls(
            condition=data["condition"],
            vignette=data["vignette"],
            visits=tuple(
                (
                    VisitOutline.from_dict(v["outline"]),
                    tuple(SimMessage.from_dict(m) for m in v["messages"]),
                )
                for v in data["visits"]
            ),
            inter_visit_reports=tuple(tuple(r) for r in data["inter_visit_reports"]),
        )


def assemble_record(
    condition: str,
    vignette: str,
    outlines: list[VisitOutline],
    dialogues: list[list[SimMessage]],
    inter_visit_reports: list[list[str]] | None = None,
) -> MultiVisitRecord:
    if len(outlines) != len(dialogues):
        raise ValueError("one dialogue per outline is required")
    reports = inter_visit_reports or [[] for _ in range(max(0, len(outlines) - 1))]
    if len(reports) != max(0, len(outlines) - 1):
        raise ValueError("need exactly one report block between consecutive visits")
    return MultiVisitRecord(
        condition=condition,
        vignette=vignette,
        visits=tuple((o, tuple(d)) for o, d in zip(outlines, dialogues)),
        inter_visit_reports=tuple(tuple(r) for r in reports),
    )
