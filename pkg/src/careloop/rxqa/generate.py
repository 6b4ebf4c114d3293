"""MCQ generation from medication labels.

Short questions come from a single structured call per label (five
questions, four options each, the drug named in every question). Long
questions run a three-stage chain — challenges write-up, patient
scenarios, then one question per scenario — with up to two related labels
appended for cross-drug reasoning; all intermediate artifacts are kept for
audit.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from careloop import schema as cs
from careloop.gateway.base import ModelGateway, ModelRequest
from careloop.rxqa.types import MedLabel, QuestionKind, RxQuestion

SHORT_COUNT = 5
LONG_COUNT = 3
MAX_RELATED = 2
MIN_SCENARIO_SENTENCES = 5

SHORT_PROMPT = """\
Write {count} multiple-choice questions about the medication {drug_name}.
Each question must name the medication explicitly and be answerable by an
experienced pharmacist without the label in front of them; make the set
diverse and demanding, with four options and a single unambiguous answer
each.

=== Medication label ===
{label}
"""

CHALLENGES_PROMPT = """\
Summarize everything an expert pharmacist must watch out for with
{drug_name}: indications and contraindications, risks, side effects and
interactions, practical considerations while taking it, and use in
specific populations. Include nuances beyond the label where relevant, and
finish with the key interactions to watch.

=== Medication label(s) ===
{label}
"""

SCENARIOS_PROMPT = """\
Using the label and the challenge write-up below, invent {count} distinct
patient scenarios involving {drug_name}. Each scenario should describe the
patient, their health history and current medications, and should test a
pharmacist's grasp of the drug's indications, contraindications, risks,
interactions, or population-specific use.

=== Medication label(s) ===
{label}

=== Challenges ===
{challenges}
"""

LONG_QUESTION_PROMPT = """\
Turn the scenario below into one demanding multiple-choice question. Spell
the scenario out fully in the question stem as a paragraph of at least
five sentences, without hinting at where the difficulty lies and without
reproducing label content; give four options of which exactly one is
correct, each a direct answer to the question asked; the whole thing must
be answerable by a highly experienced pharmacist from the stem alone.

=== Medication label(s) ===
{label}

=== Scenario ===
{scenario}
"""

_SENTENCE_SPLIT = re.compile(r"[.!?]+(?:\s+|$)")


def count_sentences(text: str) -> int:
    return sum(1 for part in _SENTENCE_SPLIT.split(text) if re.search(r"\w", part))


def _question_schema() -> cs.SchemaNode:
    return cs.object_of(
        [
            ("question", cs.string("The full question stem.")),
            ("options", cs.sequence(cs.string(), min_items=4, max_items=4), "Exactly four answer choices."),
            ("answer", cs.string("The correct answer, verbatim one of the options.")),
        ],
        doc="One multiple-choice question.",
    )


def short_questions_schema() -> cs.SchemaNode:
    return cs.object_of(
        [("questions", cs.sequence(_question_schema(), min_items=SHORT_COUNT, max_items=SHORT_COUNT))],
        doc="Five short questions for one medication label.",
    )


def scenarios_schema() -> cs.SchemaNode:
    return cs.object_of(
        [("scenarios", cs.sequence(cs.string(), min_items=LONG_COUNT, max_items=LONG_COUNT))],
        doc="Patient scenarios derived from the challenge write-up.",
    )


@dataclass(frozen=True)
class LongGenAudit:
    """Intermediate artifacts of the long-question chain."""

    label_id: str
    challenges: str
    scenarios: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "label_id": self.label_id,
            "challenges": self.challenges,
            "scenarios": list(self.scenarios),
        }


def _drug_named(question: str, drug_name: str) -> bool:
    return drug_name.casefold() in question.casefold()


def gen_short_questions(label: MedLabel, gateway: ModelGateway, seed: int = 0) -> list[RxQuestion]:
    prompt = (
        SHORT_PROMPT.replace("{count}", str(SHORT_COUNT))
        .replace("{drug_name}", label.drug_name)
        .replace("{label}", label.body)
    )
    value = gateway.generate_structured(
        ModelRequest(
            prompt=prompt,
            tag="rxqa.gen.short",
            schema=short_questions_schema(),
            seed=seed,
            context={"label": label},
        )
    )
    out = []
    for raw in value["questions"]:
        warnings = ()
        if not _drug_named(raw["question"], label.drug_name):
            warnings = ("drug_name_missing",)
        out.append(
            RxQuestion(
                question=raw["question"],
                options=tuple(raw["options"]),
                answer_text=raw["answer"],
                kind=QuestionKind.SHORT,
                label_id=label.label_id,
                jurisdiction=label.jurisdiction,
                warnings=warnings,
            )
        )
    return out


def gen_long_questions(
    label: MedLabel,
    related_labels: list[MedLabel] | None = None,
    gateway: ModelGateway | None = None,
    seed: int = 0,
) -> tuple[list[RxQuestion], LongGenAudit]:
    if gateway is None:
        raise ValueError("gen_long_questions requires a gateway")
    related = related_labels or []
    if len(related) > MAX_RELATED:
        raise ValueError(f"at most {MAX_RELATED} related labels may be appended")
    label_text = label.body
    for rel in related:
        label_text += f"\n\n=== Related medication: {rel.drug_name} ===\n{rel.body}"

    challenges = gateway.generate_text(
        ModelRequest(
            prompt=CHALLENGES_PROMPT.replace("{drug_name}", label.drug_name).replace("{label}", label_text),
            tag="rxqa.gen.challenges",
            seed=seed,
            context={"label": label, "related": related},
        )
    )
    scenarios_value = gateway.generate_structured(
        ModelRequest(
            prompt=(
                SCENARIOS_PROMPT.replace("{count}", str(LONG_COUNT))
                .replace("{drug_name}", label.drug_name)
                .replace("{label}", label_text)
                .replace("{challenges}", challenges)
            ),
            tag="rxqa.gen.scenarios",
            schema=scenarios_schema(),
            seed=seed,
            context={"label": label, "challenges": challenges},
        )
    )
    scenarios = tuple(scenarios_value["scenarios"])

    questions = []
    for i, scenario in enumerate(scenarios):
        value = gateway.generate_structured(
            ModelRequest(
                prompt=(
                    LONG_QUESTION_PROMPT.replace("{label}", label_text).replace("{scenario}", scenario)
                ),
                tag="rxqa.gen.long",
                schema=_question_schema(),
                seed=seed * 100 + i,
                context={"label": label, "scenario": scenario},
            )
        )
        warnings = []
        if count_sentences(scenario) < MIN_SCENARIO_SENTENCES:
            warnings.append("scenario_under_5_sentences")
        if not _drug_named(value["question"], label.drug_name):
            warnings.append("drug_name_missing")
        questions.append(
            RxQuestion(
                question=value["question"],
                options=tuple(value["options"]),
                answer_text=value["answer"],
                kind=QuestionKind.LONG,
                label_id=label.label_id,
                jurisdiction=label.jurisdiction,
                warnings=tuple(warnings),
            )
        )
    audit = LongGenAudit(label_id=label.label_id, challenges=challenges, scenarios=scenarios)
    return questions, audit
