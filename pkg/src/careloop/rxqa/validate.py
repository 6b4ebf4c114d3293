"""Question validation gates.

answer_listed is pure string matching — casefold, trim, collapse internal
whitespace — resolving the keyed answer text to an option index. The other
three gates (clarity, correctness, uniqueness) are judge calls.
"""

from __future__ import annotations

import re

from careloop import schema as cs
from careloop.gateway.base import ModelGateway, ModelRequest
from careloop.rxqa.types import MedLabel, RxQuestion, ValidationFlags

_WS = re.compile(r"\s+")

CLEAR_PROMPT = """\
Is the question below clear: understandable and answerable by an
experienced pharmacist with no additional information? A question that
refers to "the medication" without naming it is not clear; one that names
the drug and fully specifies what is asked is.

=== Question ===
{question}

Answer yes or no.
"""

CORRECT_PROMPT = """\
=== Medication label ===
{label}

=== Question ===
{question}

The keyed answer is: {answer}

Judging from the label, is the keyed answer correct? Answer yes or no.
"""

UNIQUE_PROMPT = """\
=== Medication label ===
{label}

=== Question ===
{question}

The keyed answer is: {answer}

Is more than one of the answer choices defensible as correct? Answer yes
or no.
"""


def normalize_answer(text: str) -> str:
    return _WS.sub(" ", text.strip()).casefold()


def resolve_answer_index(question: RxQuestion) -> int | None:
    target = normalize_answer(question.answer_text)
    for i, option in enumerate(question.options):
        if normalize_answer(option) == target:
            return i
    return None


def _yes(gateway: ModelGateway, tag: str, prompt: str, context: dict) -> bool:
    value = gateway.generate_structured(
        ModelRequest(
            prompt=prompt,
            tag=tag,
            schema=cs.object_of([("answer", cs.yes_no())], doc="Binary verdict."),
            context=context,
        )
    )
    return value["answer"] == "yes"


def validate_question(question: RxQuestion, label: MedLabel, gateway: ModelGateway) -> RxQuestion:
    """Attach validation flags; answer_index is set when the answer matched."""
    option_lines = "\n".join(f"{letter}. {opt}" for letter, opt in zip("ABCD", question.options))
    rendered = f"{question.question}\n{option_lines}"
    answer_index = resolve_answer_index(question)
    context = {"question": question, "label": label}

    clear = _yes(gateway, "rxqa.validate.clear", CLEAR_PROMPT.replace("{question}", rendered), context)
    correct = _yes(
        gateway,
        "rxqa.validate.correct",
        CORRECT_PROMPT.replace("{label}", label.body)
        .replace("{question}", rendered)
        .replace("{answer}", question.answer_text),
        context,
    )
    multiple = _yes(
        gateway,
        "rxqa.validate.unique",
        UNIQUE_PROMPT.replace("{label}", label.body)
        .replace("{question}", rendered)
        .replace("{answer}", question.answer_text),
        context,
    )
    flags = ValidationFlags(
        clear=clear,
        answer_listed=answer_index is not None,
        answer_correct=correct,
        answer_unique=not multiple,
    )
    return question.with_validation(flags, answer_index)
