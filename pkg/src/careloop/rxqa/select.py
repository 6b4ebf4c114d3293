"""Benchmark selection and difficulty stratification.

A validated question enters the benchmark only when the reference model is
context-dependent on it: correct with the medication label in context and
wrong without it. From the survivors a seeded random sample draws the
per-jurisdiction targets (100 short, 200 long); short pools are taken
whole with a warning.
"""

from __future__ import annotations

import logging
import random
from typing import Sequence

from careloop import schema as cs
from careloop.gateway.base import ModelGateway, ModelRequest
from careloop.rxqa.types import Jurisdiction, MedLabel, QuestionKind, RxQuestion

log = logging.getLogger(__name__)

LETTERS = "ABCD"

ATTEMPT_PROMPT = """\
{context_block}Answer the multiple-choice question below with the single
letter of the best option.

=== Question ===
{question}
{options}
"""


def answer_question(
    question: RxQuestion,
    gateway: ModelGateway,
    label: MedLabel | None = None,
    seed: int = 0,
) -> int:
    """One zero-shot attempt; returns the chosen option index."""
    context_block = ""
    if label is not None:
        context_block = f"=== Medication label ===\n{label.body}\n\n"
    options = "\n".join(f"{letter}. {opt}" for letter, opt in zip(LETTERS, question.options))
    value = gateway.generate_structured(
        ModelRequest(
            prompt=ATTEMPT_PROMPT.replace("{context_block}", context_block)
            .replace("{question}", question.question)
            .replace("{options}", options),
            tag="rxqa.attempt.open" if label is not None else "rxqa.attempt.closed",
            schema=cs.object_of([("choice", cs.literal_set(tuple(LETTERS)))], doc="Chosen option letter."),
            seed=seed,
            context={"question": question, "label": label},
        )
    )
    return LETTERS.index(value["choice"])


def context_dependent(question: RxQuestion, label: MedLabel, gateway: ModelGateway, seed: int = 0) -> bool:
    if question.answer_index is None:
        return False
    with_context = answer_question(question, gateway, label=label, seed=seed)
    without_context = answer_question(question, gateway, label=None, seed=seed)
    return with_context == question.answer_index and without_context != question.answer_index


def select_questions(
    pool: Sequence[RxQuestion],
    labels: dict[str, MedLabel],
    gateway: ModelGateway,
    seed: int = 0,
    short_target: int = 100,
    long_target: int = 200,
) -> list[RxQuestion]:
    """Context-dependence filter, then a seeded per-stratum sample."""
    kept = []
    for question in pool:
        if question.flags is None or not question.flags.all_passed():
            continue
        label = labels[question.label_id]
        if context_dependent(question, label, gateway, seed=seed):
            kept.append(question)

    rng = random.Random(seed)
    selected: list[RxQuestion] = []
    for jurisdiction in Jurisdiction:
        for kind, target in ((QuestionKind.SHORT, short_target), (QuestionKind.LONG, long_target)):
            stratum = [q for q in kept if q.jurisdiction is jurisdiction and q.kind is kind]
            if not stratum:
                continue
            if len(stratum) <= target:
                if len(stratum) < target:
                    log.warning(
                        "%s/%s pool has %d questions, short of the %d target; keeping all",
                        jurisdiction.value,
                        kind.value,
                        len(stratum),
                        target,
                    )
                selected.extend(stratum)
            else:
                selected.extend(rng.sample(stratum, target))
    return selected


LOWER_DIFFICULTY = ("Trivial", "Easy")
HIGHER_DIFFICULTY = ("Medium", "Hard", "Impossible")


def stratify_difficulty(questions: Sequence[RxQuestion]) -> dict[str, list[RxQuestion]]:
    """Map pharmacist ratings onto {lower, higher}; Unrated is excluded."""
    out: dict[str, list[RxQuestion]] = {"lower": [], "higher": []}
    for question in questions:
        if question.difficulty in LOWER_DIFFICULTY:
            out["lower"].append(question)
        elif question.difficulty in HIGHER_DIFFICULTY:
            out["higher"].append(question)
        else:
            log.warning("question from %s is unrated; excluded from stratification", question.label_id)
    return out
