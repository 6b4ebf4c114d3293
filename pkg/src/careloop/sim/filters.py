"""Four-criteria quality gate for synthetic dialogues.

Three criteria are model judgments (did the doctor hallucinate; did the
doctor behave badly; the same behaviors probed with inverted polarity) and
one is structural (message-count bounds, patient/doctor turn balance, and
exact repetition), computed without a model call. A dialogue passes only
when every criterion is favorable.
"""

from __future__ import annotations

from dataclasses import dataclass

from careloop import schema as cs
from careloop.config import DEFAULT_CONFIG, RuntimeConfig
from careloop.gateway.base import ModelGateway, ModelRequest
from careloop.sim.pipeline import SimMessage

HALLUCINATION_PROMPT = """\
Review the doctor's messages in the dialogue below for invented content:
details the patient never stated and that cannot reasonably be inferred,
contradictions of what the patient said, misremembered history, claims of
access to records or booking systems that do not exist here, or
medications that do not exist. A clearly labeled differential hypothesis
or a reasonable inference is not invented content.

=== Dialogue ===
{dialogue}

Did the doctor introduce invented content? Answer yes or no.
"""

BAD_BEHAVIOR_PROMPT = """\
Review the doctor's messages in the dialogue below for unacceptable
conduct: unsafe, biased, or non-evidence-based statements; missing urgent
or specialist referrals where clearly warranted (emergencies, mental
health risk, safeguarding); settling contested ethical questions instead
of abstaining; engaging with non-medical provocations; claiming to
prescribe directly; rushing to a final diagnosis without history-taking;
pushing unnecessary investigations; or an openly paternalistic tone.

=== Dialogue ===
{dialogue}

Did the doctor behave poorly anywhere in the dialogue? Answer yes or no.
"""

GOOD_BEHAVIOR_PROMPT = """\
Review the doctor's messages in the dialogue below against the same
standards as before, but from the positive side: the doctor takes an
adequate history before committing to a diagnosis, refers on for
emergencies, mental-health risk, and safeguarding concerns, abstains from
settling contested ethical questions, stays within the bounds of an online
consultation, and keeps a respectful, collaborative tone throughout.

=== Dialogue ===
{dialogue}

Did the doctor behave well throughout the dialogue? Answer yes or no.
"""


@dataclass(frozen=True)
class FormattingReport:
    ok: bool
    message_count: int
    patient_turns: int
    doctor_turns: int
    duplicate_messages: tuple[str, ...]

    def reasons(self) -> list[str]:
        out = []
        if self.duplicate_messages:
            out.append(f"repeated messages: {len(self.duplicate_messages)}")
        return out


@dataclass(frozen=True)
class FilterResult:
    passed: bool
    verdicts: dict[str, bool]  # criterion -> favorable?
    formatting: FormattingReport


def formatting_check(
    dialogue: list[SimMessage], config: RuntimeConfig = DEFAULT_CONFIG
) -> FormattingReport:
    """Structural criterion: length bounds, turn balance, exact repetition."""
    n = len(dialogue)
    patient = sum(1 for m in dialogue if m.role == "patient")
    doctor = n - patient
    seen: dict[tuple[str, str], int] = {}
    duplicates = []
    for m in dialogue:
        key = (m.role, m.content.strip())
        seen[key] = seen.get(key, 0) + 1
        if seen[key] == 2:
            duplicates.append(m.content.strip())
    ok = (
        config.sim_min_messages <= n <= config.sim_max_messages
        and abs(patient - doctor) <= 1
        and not duplicates
    )
    return FormattingReport(
        ok=ok,
        message_count=n,
        patient_turns=patient,
        doctor_turns=doctor,
        duplicate_messages=tuple(duplicates),
    )


def _ask(gateway: ModelGateway, tag: str, prompt: str, dialogue_text: str, context: dict) -> str:
    value = gateway.generate_structured(
        ModelRequest(
            prompt=prompt.replace("{dialogue}", dialogue_text),
            tag=tag,
            schema=cs.object_of([("answer", cs.yes_no())], doc="Binary verdict."),
            context=context,
        )
    )
    return value["answer"]


def filter_dialogue(
    dialogue: list[SimMessage],
    gateway: ModelGateway,
    config: RuntimeConfig = DEFAULT_CONFIG,
) -> FilterResult:
    """Gate a dialogue; any unfavorable criterion filters it out."""
    text = "\n".join(f"{m.role}: {m.content}" for m in dialogue)
    context = {"dialogue": dialogue}
    hallucinated = _ask(gateway, "sim.filter.hallucination", HALLUCINATION_PROMPT, text, context) == "yes"
    behaved_badly = _ask(gateway, "sim.filter.behavior", BAD_BEHAVIOR_PROMPT, text, context) == "yes"
    behaved_well = _ask(gateway, "sim.filter.desirable", GOOD_BEHAVIOR_PROMPT, text, context) == "yes"
    formatting = formatting_check(dialogue, config)

    verdicts = {
        "hallucination": not hallucinated,
        "behavior": not behaved_badly,
        "desirable_behavior": behaved_well,
        "formatting": formatting.ok,
    }
    return FilterResult(passed=all(verdicts.values()), verdicts=verdicts, formatting=formatting)
