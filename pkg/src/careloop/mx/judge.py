"""Pairwise plan comparison with an LLM judge.

Two plans are compared across nine categories. To control position bias
the slot assignment is shuffled across n trials with a seeded RNG; slot
winners are de-permuted back to the underlying plans before aggregation,
yielding a per-category win rate for the first plan.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from careloop import schema as cs
from careloop.config import DEFAULT_CONFIG, JUDGE_CATEGORIES, RuntimeConfig
from careloop.core.render import render_documents, render_plan
from careloop.core.types import GuidelineDoc, ManagementPlan
from careloop.gateway.base import ModelGateway, ModelRequest

JUDGE_PROMPT = """\
You are an experienced physician rating two management plans for the same
patient. Compare plan A and plan B on each criterion below and pick a
winner for every one; explain your reasoning step by step first.

Criteria: which plan aligns better with the evidence-based guidelines;
which orders the more relevant investigations; which recommends the more
appropriate interventions; which specifies investigations in more detail;
which specifies interventions in more detail (drug, dose, purpose); which
handles follow-up better; which manages risk better; which is safer for the
patient; and which is the better overall care plan.

=== Case presentation ===
{case_presentation}

=== Reference documents ===
{guidelines}

=== Expert analysis ===
{analysis}

=== Plan A ===
{plan_a}

=== Plan B ===
{plan_b}
"""


def judge_schema() -> cs.SchemaNode:
    fields = []
    for category in JUDGE_CATEGORIES:
        fields.append(
            (
                f"{category}_analysis",
                cs.sequence(cs.string()),
                "Step-by-step analysis for this criterion.",
            )
        )
        fields.append((category, cs.literal_set(("A", "B")), "Winning plan for this criterion."))
    return cs.object_of(fields, doc="Pairwise plan rating across nine criteria.")


@dataclass(frozen=True)
class JudgeVerdict:
    """Shuffle-averaged outcome; win rates are for the first plan passed in."""

    winners: dict[str, str]
    win_rates: dict[str, float]
    analyses: dict[str, tuple[str, ...]]
    n_trials: int

    def to_dict(self) -> dict:
        return {
            "winners": dict(self.winners),
            "win_rates": dict(self.win_rates),
            "analyses": {k: list(v) for k, v in self.analyses.items()},
            "n_trials": self.n_trials,
        }


def shuffle_pattern(seed: int, n: int) -> list[bool]:
    """Deterministic swap decisions: True means plans are swapped in slots."""
    rng = random.Random(seed)
    return [rng.random() < 0.5 for _ in range(n)]


def judge_plans(
    case_presentation: str,
    plan_a: ManagementPlan,
    plan_b: ManagementPlan,
    guidelines: list[GuidelineDoc] | None = None,
    analysis: str | None = None,
    gateway: ModelGateway | None = None,
    n_shuffles: int | None = None,
    seed: int = 0,
    config: RuntimeConfig = DEFAULT_CONFIG,
) -> JudgeVerdict:
    if gateway is None:
        raise ValueError("judge_plans requires a gateway")
    if plan_a.is_empty() or plan_b.is_empty():
        raise ValueError("both plans must be non-empty")
    n = n_shuffles if n_shuffles is not None else config.judge_shuffles
    swaps = shuffle_pattern(seed, n)

    wins = {category: 0 for category in JUDGE_CATEGORIES}
    analyses: dict[str, list[str]] = {category: [] for category in JUDGE_CATEGORIES}
    schema = judge_schema()
    for trial, swapped in enumerate(swaps):
        first, second = (plan_b, plan_a) if swapped else (plan_a, plan_b)
        prompt = (
            JUDGE_PROMPT.replace("{case_presentation}", case_presentation)
            .replace("{guidelines}", render_documents(guidelines or []) or "(none provided)")
            .replace("{analysis}", analysis or "(none provided)")
            .replace("{plan_a}", render_plan(first))
            .replace("{plan_b}", render_plan(second))
        )
        request = ModelRequest(
            prompt=prompt,
            tag="mx.judge",
            schema=schema,
            seed=seed * 1000 + trial,
            context={"plan_a": first, "plan_b": second, "swapped": swapped},
        )
        value = gateway.generate_structured(request)
        for category in JUDGE_CATEGORIES:
            slot_winner = value[category]
            first_plan_won = slot_winner == "A"
            plan_a_won = first_plan_won != swapped
            if plan_a_won:
                wins[category] += 1
            analyses[category].extend(value[f"{category}_analysis"])

    win_rates = {category: wins[category] / n for category in JUDGE_CATEGORIES}
    winners = {category: ("A" if rate >= 0.5 else "B") for category, rate in win_rates.items()}
    return JudgeVerdict(
        winners=winners,
        win_rates=win_rates,
        analyses={k: tuple(v) for k, v in analyses.items()},
        n_trials=n,
    )
