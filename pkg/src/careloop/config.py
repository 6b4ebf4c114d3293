"""Runtime configuration and the structural constants of the system.

Defaults: up to 5 retrieval queries, 4 stochastic plan drafts, a
256,000-token retrieval budget, 3 visits per session, 4 judge shuffles
over 9 comparison categories, and benchmark targets of 100 short + 200
long questions per jurisdiction. Tests pin these numbers; change them
deliberately.
"""

from __future__ import annotations

from dataclasses import dataclass, field

JUDGE_CATEGORIES: tuple[str, ...] = (
    "best_guidelines_alignment",
    "most_appropriate_investigations",
    "most_appropriate_interventions",
    "most_detailed_investigations",
    "most_detailed_interventions",
    "most_appropriate_follow_up",
    "best_risk_management",
    "most_safe",
    "best_overall_care_plan",
)

DIFFICULTY_RATINGS: tuple[str, ...] = (
    "Trivial",
    "Easy",
    "Medium",
    "Hard",
    "Impossible",
)

LIKELIHOOD_SCALE: tuple[str, ...] = (
    "Ruled out",
    "Very unlikely",
    "Unlikely",
    "Likely",
    "Very likely",
    "Confirmed",
)


@dataclass
class RuntimeConfig:
    """Tunable knobs; tests assert the defaults stay at the pinned values."""

    # retrieval
    retrieval_budget_tokens: int = 256_000
    max_queries: int = 5
    # planning agent
    n_drafts: int = 4
    draft_temperature: float = 0.8
    mx_deadline_ms: int = 90_000
    strict_citations: bool = False
    # dialogue agent
    fast_path_deadline_ms: int = 10_000
    max_directives: int = 5
    mx_message_interval: int = 4
    # sessions
    max_visits: int = 3
    max_differential_items: int = 10
    max_guidelines_per_corpus: int = 3
    # judge
    judge_shuffles: int = 4
    # gateway
    schema_retries: int = 2
    call_budget_ms: int = 60_000
    embed_dim: int = 64
    embed_seed: int = 0
    # benchmark
    rxqa_short_target: int = 100
    rxqa_long_target: int = 200
    mcnemar_exact_threshold: int = 25
    # dialogue synthesis
    sim_min_visits: int = 2
    sim_max_visits: int = 3
    sim_min_messages: int = 20
    sim_max_messages: int = 40

    judge_categories: tuple[str, ...] = field(default=JUDGE_CATEGORIES)


DEFAULT_CONFIG = RuntimeConfig()
