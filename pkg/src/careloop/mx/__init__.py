from careloop.mx.judge import JudgeVerdict, judge_plans
from careloop.mx.planner import (
    MxResult,
    PlannerOutput,
    draft_plan,
    generate_queries,
    refine_plans,
    run_mx,
    verify_citations,
)
from careloop.mx.schemas import (
    CITATION_BINDER,
    draft_planner_schema,
    planner_schema,
    search_queries_schema,
)

__all__ = [
    "CITATION_BINDER",
    "JudgeVerdict",
    "MxResult",
    "PlannerOutput",
    "draft_plan",
    "draft_planner_schema",
    "generate_queries",
    "judge_plans",
    "planner_schema",
    "refine_plans",
    "run_mx",
    "search_queries_schema",
    "verify_citations",
]
