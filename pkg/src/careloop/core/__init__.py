from careloop.core.tokenizers import (
    TokenizerRegistry,
    count_tokens,
    default_registry,
    heuristic_tokenizer,
)
from careloop.core.types import (
    ActionItem,
    AgentState,
    Corpus,
    Differential,
    GuidelineDoc,
    ManagementPlan,
    Message,
    PatientSummary,
    PlanReasoning,
    Role,
    Transcript,
)

__all__ = [
    "ActionItem",
    "AgentState",
    "Corpus",
    "Differential",
    "GuidelineDoc",
    "ManagementPlan",
    "Message",
    "PatientSummary",
    "PlanReasoning",
    "Role",
    "Transcript",
    "TokenizerRegistry",
    "count_tokens",
    "default_registry",
    "heuristic_tokenizer",
]
