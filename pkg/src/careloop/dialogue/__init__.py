from careloop.dialogue.agent import DialogueAgent, ResponseDirectives, ddx_schema, directives_schema, summary_schema
from careloop.dialogue.prompts import PromptLibrary, render, variant

__all__ = [
    "DialogueAgent",
    "PromptLibrary",
    "ResponseDirectives",
    "ddx_schema",
    "directives_schema",
    "render",
    "summary_schema",
    "variant",
]
