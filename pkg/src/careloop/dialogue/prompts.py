"""Prompt templates for the dialogue agent.

Templates are plain text files with named {slot} tokens; only known slot
names are substituted, so literal braces elsewhere survive. The packaged
defaults can be overridden by pointing PromptLibrary at a directory, which
lets tests substitute scripted-friendly templates.

Each chain-of-reasoning step has an initial-visit and a follow-up variant;
selection is a pure function of the visit number (1 = initial, >=2 =
follow-up).
"""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path

SLOTS = (
    "dialogue_history",
    "agent_state",
    "response_plan",
    "patient_message",
    "drafted_response",
)

_SLOT_RE = re.compile(r"\{(" + "|".join(SLOTS) + r")\}")

TEMPLATE_NAMES = (
    "plan_response_initial",
    "plan_response_followup",
    "draft_response_initial",
    "draft_response_followup",
    "refine_response_initial",
    "refine_response_followup",
    "summary_update",
    "ddx_update",
)


def render(template: str, **slots: str) -> str:
    def sub(match: re.Match) -> str:
        return str(slots.get(match.group(1), match.group(0)))

    return _SLOT_RE.sub(sub, template)


def variant(base: str, visit_number: int) -> str:
    """Prompt-variant selection: visit 1 is initial, later visits follow-up."""
    return f"{base}_initial" if visit_number == 1 else f"{base}_followup"


class PromptLibrary:
    def __init__(self, directory: str | Path | None = None):
        self._dir = Path(directory) if directory else None
        self._cache: dict[str, str] = {}

    def get(self, name: str) -> str:
        if name not in self._cache:
            self._cache[name] = self._load(name)
        return self._cache[name]

    def _load(self, name: str) -> str:
        filename = f"{name}.txt"
        if self._dir is not None:
            override = self._dir / filename
            if override.exists():
                return override.read_text(encoding="utf-8")
        return (
            resources.files("careloop.dialogue").joinpath("templates", filename).read_text(encoding="utf-8")
        )

    def render(self, name: str, **slots: str) -> str:
        return render(self.get(name), **slots)
