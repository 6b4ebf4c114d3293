"""Render domain values into prompt-ready text and Markdown exports."""

from __future__ import annotations

from careloop.core.types import (
    SUMMARY_FIELDS,
    AgentState,
    Differential,
    GuidelineDoc,
    ManagementPlan,
    Message,
    PatientSummary,
)

PLAN_CATEGORY_TITLES = {
    "in_visit_investigations": "In-visit investigations",
    "ordered_investigations": "Ordered investigations",
    "recommendations_or_actions": "Ordered interventions and recommendations",
}


def render_summary(summary: PatientSummary) -> str:
    lines = ["Patient summary:"]
    for name in SUMMARY_FIELDS:
        label = name.replace("_", " ").capitalize()
        lines.append(f"- {label}: {getattr(summary, name)}")
    return "\n".join(lines)


def render_differential(differential: Differential) -> str:
    lines = [f"Probable diagnosis: {differential.probable_diagnosis}"]
    if differential.plausible_alternative_diagnoses:
        lines.append("Plausible alternatives (most to least likely):")
        for alt in differential.plausible_alternative_diagnoses:
            lines.append(f"- {alt}")
    return "\n".join(lines)


def render_plan(plan: ManagementPlan | None) -> str:
    if plan is None or plan.is_empty():
        return "No management plan has been produced yet."
    lines = []
    for category, title in PLAN_CATEGORY_TITLES.items():
        items = getattr(plan, category)
        lines.append(f"{title}:")
        if not items:
            lines.append("- (none)")
        for i, item in enumerate(items, 1):
            refs = f" [{', '.join(item.citations)}]" if item.citations else ""
            lines.append(f"{i}. {item.item}{refs}")
    return "\n".join(lines)


def render_state(state: AgentState) -> str:
    parts = [
        f"Visit number: {state.visit_number}",
        render_summary(state.summary),
        render_differential(state.differential),
        "Current management plan:",
        render_plan(state.plan),
    ]
    return "\n\n".join(parts)


def render_transcript(messages) -> str:
    lines = []
    for msg in messages:
        if isinstance(msg, Message):
            lines.append(f"[visit {msg.visit_number}] {msg.role.value}: {msg.content}")
        else:
            role, content = msg
            lines.append(f"{role}: {content}")
    return "\n".join(lines) if lines else "(no messages yet)"


def render_documents(docs: list[GuidelineDoc]) -> str:
    blocks = []
    for doc in docs:
        blocks.append(f"<document id={doc.doc_id} corpus={doc.corpus.value}>\n{doc.body_markdown}\n</document>")
    return "\n\n".join(blocks)


def plan_to_markdown(plan: ManagementPlan) -> str:
    """Markdown table with category / items / references columns."""
    lines = ["| Category | Items | References |", "| --- | --- | --- |"]
    for category, title in PLAN_CATEGORY_TITLES.items():
        items = getattr(plan, category)
        if not items:
            lines.append(f"| {title} | (none) | -- |")
            continue
        for i, item in enumerate(items, 1):
            label = title if i == 1 else ""
            refs = ", ".join(item.citations) if item.citations else "--"
            text = item.item.replace("|", "\\|")
            lines.append(f"| {label} | {i}. {text} | {refs} |")
    return "\n".join(lines)
