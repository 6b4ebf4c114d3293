"""Constraint schemas for the planning agent's structured calls.

The planner output fuses a reasoning trace (analysis steps, then high-level
management goals) with the three-category plan whose citation leaves are an
enumerated set. The citation slot is a bindable placeholder: callers bind
it to the retrieved document ids before the refinement call; draft plans
are generated without documents, so their citation arrays are pinned empty.
"""

from __future__ import annotations

from typing import Iterable

from careloop import schema as cs

CITATION_BINDER = "citations"
_PLACEHOLDER = ("__unbound__",)


def _action_item(citable: bool) -> cs.SchemaNode:
    if citable:
        citations = cs.sequence(
            cs.literal_set(_PLACEHOLDER, binder=CITATION_BINDER),
            doc="Ids of the retrieved documents supporting this item.",
        )
    else:
        citations = cs.sequence(
            cs.string(),
            max_items=0,
            doc="Empty for drafts: no documents are in context.",
        )
    return cs.object_of(
        [
            ("item", cs.string("One management recommendation.")),
            ("citations", citations),
        ],
        doc="A management item with citations.",
    )


def _mx_plan(citable: bool) -> cs.SchemaNode:
    item = _action_item(citable)
    return cs.object_of(
        [
            (
                "in_visit_investigations",
                cs.sequence(item),
                "Tests or questions to carry out with the patient during this visit.",
            ),
            (
                "ordered_investigations",
                cs.sequence(item),
                "Tests to order for after the visit (labs, imaging).",
            ),
            (
                "recommendations_or_actions",
                cs.sequence(item),
                "Interventions and recommendations to order after the visit.",
            ),
        ],
        doc="Management plan with three action categories.",
    )


def _reasoning() -> cs.SchemaNode:
    return cs.object_of(
        [
            (
                "analysis",
                cs.sequence(cs.string()),
                "Step-by-step analysis of the patient's situation.",
            ),
            (
                "management_goals",
                cs.sequence(cs.string()),
                "High-level objectives the plan should achieve.",
            ),
        ],
        doc="Reasoning steps preceding the plan.",
    )


def planner_template() -> cs.SchemaNode:
    """Planner output with an unbound citation placeholder."""
    return cs.object_of(
        [
            ("reasoning", _reasoning()),
            ("mx_plan", _mx_plan(citable=True)),
        ],
        doc="Reasoning trace fused with the management plan.",
    )


def planner_schema(doc_ids: Iterable[str]) -> cs.SchemaNode:
    """Planner output with citations restricted to the given document ids."""
    return cs.bind_literals(planner_template(), CITATION_BINDER, doc_ids)


def draft_planner_schema() -> cs.SchemaNode:
    """Planner output for document-free drafting: citation arrays pinned empty."""
    return cs.object_of(
        [
            ("reasoning", _reasoning()),
            ("mx_plan", _mx_plan(citable=False)),
        ],
        doc="Reasoning trace fused with the management plan.",
    )


def search_queries_schema() -> cs.SchemaNode:
    # The 5-query cap is enforced by truncation after the call, so an
    # over-eager backend degrades gracefully instead of erroring.
    return cs.object_of(
        [
            (
                "search_queries",
                cs.sequence(cs.string(), min_items=1),
                "Natural-language queries for the guideline search engine, at most 5.",
            )
        ],
        doc="Search queries for guideline retrieval.",
    )
