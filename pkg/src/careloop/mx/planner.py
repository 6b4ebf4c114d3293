"""The slow planning agent.

run_mx overlaps two lanes — (generate queries -> retrieve) and n stochastic
document-free drafts — then refines the drafts into a single cited plan in
one document-conditioned call, verifies citations, and installs the result
into the agent state under a stamp issued when the run started (so a stale
run never overwrites a newer plan).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace as dc_replace

from careloop.clock import spawn_all
from careloop.config import DEFAULT_CONFIG, RuntimeConfig
from careloop.core.render import render_documents, render_plan, render_state, render_transcript
from careloop.core.types import ActionItem, AgentState, GuidelineDoc, ManagementPlan, PlanReasoning
from careloop.corpus.index import CorpusIndex, RetrievalResult, retrieve
from careloop.errors import CitationViolationError, DeadlineExceededError, NoDocumentsRetrievedError
from careloop.gateway.base import ModelGateway, ModelRequest
from careloop.mx.schemas import draft_planner_schema, planner_schema, search_queries_schema

log = logging.getLogger(__name__)

QUERY_PROMPT = """\
You are planning care for the patient below. Decide which evidence-based
guideline documents you need and write search queries to find them.

=== Patient ===
{case}

=== Rules ===
- Plain natural language, one clinical topic per query.
- Name the condition or management question plus the relevant patient
  characteristics (age, sex, comorbidities).
- Cover the likely and the must-not-miss diagnoses, ongoing conditions that
  still need management, and treatment-specific questions such as drug
  interactions.
- At most 5 queries; make each one count.
"""

PLAN_PROMPT = """\
You are a clinician preparing the management plan for the patient below.

=== Patient ===
{case}

=== Conversation so far ===
{transcript}

{documents_block}\
Work step by step: analyze the patient's situation, state the goals the
plan must achieve, then lay out the plan in three categories — tests to do
with the patient during this visit, investigations to order for afterwards,
and interventions or recommendations to order. Support items with citations
to the reference documents by id whenever documents are provided; cite only
ids that appear in the reference documents.
"""

MERGE_SUFFIX = """\

=== Draft plans ===
Below are draft plans written independently. Merge them into one clinically
coherent plan: keep what is well reasoned, drop items that conflict with
your final plan, split or combine items where that makes the plan clearer,
and stay concise.

{drafts}
"""


@dataclass(frozen=True)
class PlannerOutput:
    reasoning: PlanReasoning
    plan: ManagementPlan

    def to_dict(self) -> dict:
        return {"reasoning": self.reasoning.to_dict(), "mx_plan": self.plan.to_dict()}


@dataclass(frozen=True)
class CitationReport:
    valid: bool
    stripped: tuple[tuple[str, int, str], ...]
    plan: ManagementPlan


@dataclass(frozen=True)
class MxResult:
    plan: ManagementPlan
    retrieval: RetrievalResult
    stamp: int
    elapsed_s: float


def _parse_planner_output(value: dict, provenance: tuple[str, ...]) -> PlannerOutput:
    def items(raw):
        return tuple(ActionItem(item=i["item"], citations=tuple(i["citations"])) for i in raw)

    mx = value["mx_plan"]
    plan = ManagementPlan(
        in_visit_investigations=items(mx["in_visit_investigations"]),
        ordered_investigations=items(mx["ordered_investigations"]),
        recommendations_or_actions=items(mx["recommendations_or_actions"]),
        provenance=provenance,
        reasoning=PlanReasoning(
            analysis=tuple(value["reasoning"]["analysis"]),
            management_goals=tuple(value["reasoning"]["management_goals"]),
        ),
    )
    return PlannerOutput(reasoning=plan.reasoning, plan=plan)


def generate_queries(
    state: AgentState,
    transcript,
    gateway: ModelGateway,
    config: RuntimeConfig = DEFAULT_CONFIG,
    budget_ms: int | None = None,
) -> list[str]:
    request = ModelRequest(
        prompt=QUERY_PROMPT.replace("{case}", render_state(state)),
        tag="mx.queries",
        schema=search_queries_schema(),
        latency_budget_ms=budget_ms or config.call_budget_ms,
        context={"state": state, "transcript": transcript},
    )
    value = gateway.generate_structured(request)
    queries = [q for q in value["search_queries"] if q]
    if len(queries) > config.max_queries:
        log.warning("model produced %d queries; truncating to %d", len(queries), config.max_queries)
        queries = queries[: config.max_queries]
    return queries


def _case_text(state: AgentState) -> str:
    return render_state(state)


def draft_plan(
    state: AgentState,
    transcript,
    gateway: ModelGateway,
    seed: int = 0,
    config: RuntimeConfig = DEFAULT_CONFIG,
    budget_ms: int | None = None,
) -> PlannerOutput:
    """One stochastic document-free draft; citations are pinned empty."""
    prompt = (
        PLAN_PROMPT.replace("{case}", _case_text(state))
        .replace("{transcript}", render_transcript(transcript))
        .replace("{documents_block}", "")
    )
    request = ModelRequest(
        prompt=prompt,
        tag="mx.draft",
        schema=draft_planner_schema(),
        temperature=config.draft_temperature,
        seed=seed,
        latency_budget_ms=budget_ms or config.call_budget_ms,
        context={"state": state, "transcript": transcript},
    )
    value = gateway.generate_structured(request)
    return _parse_planner_output(value, provenance=())


def refine_plans(
    state: AgentState,
    transcript,
    drafts: list[PlannerOutput],
    docs: list[GuidelineDoc],
    gateway: ModelGateway,
    config: RuntimeConfig = DEFAULT_CONFIG,
    budget_ms: int | None = None,
) -> PlannerOutput:
    """Merge drafts into a final plan conditioned on the retrieved documents."""
    if not drafts:
        raise ValueError("refine_plans needs at least one draft")
    if not docs:
        raise NoDocumentsRetrievedError("refine_plans needs retrieved documents")
    doc_ids = tuple(d.doc_id for d in docs)
    schema = planner_schema(doc_ids)
    documents_block = "=== Reference documents ===\n" + render_documents(docs) + "\n\n"
    drafts_text = "\n\n".join(
        f"--- Draft {i + 1} ---\n{render_plan(d.plan)}" for i, d in enumerate(drafts)
    )
    prompt = (
        PLAN_PROMPT.replace("{case}", _case_text(state))
        .replace("{transcript}", render_transcript(transcript))
        .replace("{documents_block}", documents_block)
        + MERGE_SUFFIX.replace("{drafts}", drafts_text)
    )
    request = ModelRequest(
        prompt=prompt,
        tag="mx.refine",
        schema=schema,
        latency_budget_ms=budget_ms or config.call_budget_ms,
        context={"state": state, "transcript": transcript, "drafts": drafts, "doc_ids": doc_ids},
    )
    value = gateway.generate_structured(request)
    return _parse_planner_output(value, provenance=tuple(sorted(doc_ids)))


def verify_citations(plan: ManagementPlan, strict: bool = False) -> CitationReport:
    """Check citation containment against the plan's provenance.

    Lenient mode (default) strips out-of-set citations and keeps the items;
    strict mode raises on the first offender.
    """
    violations = plan.citation_violations()
    if not violations:
        return CitationReport(valid=True, stripped=(), plan=plan)
    if strict:
        category, idx, cite = violations[0]
        raise CitationViolationError(
            f"citation {cite!r} at {category}[{idx}] is not in the plan provenance"
        )
    allowed = set(plan.provenance)
    cleaned = {}
    for category in ("in_visit_investigations", "ordered_investigations", "recommendations_or_actions"):
        cleaned[category] = tuple(
            dc_replace(item, citations=tuple(c for c in item.citations if c in allowed))
            for item in getattr(plan, category)
        )
    stripped_plan = dc_replace(plan, **cleaned)
    return CitationReport(valid=False, stripped=tuple(violations), plan=stripped_plan)


def run_mx(
    state: AgentState,
    transcript,
    index: CorpusIndex,
    gateway: ModelGateway,
    config: RuntimeConfig = DEFAULT_CONFIG,
    clock=None,
    stamp: int | None = None,
) -> MxResult:
    """Full planning pipeline with the retrieve/draft lanes overlapped.

    Installs the final plan into `state` (last-write-wins stamp issued at
    run start, or passed in by a caller that owns the live state) and
    returns it with the retrieval result.
    """
    clock = clock or gateway.clock
    t0 = clock.now()
    deadline = t0 + config.mx_deadline_ms / 1000.0
    if stamp is None:
        stamp = state.next_plan_stamp()

    def remaining_ms() -> int:
        remaining = int((deadline - clock.now()) * 1000)
        if remaining <= 0:
            raise DeadlineExceededError("planning deadline exhausted")
        return remaining

    def retrieval_lane() -> RetrievalResult:
        queries = generate_queries(state, transcript, gateway, config, budget_ms=remaining_ms())
        return retrieve(queries, config.retrieval_budget_tokens, index)

    budget_now = remaining_ms()
    calls = [(retrieval_lane,)]
    for i in range(config.n_drafts):
        calls.append((draft_plan, state, transcript, gateway, i, config, budget_now))
    lanes = spawn_all(clock, calls)

    # If this run is itself inside a clock task, release that registration
    # while joining the lanes; otherwise virtual time cannot advance.
    with clock.suspended():
        errors = [lane.exception() for lane in lanes]
    for exc in errors:
        if exc is not None:
            raise exc
    retrieval: RetrievalResult = lanes[0].result()
    drafts = [lane.result() for lane in lanes[1:]]

    if not retrieval.doc_ids:
        raise NoDocumentsRetrievedError(
            f"no documents fit the {config.retrieval_budget_tokens}-token budget"
        )
    docs = [index.doc(doc_id) for doc_id in retrieval.doc_ids]

    refined = refine_plans(state, transcript, drafts, docs, gateway, config, budget_ms=remaining_ms())
    report = verify_citations(refined.plan, strict=config.strict_citations)
    if report.stripped:
        log.warning("stripped %d out-of-provenance citations", len(report.stripped))
    plan = report.plan

    state.install_plan(plan, stamp)
    return MxResult(plan=plan, retrieval=retrieval, stamp=stamp, elapsed_s=clock.now() - t0)
