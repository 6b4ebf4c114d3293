"""Deterministic scripted rules that exercise every pipeline offline.

This is the backend behind `careloop serve --backend scripted` and the
end-to-end tests: canned but context-sensitive generators keyed by request
tag. Replies derive only from the request (prompt, tag, seed, schema,
context), so every run is reproducible.
"""

from __future__ import annotations

from careloop import schema as cs
from careloop.config import JUDGE_CATEGORIES
from careloop.core.render import render_plan
from careloop.core.types import SUMMARY_FIELDS
from careloop.gateway.base import ModelRequest
from careloop.gateway.embeddings import HashingEmbedder
from careloop.gateway.scripted import ScriptedBackend

WRAP_UP_MARKERS = ("goodbye", "that is all", "that's all", "see you next time")

CONDITION_KEYWORDS = {
    "headache": ("tension headache", ["migraine", "hypertension"]),
    "chest pain": ("stable angina", ["gastro-oesophageal reflux", "musculoskeletal pain"]),
    "cough": ("acute bronchitis", ["asthma", "pneumonia"]),
    "breath": ("asthma", ["copd", "anaemia"]),
    "palpitations": ("atrial fibrillation", ["anxiety", "thyrotoxicosis"]),
}


def _last_patient_text(request: ModelRequest) -> str:
    transcript = request.context.get("transcript") or ()
    for message in reversed(list(transcript)):
        role = getattr(message, "role", None)
        if getattr(role, "value", role) == "patient":
            return message.content
    return ""


def _dialogue_text(request: ModelRequest) -> str:
    transcript = request.context.get("transcript") or ()
    return " ".join(getattr(m, "content", "") for m in transcript).lower()


def _guess_condition(text: str) -> tuple[str, list[str]]:
    for keyword, (probable, alts) in CONDITION_KEYWORDS.items():
        if keyword in text:
            return probable, alts
    return "undetermined", []


def _plan_response(request: ModelRequest) -> dict:
    last = _last_patient_text(request).lower()
    end = any(marker in last for marker in WRAP_UP_MARKERS)
    if end:
        directives = ["Summarize the plan and wrap up the visit."]
    else:
        directives = [
            "Answer the patient's latest question first.",
            "Characterize the leading symptom: onset, duration, severity.",
            "Fill the biggest gap in the history.",
        ]
    return {
        "thoughts": "Respond to the patient, then close the largest information gap.",
        "directives": directives,
        "end_visit": "yes" if end else "no",
    }


def _draft_response(request: ModelRequest) -> str:
    last = _last_patient_text(request)
    directives = request.context.get("directives")
    state = request.context.get("state")
    plan = getattr(state, "plan", None)
    parts = [f"Thanks for telling me that: \"{last.strip()}\"." if last else "Thank you."]
    if plan is not None and not plan.is_empty():
        first = None
        for _, _, item in plan.items():
            first = item
            break
        if first is not None:
            parts.append(f"Based on my current plan, I suggest we start with: {first.item}")
    if directives is not None and not directives.end_visit:
        parts.append("Could you tell me when this started and how severe it feels day to day?")
    else:
        parts.append("Let's wrap up here; please follow the plan we discussed and book the follow-up.")
    return " ".join(parts)


def _refine_response(request: ModelRequest) -> str:
    return request.context.get("draft", "")


def _summary_update(request: ModelRequest) -> dict:
    state = request.context.get("state")
    current = getattr(state, "summary", None)
    out = {name: getattr(current, name) if current else "N/A" for name in SUMMARY_FIELDS}
    transcript = request.context.get("transcript") or ()
    patient_texts = [
        m.content
        for m in transcript
        if getattr(getattr(m, "role", None), "value", None) == "patient"
    ]
    if patient_texts:
        out["chief_complaint"] = patient_texts[0]
        out["history_of_present_illness"] = " / ".join(patient_texts[-3:])
        probable, _ = _guess_condition(" ".join(patient_texts).lower())
        if probable != "undetermined":
            out["confirmed_positive_symptoms"] = f"features consistent with {probable}"
    return out


def _ddx_update(request: ModelRequest) -> dict:
    probable, alts = _guess_condition(_dialogue_text(request))
    return {"probable_diagnosis": probable, "plausible_alternative_diagnoses": alts}


def _queries(request: ModelRequest) -> dict:
    state = request.context.get("state")
    queries = []
    if state is not None:
        differential = state.differential
        queries.append(f"management of {differential.probable_diagnosis} in adults")
        for alt in differential.plausible_alternative_diagnoses[:2]:
            queries.append(f"diagnosis and management of {alt}")
        complaint = state.summary.chief_complaint
        if complaint and complaint != "N/A":
            queries.append(f"assessment of {complaint[:60]}")
    return {"search_queries": queries or ["general adult primary care assessment"]}


def _draft_plan(request: ModelRequest) -> dict:
    state = request.context.get("state")
    dx = state.differential.probable_diagnosis if state is not None else "the presenting complaint"
    seed = request.seed
    extra = [
        "Review current medications for interactions.",
        "Screen for red-flag symptoms.",
        "Assess impact on daily activities.",
        "Check vital signs reported by the patient at home.",
    ][seed % 4]
    return {
        "reasoning": {
            "analysis": [f"The picture is most consistent with {dx}.", extra],
            "management_goals": [f"Confirm {dx}", "Relieve symptoms safely"],
        },
        "mx_plan": {
            "in_visit_investigations": [
                {"item": f"Ask about the time course and triggers of {dx}.", "citations": []}
            ],
            "ordered_investigations": [
                {"item": "Order baseline blood work appropriate to the presentation.", "citations": []}
            ],
            "recommendations_or_actions": [
                {"item": extra, "citations": []},
                {"item": f"Arrange follow-up to reassess {dx} in 1-2 weeks.", "citations": []},
            ],
        },
    }


def _allowed_citations(request: ModelRequest) -> list[str]:
    if request.schema is None:
        return []
    for node in cs.iter_literal_sets(request.schema):
        values = node.sorted_literals()
        if values != ["A", "B"]:
            return values
    return []


def _refine_plan(request: ModelRequest) -> dict:
    state = request.context.get("state")
    dx = state.differential.probable_diagnosis if state is not None else "the presenting complaint"
    cites = _allowed_citations(request)

    def cite(i: int) -> list[str]:
        if not cites:
            return []
        return [cites[i % len(cites)]]

    return {
        "reasoning": {
            "analysis": [
                f"Drafts agree that {dx} is the working diagnosis.",
                "Retrieved guidance supports stepwise investigation before treatment.",
            ],
            "management_goals": [f"Confirm {dx}", "Start guideline-aligned first-line management"],
        },
        "mx_plan": {
            "in_visit_investigations": [
                {"item": f"Characterize {dx}: onset, course, severity, triggers.", "citations": cite(0)},
                {"item": "Have the patient report home vital signs if available.", "citations": []},
            ],
            "ordered_investigations": [
                {"item": "Order first-line investigations per the retrieved guidance.", "citations": cite(1)},
                {"item": "Order baseline blood work to rule out alternatives.", "citations": cite(2)},
            ],
            "recommendations_or_actions": [
                {"item": f"Start first-line management of {dx}.", "citations": cite(0)},
                {"item": "Safety-net: seek urgent care if red-flag symptoms appear.", "citations": cite(1)},
                {"item": "Book a follow-up visit in 1-2 weeks.", "citations": []},
            ],
        },
    }


def _judge(request: ModelRequest) -> dict:
    plan_a = request.context.get("plan_a")
    plan_b = request.context.get("plan_b")
    a_size = len(list(plan_a.items())) if plan_a is not None else 0
    b_size = len(list(plan_b.items())) if plan_b is not None else 0
    if a_size == b_size and plan_a is not None and plan_b is not None:
        winner = "A" if render_plan(plan_a) <= render_plan(plan_b) else "B"
    else:
        winner = "A" if a_size >= b_size else "B"
    out = {}
    for category in JUDGE_CATEGORIES:
        out[f"{category}_analysis"] = [f"Compared both plans on {category.replace('_', ' ')}."]
        out[category] = winner
    return out


def _questionnaire(request: ModelRequest) -> dict:
    state = request.context.get("state")
    dx = state.differential.probable_diagnosis if state is not None else "the working diagnosis"
    return {
        "deviations": "No intentional deviations from the selected guidance.",
        "alternatives": f"Watchful waiting with early review would also be defensible for {dx}.",
        "competing_priorities": "Balancing symptom relief against over-investigation.",
        "cost_effectiveness_side_effects": "First-line options chosen are low-cost with mild side-effect profiles.",
        "prognosis": f"Good with treatment; untreated {dx} risks gradual worsening.",
        "escalation_followup": "Escalate on red-flag symptoms; review at the next visit.",
    }


def _abstract(request: ModelRequest) -> dict:
    body = request.context.get("body", "")
    title = request.context.get("title", "")
    if not title:
        for line in body.splitlines():
            if line.strip().startswith("#"):
                title = line.strip().lstrip("#").strip()
                break
    first_words = " ".join(body.split()[:120])
    return {
        "title": title or "Untitled clinical guidance",
        "abstract": f"Guidance for adults. Covers: {first_words}",
    }


def _sim_outlines(request: ModelRequest) -> dict:
    condition = request.context.get("condition", "the condition")
    n_visits = 3
    if request.schema is not None:
        visits_field = next(f for f in request.schema.fields if f.name == "visits")
        hi = visits_field.node.max_items
        n_visits = hi if hi is not None else 3
    visits = []
    for v in range(1, n_visits + 1):
        visits.append(
            {
                "visit_number": v,
                "completed_interventions": []
                if v == 1
                else [
                    {
                        "provider": "laboratory",
                        "intervention": "blood panel",
                        "goal": f"confirm {condition}",
                        "result": "within normal limits",
                    }
                ],
                "patient_goals": ["understand what is wrong", "get relief"],
                "doctor_goals": [f"narrow the differential for {condition}"],
                "discussion_topics": ["symptom course", "treatment options"],
                "doctor_learned_patient_facts": [f"history relevant to {condition}"],
                "doctor_learned_patient_symptoms": ["primary symptom characterized"],
                "doctor_inferred_dx": [
                    {"condition": condition, "likelihood": "Likely" if v < n_visits else "Confirmed"}
                ],
                "planned_interventions": ["order blood panel"] if v < n_visits else ["start treatment"],
                "next_visit_schedule": "in two weeks" if v < n_visits else "as needed",
            }
        )
    return {"visits": visits}


def _sim_dialogue(request: ModelRequest) -> dict:
    condition = request.context.get("condition", "my symptoms")
    messages = []
    openers = [
        ("patient", f"Hello doctor, I have been struggling with {condition}."),
        ("doctor", "Hello, I am sorry to hear that. When did it start?"),
    ]
    messages.extend({"role": r, "content": c} for r, c in openers)
    for i in range(10):
        messages.append({"role": "patient", "content": f"Detail {i + 1}: it varies through the day, point {i + 1}."})
        messages.append({"role": "doctor", "content": f"Noted, thank you. Follow-up question {i + 1}: anything else?"})
    messages.append({"role": "patient", "content": "No, that covers it, thank you."})
    messages.append({"role": "doctor", "content": "Here is the plan: tests first, then we review in two weeks."})
    messages.append({"role": "patient", "content": "END_OF_DIALOGUE"})
    return {"messages": messages}


def _sim_critique(request: ModelRequest) -> dict:
    return {
        "communication": {"good": ["Warm, plain language."], "bad": []},
        "teaching": {"good": ["Explained the next steps."], "bad": []},
        "clinical_management": {"good": ["Actionable plan given."], "bad": []},
        "clinical_reasoning": {"good": ["Stepwise narrowing of the differential."], "bad": []},
        "realistic_simulation": "yes",
        "correct_differential_diagnosis": "yes",
        "planned_management_steps": "yes",
        "guidelines_compliance": "yes",
    }


def _rxqa_short(request: ModelRequest) -> dict:
    label = request.context.get("label")
    drug = label.drug_name if label is not None else "the drug"
    questions = []
    topics = ("starting dose", "main contraindication", "common side effect", "monitoring requirement", "storage")
    for i, topic in enumerate(topics):
        options = [f"{topic} option {j + 1} for {drug}" for j in range(4)]
        questions.append(
            {
                "question": f"What is the {topic} of {drug}?",
                "options": options,
                "answer": options[i % 4],
            }
        )
    return {"questions": questions}


def _rxqa_challenges(request: ModelRequest) -> str:
    label = request.context.get("label")
    drug = label.drug_name if label is not None else "the drug"
    return (
        f"{drug} requires renal dose adjustment, interacts with anticoagulants, "
        f"and is cautioned in pregnancy. Key interactions: warfarin, NSAIDs."
    )


def _rxqa_scenarios(request: ModelRequest) -> dict:
    label = request.context.get("label")
    drug = label.drug_name if label is not None else "the drug"
    scenarios = []
    for i, twist in enumerate(("renal impairment", "anticoagulant use", "pregnancy")):
        scenarios.append(
            f"A patient presents needing {drug}. They have {twist}. "
            f"They take two other regular medications. Their history is complex. "
            f"Adherence has been inconsistent. The pharmacist must weigh the risks carefully."
        )
    return {"scenarios": scenarios}


def _rxqa_long(request: ModelRequest) -> dict:
    label = request.context.get("label")
    drug = label.drug_name if label is not None else "the drug"
    scenario = request.context.get("scenario", "")
    options = [
        f"Proceed with standard dosing of {drug}",
        f"Reduce the dose of {drug} and monitor",
        f"Substitute an alternative to {drug}",
        f"Delay {drug} until specialist review",
    ]
    return {
        "question": f"{scenario} Given this, what is the best next step regarding {drug}?",
        "options": options,
        "answer": options[1],
    }


def _rxqa_attempt_open(request: ModelRequest) -> dict:
    question = request.context.get("question")
    idx = question.answer_index if question is not None and question.answer_index is not None else 0
    return {"choice": "ABCD"[idx]}


def _rxqa_attempt_closed(request: ModelRequest) -> dict:
    question = request.context.get("question")
    idx = question.answer_index if question is not None and question.answer_index is not None else 0
    return {"choice": "ABCD"[(idx + 1) % 4]}


def build_demo_backend(embed_dim: int = 64, embed_seed: int = 0) -> ScriptedBackend:
    backend = ScriptedBackend(permissive=True, embedder=HashingEmbedder(dim=embed_dim, seed=embed_seed))
    for tag, reply in [
        ("dialogue.plan", _plan_response),
        ("dialogue.draft", _draft_response),
        ("dialogue.refine", _refine_response),
        ("dialogue.summary", _summary_update),
        ("dialogue.ddx", _ddx_update),
        ("mx.queries", _queries),
        ("mx.draft", _draft_plan),
        ("mx.refine", _refine_plan),
        ("mx.judge", _judge),
        ("session.questionnaire", _questionnaire),
        ("corpus.abstract", _abstract),
        ("sim.outlines", _sim_outlines),
        ("sim.dialogue.draft", _sim_dialogue),
        ("sim.dialogue.revise", _sim_dialogue),
        ("sim.critique", _sim_critique),
        ("sim.filter.hallucination", {"answer": "no"}),
        ("sim.filter.behavior", {"answer": "no"}),
        ("sim.filter.desirable", {"answer": "yes"}),
        ("rxqa.gen.short", _rxqa_short),
        ("rxqa.gen.challenges", _rxqa_challenges),
        ("rxqa.gen.scenarios", _rxqa_scenarios),
        ("rxqa.gen.long", _rxqa_long),
        ("rxqa.validate.clear", {"answer": "yes"}),
        ("rxqa.validate.correct", {"answer": "yes"}),
        ("rxqa.validate.unique", {"answer": "no"}),
        ("rxqa.attempt.open", _rxqa_attempt_open),
        ("rxqa.attempt.closed", _rxqa_attempt_closed),
    ]:
        backend.add_rule(reply, tag=tag)
    return backend
