import json

import pytest

from careloop.config import LIKELIHOOD_SCALE
from careloop.errors import SchemaViolationError
from careloop.gateway.base import ModelGateway
from careloop.gateway.scripted import ScriptedBackend
from careloop.sim.filters import filter_dialogue, formatting_check
from careloop.sim.pipeline import (
    Critique,
    GoodBad,
    MultiVisitRecord,
    SimMessage,
    assemble_record,
    critique_dialogue,
    gen_dialogue,
    gen_outlines,
)


def outline_dict(visit_number=1, condition="asthma"):
    return {
        "visit_number": visit_number,
        "completed_interventions": []
        if visit_number == 1
        else [{"provider": "lab", "intervention": "spirometry", "goal": "confirm", "result": "obstructive"}],
        "patient_goals": ["relief"],
        "doctor_goals": ["diagnose"],
        "discussion_topics": ["symptoms"],
        "doctor_learned_patient_facts": ["non-smoker"],
        "doctor_learned_patient_symptoms": ["wheeze"],
        "doctor_inferred_dx": [{"condition": condition, "likelihood": "Likely"}],
        "planned_interventions": ["order spirometry"],
        "next_visit_schedule": "two weeks",
    }


def dialogue_messages(n=24, with_marker=True, alternate=True, distinct=True):
    messages = []
    for i in range(n):
        role = ("patient" if i % 2 == 0 else "doctor") if alternate else "patient"
        suffix = str(i) if distinct else ""
        messages.append({"role": role, "content": f"{role} message {suffix}"})
    if with_marker:
        messages.append({"role": "patient", "content": "END_OF_DIALOGUE"})
    return {"messages": messages}


def favorable_critique():
    return Critique(
        communication=GoodBad(("clear",), ()),
        teaching=GoodBad(),
        clinical_management=GoodBad(),
        clinical_reasoning=GoodBad(),
        realistic_simulation=True,
        correct_differential_diagnosis=True,
        planned_management_steps=True,
        guidelines_compliance=True,
    )


class TestOutlines:
    def test_scripted_three_outlines_stored(self):
        backend = ScriptedBackend()
        backend.add_rule({"visits": [outline_dict(v) for v in (1, 2, 3)]}, tag="sim.outlines")
        outlines = gen_outlines("vignette", "asthma", "knowledge", ModelGateway(backend))
        assert len(outlines) == 3
        assert [o.visit_number for o in outlines] == [1, 2, 3]

    def test_over_count_rejected_then_retried(self):
        # seed-keyed rule: first attempt returns 5 visits (beyond max 3),
        # the retry returns 3; the gateway's schema check drives the retry
        def rule(req):
            count = 5 if req.seed == 0 else 3
            return {"visits": [outline_dict(v) for v in range(1, count + 1)]}

        backend = ScriptedBackend()
        backend.add_rule(rule, tag="sim.outlines")
        outlines = gen_outlines("v", "asthma", "k", ModelGateway(backend), min_visits=2, max_visits=3, seed=0)
        assert len(outlines) == 3

    def test_over_count_exhausts_retries(self):
        backend = ScriptedBackend()
        backend.add_rule({"visits": [outline_dict(v) for v in range(1, 6)]}, tag="sim.outlines")
        with pytest.raises(SchemaViolationError):
            gen_outlines("v", "asthma", "k", ModelGateway(backend, schema_retries=1), max_visits=3)

    def test_likelihood_restricted_to_six_level_scale(self):
        bad = outline_dict()
        bad["doctor_inferred_dx"][0]["likelihood"] = "Certain"
        backend = ScriptedBackend()
        backend.add_rule({"visits": [bad]}, tag="sim.outlines")
        with pytest.raises(SchemaViolationError):
            gen_outlines("v", "asthma", "k", ModelGateway(backend, schema_retries=0), min_visits=1)
        assert len(LIKELIHOOD_SCALE) == 6

    def test_non_contiguous_visit_numbers_rejected(self):
        backend = ScriptedBackend()
        backend.add_rule({"visits": [outline_dict(1), outline_dict(3)]}, tag="sim.outlines")
        with pytest.raises(ValueError):
            gen_outlines("v", "asthma", "k", ModelGateway(backend))


class TestDialogue:
    def gateway_with(self, value, tag="sim.dialogue.draft"):
        backend = ScriptedBackend()
        backend.add_rule(value, tag=tag)
        return ModelGateway(backend)

    def outline(self):
        from careloop.sim.pipeline import VisitOutline

        return VisitOutline.from_dict(outline_dict())

    def test_24_messages_accepted(self):
        gateway = self.gateway_with(dialogue_messages(24))
        messages, flags = gen_dialogue(self.outline(), [], gateway)
        assert len(messages) == 24
        assert not flags.missing_terminal and not flags.length_out_of_range

    def test_terminal_marker_stripped(self):
        gateway = self.gateway_with(dialogue_messages(24))
        messages, _ = gen_dialogue(self.outline(), [], gateway)
        assert all(m.content != "END_OF_DIALOGUE" for m in messages)

    def test_missing_marker_flagged(self):
        gateway = self.gateway_with(dialogue_messages(24, with_marker=False))
        _, flags = gen_dialogue(self.outline(), [], gateway)
        assert flags.missing_terminal

    def test_out_of_range_length_flagged(self):
        gateway = self.gateway_with(dialogue_messages(10))
        messages, flags = gen_dialogue(self.outline(), [], gateway)
        assert len(messages) == 10 and flags.length_out_of_range

    def test_alternation_break_flagged(self):
        gateway = self.gateway_with(dialogue_messages(24, alternate=False))
        _, flags = gen_dialogue(self.outline(), [], gateway)
        assert flags.alternation_broken

    def test_revision_path_uses_revise_tag(self):
        seen = {}

        def rule(req):
            seen["tag"] = req.tag
            seen["has_draft"] = "Draft to improve" in req.prompt
            return dialogue_messages(24)

        backend = ScriptedBackend()
        backend.add_rule(rule, tag="sim.dialogue.revise")
        draft = [SimMessage("patient", "old")]
        gen_dialogue(
            self.outline(),
            [],
            ModelGateway(backend),
            draft_and_critique=(draft, favorable_critique()),
        )
        assert seen["tag"] == "sim.dialogue.revise"
        assert seen["has_draft"]

    def test_roles_restricted_by_schema(self):
        bad = dialogue_messages(24)
        bad["messages"][0]["role"] = "narrator"
        gateway = self.gateway_with(bad)
        with pytest.raises(SchemaViolationError):
            gen_dialogue(self.outline(), [], ModelGateway(gateway._backend, schema_retries=0))


class TestCritique:
    def test_scripted_critique_parsed(self, demo_gateway):
        from careloop.sim.pipeline import VisitOutline

        critique = critique_dialogue(
            [SimMessage("patient", "hi"), SimMessage("doctor", "hello")],
            VisitOutline.from_dict(outline_dict()),
            "vignette",
            demo_gateway,
        )
        assert critique.gate_passed()

    def test_all_booleans_true_passes_gate(self):
        assert favorable_critique().gate_passed()

    def test_empty_goodbad_lists_allowed(self):
        critique = favorable_critique()
        assert critique.teaching.good == () and critique.teaching.bad == ()


class TestFormattingCheck:
    def make(self, n=24, alternate=True, distinct=True):
        value = dialogue_messages(n, with_marker=False, alternate=alternate, distinct=distinct)
        return [SimMessage.from_dict(m) for m in value["messages"]]

    def test_compliant_dialogue_passes(self):
        assert formatting_check(self.make(24)).ok

    def test_below_20_fails(self):
        report = formatting_check(self.make(10))
        assert not report.ok and report.message_count == 10

    def test_above_40_fails(self):
        assert not formatting_check(self.make(42)).ok

    def test_role_imbalance_fails(self):
        messages = self.make(24) + [SimMessage("doctor", f"extra {i}") for i in range(3)]
        report = formatting_check(messages)
        assert not report.ok
        assert abs(report.patient_turns - report.doctor_turns) > 1

    def test_exact_repetition_fails(self):
        messages = self.make(22) + [SimMessage("patient", "same line"), SimMessage("doctor", "x")]
        messages += [SimMessage("patient", "same line"), SimMessage("doctor", "y")]
        report = formatting_check(messages)
        assert not report.ok and "same line" in report.duplicate_messages


class TestFilterGate:
    def gateway(self, hallucination="no", behavior="no", desirable="yes"):
        backend = ScriptedBackend()
        backend.add_rule({"answer": hallucination}, tag="sim.filter.hallucination")
        backend.add_rule({"answer": behavior}, tag="sim.filter.behavior")
        backend.add_rule({"answer": desirable}, tag="sim.filter.desirable")
        return ModelGateway(backend)

    def messages(self, n=24):
        return [SimMessage("patient" if i % 2 == 0 else "doctor", f"m{i}") for i in range(n)]

    def test_hallucination_yes_fails(self):
        result = filter_dialogue(self.messages(), self.gateway(hallucination="yes"))
        assert not result.passed and result.verdicts["hallucination"] is False

    def test_bad_behavior_fails(self):
        result = filter_dialogue(self.messages(), self.gateway(behavior="yes"))
        assert not result.passed

    def test_undesirable_inverse_check_fails(self):
        result = filter_dialogue(self.messages(), self.gateway(desirable="no"))
        assert not result.passed and result.verdicts["desirable_behavior"] is False

    def test_all_favorable_passes(self):
        result = filter_dialogue(self.messages(), self.gateway())
        assert result.passed and all(result.verdicts.values())

    def test_structural_failure_fails_despite_favorable_judges(self):
        result = filter_dialogue(self.messages(10), self.gateway())
        assert not result.passed and result.verdicts["formatting"] is False

    def test_deterministic_across_reruns(self):
        gateway = self.gateway()
        a = filter_dialogue(self.messages(), gateway)
        b = filter_dialogue(self.messages(), gateway)
        assert a == b


class TestAssemble:
    def record(self):
        from careloop.sim.pipeline import VisitOutline

        outlines = [VisitOutline.from_dict(outline_dict(v)) for v in (1, 2, 3)]
        dialogues = [
            [SimMessage("patient", f"v{v} p"), SimMessage("doctor", f"v{v} d")] for v in (1, 2, 3)
        ]
        reports = [["lab report after visit 1"], ["imaging report after visit 2"]]
        return assemble_record("asthma", "vignette", outlines, dialogues, reports)

    def test_three_visits_in_order(self):
        record = self.record()
        assert [o.visit_number for o, _ in record.visits] == [1, 2, 3]

    def test_message_counts_preserved(self):
        record = self.record()
        assert sum(record.message_counts()) == 6

    def test_report_blocks_between_visits(self):
        stream = self.record().flatten()
        kinds = [k for k, _ in stream]
        # reports appear exactly between visit segments
        assert kinds == ["patient", "doctor", "report", "patient", "doctor", "report", "patient", "doctor"]
        assert stream[2][1] == "lab report after visit 1"

    def test_round_trip(self):
        record = self.record()
        clone = MultiVisitRecord.from_dict(json.loads(json.dumps(record.to_dict())))
        assert clone == record

    def test_mismatched_lengths_rejected(self):
        from careloop.sim.pipeline import VisitOutline

        with pytest.raises(ValueError):
            assemble_record("c", "v", [VisitOutline.from_dict(outline_dict())], [])
