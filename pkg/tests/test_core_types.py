import json

import pytest

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
    canonical_json,
)


def sample_plan(provenance=("bmj001", "ng001")):
    return ManagementPlan(
        in_visit_investigations=(ActionItem("check blood pressure", ("ng001",)),),
        ordered_investigations=(ActionItem("order ecg", ("bmj001", "ng001")),),
        recommendations_or_actions=(ActionItem("advise rest", ()),),
        provenance=provenance,
        reasoning=PlanReasoning(analysis=("step one",), management_goals=("goal",)),
    )


class TestGuidelineDoc:
    def test_doc_id_pattern_enforced(self):
        with pytest.raises(ValueError):
            GuidelineDoc("NG-136", Corpus.NICE, "t", "a", "b", 1)

    def test_negative_token_count_rejected(self):
        with pytest.raises(ValueError):
            GuidelineDoc("ng136", Corpus.NICE, "t", "a", "b", -1)

    def test_round_trip(self):
        doc = GuidelineDoc("ng136", Corpus.NICE, "Hypertension", "Abs", "# Body", 2)
        assert GuidelineDoc.from_dict(doc.to_dict()) == doc


class TestPatientSummary:
    def test_all_ten_fields_default_na(self):
        summary = PatientSummary()
        assert len(summary.to_dict()) == 10
        assert all(v == "N/A" for v in summary.to_dict().values())

    def test_none_rejected(self):
        with pytest.raises(ValueError):
            PatientSummary(chief_complaint=None)

    def test_round_trip(self):
        summary = PatientSummary(chief_complaint="headache", demographics="34F")
        assert PatientSummary.from_dict(summary.to_dict()) == summary


class TestDifferential:
    def test_probable_required(self):
        with pytest.raises(ValueError):
            Differential("")

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            Differential("a", ("b", "b"))

    def test_probable_not_repeated(self):
        with pytest.raises(ValueError):
            Differential("a", ("a",))

    def test_normalized_dedupes_in_order(self):
        d = Differential.normalized("migraine", ["tension", "migraine", "cluster", "tension"])
        assert d.plausible_alternative_diagnoses == ("tension", "cluster")

    def test_round_trip(self):
        d = Differential("a", ("b", "c"))
        assert Differential.from_dict(d.to_dict()) == d


class TestManagementPlan:
    def test_citation_containment_check(self):
        plan = sample_plan(provenance=("ng001",))
        violations = plan.citation_violations()
        assert ("ordered_investigations", 0, "bmj001") in violations

    def test_clean_plan_has_no_violations(self):
        assert sample_plan().citation_violations() == []

    def test_provenance_is_sorted_set(self):
        plan = sample_plan(provenance=("ng001", "bmj001", "ng001"))
        assert plan.provenance == ("bmj001", "ng001")

    def test_round_trip(self):
        plan = sample_plan()
        assert ManagementPlan.from_dict(plan.to_dict()) == plan

    def test_canonical_json_is_stable(self):
        plan = sample_plan()
        assert canonical_json(plan.to_dict()) == canonical_json(json.loads(canonical_json(plan.to_dict())))


class TestTranscript:
    def test_indices_assigned_sequentially(self):
        t = Transcript()
        t.append(Role.PATIENT, "hi", 1)
        t.append(Role.DOCTOR, "hello", 1)
        assert [m.index for m in t] == [0, 1]

    def test_visit_monotone(self):
        t = Transcript()
        t.append(Role.PATIENT, "hi", 2)
        with pytest.raises(ValueError):
            t.append(Role.DOCTOR, "hello", 1)

    def test_system_report_only_at_boundary(self):
        t = Transcript()
        t.append(Role.SYSTEM_REPORT, "baseline labs", 1)  # before any dialogue: fine
        t.append(Role.PATIENT, "hi", 1)
        with pytest.raises(ValueError):
            t.append(Role.SYSTEM_REPORT, "late report", 1)
        # new visit boundary accepts reports again
        t.append(Role.SYSTEM_REPORT, "new labs", 2)

    def test_round_trip(self):
        t = Transcript()
        t.append(Role.PATIENT, "hi", 1)
        t.append(Role.DOCTOR, "hello", 1)
        assert Transcript.from_dict(t.to_dict()).to_dict() == t.to_dict()

    def test_bad_index_rejected_on_load(self):
        with pytest.raises(ValueError):
            Transcript([Message(Role.PATIENT, "x", 1, 3)])


class TestAgentState:
    def test_visit_number_positive(self):
        with pytest.raises(ValueError):
            AgentState(visit_number=0)

    def test_install_plan_is_last_write_wins(self):
        state = AgentState()
        s1 = state.next_plan_stamp()
        s2 = state.next_plan_stamp()
        newer = sample_plan()
        older = sample_plan(provenance=("ng001",))
        assert state.install_plan(newer, s2)
        assert not state.install_plan(older, s1)  # stale write dropped
        assert state.plan == newer
        assert state.plan_timestamp == s2

    def test_any_interleaving_keeps_max_stamp(self):
        import itertools

        plans = [sample_plan(provenance=(f"ng00{i}",)) for i in range(1, 4)]
        for order in itertools.permutations([1, 2, 3]):
            state = AgentState()
            for stamp in order:
                state.install_plan(plans[stamp - 1], stamp)
            assert state.plan_timestamp == 3
            assert state.plan == plans[2]

    def test_round_trip(self):
        state = AgentState(summary=PatientSummary(chief_complaint="pain"))
        state.install_plan(sample_plan(), 5)
        restored = AgentState.from_dict(state.to_dict())
        assert restored.to_dict() == state.to_dict()

    def test_snapshot_is_independent(self):
        state = AgentState()
        snap = state.snapshot()
        state.replace_summary(PatientSummary(chief_complaint="cough"))
        assert snap.summary.chief_complaint == "N/A"
