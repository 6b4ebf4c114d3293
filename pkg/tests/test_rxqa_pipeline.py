import pytest

from careloop.errors import SchemaViolationError
from careloop.gateway.base import ModelGateway
from careloop.gateway.scripted import ScriptedBackend
from careloop.rxqa.generate import count_sentences, gen_long_questions, gen_short_questions
from careloop.rxqa.report import compare_conditions, format_table
from careloop.rxqa.select import context_dependent, select_questions, stratify_difficulty
from careloop.rxqa.stats import PairedOutcomes
from careloop.rxqa.types import (
    Jurisdiction,
    MedLabel,
    QuestionKind,
    RxQuestion,
    ValidationFlags,
    read_jsonl,
    write_jsonl,
)
from careloop.rxqa.validate import normalize_answer, resolve_answer_index, validate_question


def label(label_id="lbl01", drug="metoprolol", jurisdiction=Jurisdiction.FDA):
    return MedLabel(
        label_id=label_id,
        drug_name=drug,
        jurisdiction=jurisdiction,
        body=f"{drug} label: dosing 25mg, contraindicated in severe bradycardia.",
        related_drug_names=("amlodipine",),
    )


def question_value(question, options, answer):
    return {"question": question, "options": options, "answer": answer}


def rx_question(
    question="What is the starting dose of metoprolol?",
    options=("25mg", "50mg", "75mg", "100mg"),
    answer_text="25mg",
    answer_index=0,
    kind=QuestionKind.SHORT,
    difficulty="Unrated",
    flags=ValidationFlags(True, True, True, True),
):
    return RxQuestion(
        question=question,
        options=options,
        answer_text=answer_text,
        kind=kind,
        label_id="lbl01",
        jurisdiction=Jurisdiction.FDA,
        answer_index=answer_index,
        difficulty=difficulty,
        flags=flags,
    )


class TestShortGeneration:
    def test_five_questions_stored(self, demo_gateway):
        questions = gen_short_questions(label(), demo_gateway)
        assert len(questions) == 5
        assert all(q.kind is QuestionKind.SHORT for q in questions)

    def test_drug_name_missing_flagged(self):
        backend = ScriptedBackend()
        values = [
            question_value(f"What is the dose of metoprolol? v{i}", [f"o{j} v{i}" for j in range(4)], f"o0 v{i}")
            for i in range(4)
        ]
        values.append(question_value("What is the dose?", ["a", "b", "c", "d"], "a"))  # no drug name
        backend.add_rule({"questions": values}, tag="rxqa.gen.short")
        questions = gen_short_questions(label(), ModelGateway(backend))
        assert questions[4].warnings == ("drug_name_missing",)
        assert all(not q.warnings for q in questions[:4])

    def test_wrong_option_count_rejected(self):
        backend = ScriptedBackend()
        bad = [question_value(f"metoprolol q{i}", ["a", "b", "c"], "a") for i in range(5)]
        backend.add_rule({"questions": bad}, tag="rxqa.gen.short")
        with pytest.raises(SchemaViolationError):
            gen_short_questions(label(), ModelGateway(backend, schema_retries=0))

    def test_duplicate_options_rejected(self):
        backend = ScriptedBackend()
        bad = [question_value(f"metoprolol q{i}", ["a", "a", "c", "d"], "a") for i in range(5)]
        backend.add_rule({"questions": bad}, tag="rxqa.gen.short")
        with pytest.raises(ValueError):
            gen_short_questions(label(), ModelGateway(backend))


class TestLongGeneration:
    def test_three_questions_with_audit(self, demo_gateway):
        questions, audit = gen_long_questions(label(), [], demo_gateway)
        assert len(questions) == 3
        assert audit.challenges  # intermediate artifacts kept
        assert len(audit.scenarios) == 3
        assert all(q.kind is QuestionKind.LONG for q in questions)

    def test_short_scenario_flagged(self):
        backend = ScriptedBackend()
        backend.add_rule("challenges text", tag="rxqa.gen.challenges")
        backend.add_rule(
            {"scenarios": ["Too short. Really.", "One. Two. Three. Four. Five sentences here.", "A. B. C. D. E."]},
            tag="rxqa.gen.scenarios",
        )
        backend.add_rule(
            lambda req: question_value(
                f"metoprolol scenario: {req.context['scenario'][:20]}", ["a", "b", "c", "d"], "b"
            ),
            tag="rxqa.gen.long",
        )
        questions, _ = gen_long_questions(label(), [], ModelGateway(backend))
        assert "scenario_under_5_sentences" in questions[0].warnings
        assert "scenario_under_5_sentences" not in questions[1].warnings

    def test_zero_related_labels_allowed(self, demo_gateway):
        questions, _ = gen_long_questions(label(), [], demo_gateway)
        assert len(questions) == 3

    def test_more_than_two_related_rejected(self, demo_gateway):
        extras = [label(f"lbl0{i}", f"drug{i}") for i in range(2, 5)]
        with pytest.raises(ValueError):
            gen_long_questions(label(), extras, demo_gateway)

    def test_related_labels_appended_to_prompt(self):
        seen = {}
        backend = ScriptedBackend()

        def challenges_rule(req):
            seen["prompt"] = req.prompt
            return "c"

        backend.add_rule(challenges_rule, tag="rxqa.gen.challenges")
        backend.add_rule({"scenarios": ["s. s. s. s. s."] * 3}, tag="rxqa.gen.scenarios")
        backend.add_rule(question_value("metoprolol?", ["a", "b", "c", "d"], "a"), tag="rxqa.gen.long")
        related = [label("lbl02", "amlodipine")]
        gen_long_questions(label(), related, ModelGateway(backend))
        assert "amlodipine" in seen["prompt"]

    def test_sentence_counter(self):
        assert count_sentences("One. Two. Three.") == 3
        assert count_sentences("No terminal punctuation") == 1
        assert count_sentences("Q? A! B. ") == 3
        assert count_sentences("") == 0


class TestValidation:
    def test_exact_option_match(self):
        q = rx_question(answer_index=None)
        assert resolve_answer_index(q) == 0

    def test_normalization_5mg_case(self):
        assert normalize_answer("  5MG ") == normalize_answer("5mg")
        q = rx_question(options=("5mg", "10mg", "15mg", "20mg"), answer_text="  5MG ", answer_index=None)
        assert resolve_answer_index(q) == 0

    def test_whitespace_collapse(self):
        assert normalize_answer("take  twice\t daily") == "take twice daily"

    def test_unlisted_answer_flagged(self, demo_gateway):
        q = rx_question(answer_text="not an option", answer_index=None, flags=None)
        validated = validate_question(q, label(), demo_gateway)
        assert validated.flags.answer_listed is False
        assert validated.answer_index is None

    def test_multiple_correct_fails_uniqueness(self):
        backend = ScriptedBackend()
        backend.add_rule({"answer": "yes"}, tag="rxqa.validate.clear")
        backend.add_rule({"answer": "yes"}, tag="rxqa.validate.correct")
        backend.add_rule({"answer": "yes"}, tag="rxqa.validate.unique")  # multiple correct
        validated = validate_question(rx_question(flags=None, answer_index=None), label(), ModelGateway(backend))
        assert validated.flags.answer_unique is False
        assert not validated.flags.all_passed()

    def test_all_gates_pass_with_demo(self, demo_gateway):
        validated = validate_question(rx_question(flags=None, answer_index=None), label(), demo_gateway)
        assert validated.flags.all_passed()
        assert validated.answer_index == 0


class TestSelection:
    def context_gateway(self, dependent_questions):
        """Scripted model that is context-dependent exactly on the given
        question texts: with context it answers the key; without context it
        answers the key only for non-dependent questions."""
        backend = ScriptedBackend()

        def open_rule(req):
            q = req.context["question"]
            return {"choice": "ABCD"[q.answer_index]}

        def closed_rule(req):
            q = req.context["question"]
            if q.question in dependent_questions:
                return {"choice": "ABCD"[(q.answer_index + 1) % 4]}
            return {"choice": "ABCD"[q.answer_index]}

        backend.add_rule(open_rule, tag="rxqa.attempt.open")
        backend.add_rule(closed_rule, tag="rxqa.attempt.closed")
        return ModelGateway(backend)

    def pool(self, n=5):
        return [rx_question(question=f"metoprolol q{i}?") for i in range(n)]

    def test_keeps_exactly_the_context_dependent_subset(self):
        pool = self.pool(5)
        dependent = {pool[0].question, pool[2].question, pool[3].question}
        gateway = self.context_gateway(dependent)
        labels = {"lbl01": label()}
        selected = select_questions(pool, labels, gateway, seed=0, short_target=100, long_target=200)
        assert {q.question for q in selected} == dependent

    def test_context_dependence_definition(self):
        pool = self.pool(2)
        gateway = self.context_gateway({pool[0].question})
        assert context_dependent(pool[0], label(), gateway)
        assert not context_dependent(pool[1], label(), gateway)

    def test_unvalidated_questions_excluded(self):
        pool = self.pool(2)
        pool[1] = rx_question(question="metoprolol unvalidated?", flags=ValidationFlags(True, True, True, False))
        gateway = self.context_gateway({q.question for q in pool})
        selected = select_questions(pool, {"lbl01": label()}, gateway, seed=0)
        assert all(q.flags.all_passed() for q in selected)

    def test_seeded_sampling_reproducible(self):
        pool = [rx_question(question=f"metoprolol q{i}?") for i in range(30)]
        gateway = self.context_gateway({q.question for q in pool})
        a = select_questions(pool, {"lbl01": label()}, gateway, seed=7, short_target=10)
        b = select_questions(pool, {"lbl01": label()}, gateway, seed=7, short_target=10)
        assert [q.question for q in a] == [q.question for q in b]
        assert len(a) == 10

    def test_short_pool_kept_whole_with_warning(self, caplog):
        import logging

        pool = self.pool(3)
        gateway = self.context_gateway({q.question for q in pool})
        with caplog.at_level(logging.WARNING):
            selected = select_questions(pool, {"lbl01": label()}, gateway, seed=0, short_target=100)
        assert len(selected) == 3
        assert any("short of the" in r.message for r in caplog.records)


class TestStratification:
    @pytest.mark.parametrize(
        "difficulty,bucket",
        [("Trivial", "lower"), ("Easy", "lower"), ("Medium", "higher"), ("Hard", "higher"), ("Impossible", "higher")],
    )
    def test_five_ratings_mapped(self, difficulty, bucket):
        q = rx_question(difficulty=difficulty)
        strata = stratify_difficulty([q])
        assert q in strata[bucket]

    def test_unrated_excluded_with_warning(self, caplog):
        import logging

        with caplog.at_level(logging.WARNING):
            strata = stratify_difficulty([rx_question(difficulty="Unrated")])
        assert strata == {"lower": [], "higher": []}
        assert any("unrated" in r.message for r in caplog.records)


class TestSerializationAndReport:
    def test_jsonl_round_trip(self, tmp_path):
        questions = [rx_question(question=f"metoprolol q{i}?", difficulty="Easy") for i in range(3)]
        path = tmp_path / "questions.jsonl"
        write_jsonl(questions, path)
        assert read_jsonl(path) == questions

    def test_comparison_table_shape(self):
        outcomes = PairedOutcomes(
            ids=tuple(f"q{i}" for i in range(40)),
            a_correct=tuple(i % 2 == 0 for i in range(40)),
            b_correct=tuple(i % 4 == 0 for i in range(40)),
        )
        rows = compare_conditions([("Both", "model open", "model closed", outcomes)])
        table = format_table(rows)
        assert "Test Taker & Setting A" in table
        assert "model open" in table and "model closed" in table
        assert rows[0].stars in ("***", "**", "*", "n.s.")
