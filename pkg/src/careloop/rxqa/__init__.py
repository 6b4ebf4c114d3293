from careloop.rxqa.generate import gen_long_questions, gen_short_questions
from careloop.rxqa.select import select_questions, stratify_difficulty
from careloop.rxqa.stats import (
    ExamScore,
    McNemarResult,
    PairedOutcomes,
    fdr_adjust,
    mcnemar,
    score_exam,
    wilson_interval,
)
from careloop.rxqa.types import Jurisdiction, MedLabel, QuestionKind, RxQuestion, ValidationFlags
from careloop.rxqa.validate import normalize_answer, validate_question

__all__ = [
    "ExamScore",
    "Jurisdiction",
    "McNemarResult",
    "MedLabel",
    "PairedOutcomes",
    "QuestionKind",
    "RxQuestion",
    "ValidationFlags",
    "fdr_adjust",
    "gen_long_questions",
    "gen_short_questions",
    "mcnemar",
    "normalize_answer",
    "score_exam",
    "select_questions",
    "stratify_difficulty",
    "validate_question",
    "wilson_interval",
]
