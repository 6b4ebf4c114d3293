"""Domain types for the medication-reasoning benchmark."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable


class Jurisdiction(str, Enum):
    FDA = "FDA"
    BNF = "BNF"


class QuestionKind(str, Enum):
    SHORT = "short"
    LONG = "long"


DIFFICULTIES = ("Trivial", "Easy", "Medium", "Hard", "Impossible", "Unrated")


@dataclass(frozen=True)
class MedLabel:
    """One formatted medication label."""

    label_id: str
    drug_name: str
    jurisdiction: Jurisdiction
    body: str
    related_drug_names: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "label_id": self.label_id,
            "drug_name": self.drug_name,
            "jurisdiction": self.jurisdiction.value,
            "body": self.body,
            "related_drug_names": list(self.related_drug_names),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MedLabel":
        return cls(
            label_id=data["label_id"],
            drug_name=data["drug_name"],
            jurisdiction=Jurisdiction(data["jurisdiction"]),
            body=data["body"],
            related_drug_names=tuple(data.get("related_drug_names", ())),
        )


@dataclass(frozen=True)
class ValidationFlags:
    clear: bool
    answer_listed: bool
    answer_correct: bool
    answer_unique: bool

    def all_passed(self) -> bool:
        return self.clear and self.answer_listed and self.answer_correct and self.answer_unique

    def to_dict(self) -> dict:
        return {
            "clear": self.clear,
            "answer_listed": self.answer_listed,
            "answer_correct": self.answer_correct,
            "answer_unique": self.answer_unique,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ValidationFlags":
        return cls(data["clear"], data["answer_listed"], data["answer_correct"], data["answer_unique"])


@dataclass(frozen=True)
class RxQuestion:
    """A four-option MCQ derived from a medication label.

    answer_text is the keyed answer as generated; answer_index is resolved
    by validation through normalized string matching against the options.
    """

    question: str
    options: tuple[str, str, str, str]
    answer_text: str
    kind: QuestionKind
    label_id: str
    jurisdiction: Jurisdiction
    answer_index: int | None = None
    difficulty: str = "Unrated"
    flags: ValidationFlags | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.options) != 4:
            raise ValueError("exactly four options are required")
        if len(set(self.options)) != 4:
            raise ValueError("options must be distinct")
        if self.answer_index is not None and not 0 <= self.answer_index <= 3:
            raise ValueError("answer_index must be in 0..3")
        if self.difficulty not in DIFFICULTIES:
            raise ValueError(f"difficulty must be one of {DIFFICULTIES}")
        object.__setattr__(self, "options", tuple(self.options))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def with_validation(self, flags: ValidationFlags, answer_index: int | None) -> "RxQuestion":
        return replace(self, flags=flags, answer_index=answer_index)

    def to_dict(self) -> dict:
        return {
            "question": self.question,
            "options": list(self.options),
            "answer_index": self.answer_index,
            "answer_text": self.answer_text,
            "kind": self.kind.value,
            "jurisdiction": self.jurisdiction.value,
            "label_id": self.label_id,
            "difficulty": self.difficulty,
            "flags": self.flags.to_dict() if self.flags else None,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RxQuestion":
        return cls(
            question=data["question"],
            options=tuple(data["options"]),
            answer_text=data.get("answer_text", ""),
            kind=QuestionKind(data["kind"]),
            label_id=data["label_id"],
            jurisdiction=Jurisdiction(data["jurisdiction"]),
            answer_index=data.get("answer_index"),
            difficulty=data.get("difficulty", "Unrated"),
            flags=ValidationFlags.from_dict(data["flags"]) if data.get("flags") else None,
            warnings=tuple(data.get("warnings", ())),
        )


def write_jsonl(questions: Iterable[RxQuestion], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(json.dumps(q.to_dict(), ensure_ascii=False) + "\n")


def read_jsonl(path: str | Path) -> list[RxQuestion]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(RxQuestion.from_dict(json.loads(line)))
    return out
