"""Comparison report over paired exam outcomes.

One row per (condition A, condition B) pair within a question subset:
accuracies with confidence intervals, the McNemar p-value, and its
FDR-adjusted significance stars.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from careloop.rxqa.stats import (
    PairedOutcomes,
    fdr_adjust,
    mcnemar,
    score_exam,
    significance_stars,
)


@dataclass(frozen=True)
class ComparisonRow:
    subset: str
    n: int
    condition_a: str
    accuracy_a: float
    ci_a: tuple[float, float]
    condition_b: str
    accuracy_b: float
    ci_b: tuple[float, float]
    p_value: float
    adjusted_p: float
    stars: str


def compare_conditions(
    rows: Sequence[tuple[str, str, str, PairedOutcomes]],
) -> list[ComparisonRow]:
    """rows: (subset, condition_a_name, condition_b_name, paired outcomes)."""
    raw = []
    for subset, name_a, name_b, paired in rows:
        n = len(paired.ids)
        score_a = score_exam([1 if x else 0 for x in paired.a_correct], [1] * n)
        score_b = score_exam([1 if x else 0 for x in paired.b_correct], [1] * n)
        result = mcnemar(paired)
        raw.append((subset, name_a, score_a, name_b, score_b, result.p_value, n))
    adjusted = fdr_adjust([r[5] for r in raw])
    out = []
    for (subset, name_a, score_a, name_b, score_b, p, n), adj in zip(raw, adjusted):
        out.append(
            ComparisonRow(
                subset=subset,
                n=n,
                condition_a=name_a,
                accuracy_a=score_a.accuracy,
                ci_a=(score_a.ci_low, score_a.ci_high),
                condition_b=name_b,
                accuracy_b=score_b.accuracy,
                ci_b=(score_b.ci_low, score_b.ci_high),
                p_value=p,
                adjusted_p=adj,
                stars=significance_stars(adj),
            )
        )
    return out


def format_table(rows: Sequence[ComparisonRow]) -> str:
    header = (
        "| Subset | N | Test Taker & Setting A | Accuracy A [%] | "
        "Test Taker & Setting B | Accuracy B [%] | P-value | Sig. Level |"
    )
    lines = [header, "|" + " --- |" * 8]
    for r in rows:
        acc_a = f"{100 * r.accuracy_a:.1f} ({100 * r.ci_a[0]:.1f}, {100 * r.ci_a[1]:.1f})"
        acc_b = f"{100 * r.accuracy_b:.1f} ({100 * r.ci_b[0]:.1f}, {100 * r.ci_b[1]:.1f})"
        lines.append(
            f"| {r.subset} | {r.n} | {r.condition_a} | {acc_a} | "
            f"{r.condition_b} | {acc_b} | {r.adjusted_p:.2e} | {r.stars} |"
        )
    return "\n".join(lines)
