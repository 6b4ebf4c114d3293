"""Paired statistics for exam comparisons.

Wilson score intervals for binomial accuracies, the McNemar test over
question-level pairing (exact two-sided binomial on the discordant pairs
for small counts, chi-square with continuity correction above the
threshold), and Benjamini-Hochberg FDR adjustment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy import stats as sps


@dataclass(frozen=True)
class PairedOutcomes:
    """Per-question correctness for two conditions on the same question set."""

    ids: tuple[str, ...]
    a_correct: tuple[bool, ...]
    b_correct: tuple[bool, ...]

    def __post_init__(self):
        if not (len(self.ids) == len(self.a_correct) == len(self.b_correct)):
            raise ValueError("ids and outcome sequences must have equal lengths")

    def discordant(self) -> tuple[int, int]:
        """(b, c): questions only A got right, questions only B got right."""
        b = sum(1 for a, bb in zip(self.a_correct, self.b_correct) if a and not bb)
        c = sum(1 for a, bb in zip(self.a_correct, self.b_correct) if not a and bb)
        return b, c

    def swapped(self) -> "PairedOutcomes":
        return PairedOutcomes(self.ids, self.b_correct, self.a_correct)


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0 <= successes <= n:
        raise ValueError("successes must be within 0..n")
    z = sps.norm.ppf(0.5 + confidence / 2.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    # At the boundaries the Wilson bound is exactly 0 or 1 (center == half);
    # pin them so float rounding cannot push the interval off the estimate.
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == n else min(1.0, center + half)
    return low, high


@dataclass(frozen=True)
class ExamScore:
    n: int
    correct: int
    accuracy: float
    ci_low: float
    ci_high: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "correct": self.correct,
            "accuracy": self.accuracy,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
        }


def score_exam(responses: Sequence[int], key: Sequence[int], confidence: float = 0.95) -> ExamScore:
    """Accuracy with a Wilson confidence interval."""
    if len(responses) != len(key):
        raise ValueError("responses and key must align")
    if not key:
        raise ValueError("empty exam")
    correct = sum(1 for r, k in zip(responses, key) if r == k)
    low, high = wilson_interval(correct, len(key), confidence)
    return ExamScore(n=len(key), correct=correct, accuracy=correct / len(key), ci_low=low, ci_high=high)


@dataclass(frozen=True)
class McNemarResult:
    b: int
    c: int
    p_value: float
    method: str  # "exact" | "chi2"

    def to_dict(self) -> dict:
        return {"b": self.b, "c": self.c, "p_value": self.p_value, "method": self.method}


def mcnemar(paired: PairedOutcomes, exact_threshold: int = 25) -> McNemarResult:
    """McNemar test on the discordant pairs.

    Exact two-sided binomial test when b + c < exact_threshold, otherwise
    chi-square with continuity correction. Symmetric in the two conditions.
    """
    b, c = paired.discordant()
    n = b + c
    if n == 0:
        return McNemarResult(b=b, c=c, p_value=1.0, method="exact")
    if n < exact_threshold:
        k = min(b, c)
        tail = sum(math.comb(n, i) for i in range(k + 1)) / (2**n)
        p = min(1.0, 2.0 * tail)
        return McNemarResult(b=b, c=c, p_value=p, method="exact")
    statistic = (abs(b - c) - 1) ** 2 / n
    p = float(sps.chi2.sf(statistic, df=1))
    return McNemarResult(b=b, c=c, p_value=min(1.0, max(p, math.nextafter(0.0, 1.0))), method="chi2")


def fdr_adjust(p_values: Sequence[float]) -> list[float]:
    """Benjamini-Hochberg step-up adjustment, output in input order."""
    m = len(p_values)
    if m == 0:
        return []
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value out of range: {p}")
    order = sorted(range(m), key=lambda i: p_values[i])
    adjusted = [0.0] * m
    running_min = 1.0
    for rank_from_top in range(m, 0, -1):
        idx = order[rank_from_top - 1]
        candidate = p_values[idx] * m / rank_from_top
        running_min = min(running_min, candidate)
        adjusted[idx] = min(1.0, running_min)
    return adjusted


def significance_stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return "n.s."
