"""Proportions, Wilson intervals, the n-1 chi-squared test, certainty summaries."""

from __future__ import annotations

import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Iterable

from .errors import DataError

CERTAINTY_LABELS = ("definitely", "probably", "unsure")


@dataclass(frozen=True)
class Proportion:
    successes: int
    trials: int

    def __post_init__(self):
        if not (0 <= self.successes <= self.trials):
            raise ValueError(f"need 0 <= successes <= trials, got {self.successes}/{self.trials}")

    @property
    def value(self) -> float:
        if self.trials == 0:
            raise ValueError("proportion of zero trials is undefined")
        return self.successes / self.trials

    def __add__(self, other: "Proportion") -> "Proportion":
        return Proportion(self.successes + other.successes, self.trials + other.trials)


def z_for(confidence: float) -> float:
    if not 0 < confidence < 1:
        raise ValueError("confidence must be in (0, 1)")
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval, clamped to [0, 1]."""
    if trials < 1:
        raise ValueError("Wilson interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes {successes} outside [0, {trials}]")
    z = z_for(confidence)
    n = trials
    p = successes / n
    z2 = z * z
    centre = (p + z2 / (2 * n)) / (1 + z2 / n)
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == trials else min(1.0, centre + half)
    return low, high


def chi2_sf_1df(x: float) -> float:
    """Upper tail of the chi-squared distribution with one degree of freedom.

    Q(1/2, x/2) has the closed form erfc(sqrt(x/2)), so no series is needed.
    """
    if x <= 0:
        return 1.0
    return math.erfc(math.sqrt(x / 2))


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    pearson: float
    p_value: float
    n: int
    degenerate: bool = False

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def chisq_n_minus_1(p1: Proportion, p2: Proportion) -> ChiSquareResult:
    """n-1 chi-squared test on a 2x2 table: Pearson's statistic times (N-1)/N."""
    if p1.trials < 1 or p2.trials < 1:
        raise ValueError("both groups need at least one trial")
    a, b = p1.successes, p1.trials - p1.successes
    c, d = p2.successes, p2.trials - p2.successes
    n = a + b + c + d
    margins = (a + b, c + d, a + c, b + d)
    if 0 in margins:
        warnings.warn("a margin of the 2x2 table is zero; the test is undefined, reporting p = 1", RuntimeWarning,
                      stacklevel=2)
        return ChiSquareResult(0.0, 0.0, 1.0, n, degenerate=True)
    pearson = n * (a * d - b * c) ** 2 / math.prod(margins)
    stat = pearson * (n - 1) / n
    return ChiSquareResult(stat, pearson, chi2_sf_1df(stat), n)


@dataclass
class CertaintySummary:
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def distribution(self) -> dict[str, float]:
        t = self.total
        return {k: (v / t if t else 0.0) for k, v in self.counts.items()}


def certainty_summary(records: Iterable) -> dict[str, CertaintySummary]:
    """Per-condition counts and shares of the three certainty labels.

    ``records`` are objects with ``condition`` and ``certainty`` attributes, or
    ``(condition, certainty)`` pairs.
    """
    counts: dict[str, Counter] = defaultdict(Counter)
    for row, rec in enumerate(records, start=1):
        if isinstance(rec, tuple):
            condition, label = rec
        else:
            condition, label = rec.condition, rec.certainty
        if label not in CERTAINTY_LABELS:
            raise DataError(f"record {row}: unknown certainty label {label!r}; expected one of {CERTAINTY_LABELS}")
        counts[condition][label] += 1
    return {
        cond: CertaintySummary({lab: c[lab] for lab in CERTAINTY_LABELS})
        for cond, c in counts.items()
    }
