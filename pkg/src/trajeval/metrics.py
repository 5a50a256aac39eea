"""
Benchmark metrics.

All arithmetic is exact (``Fraction``); :func:`percent` rounds half-up to two
decimals and is meant to be called only when emitting reports.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from .evalengine import Outcome
from .trajectory import ABILITY_WEIGHTS, ExplorationAbility, Subset


class EmptyResultSet(ValueError):
    pass


class InsufficientRuns(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class Difficulty(str, Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"


def difficulty_by_steps(golden_steps: int) -> Difficulty:
    if golden_steps < 1:
        raise ValueError("golden_steps must be >= 1")
    if golden_steps < 8:
        return Difficulty.EASY
    if golden_steps < 20:
        return Difficulty.MEDIUM
    return Difficulty.HARD


def exploration_weight(abilities: Iterable[ExplorationAbility]) -> Fraction:
    return sum((ABILITY_WEIGHTS[ExplorationAbility(a)] for a in abilities), Fraction(0))


def difficulty_by_weight(abilities: Iterable[ExplorationAbility]) -> Difficulty:
    total = exploration_weight(abilities)
    if total <= 1:
        return Difficulty.EASY
    if total <= 2:
        return Difficulty.MEDIUM
    return Difficulty.HARD


def task_difficulty(subset: Subset, golden_steps: int, abilities: Sequence[ExplorationAbility]) -> Difficulty:
    """GUI-Reasoning tasks are graded by exploration weight, the rest by golden steps."""
    if Subset(subset) is Subset.GUI_REASONING:
        return difficulty_by_weight(abilities)
    return difficulty_by_steps(golden_steps)


@dataclass(frozen=True)
class TaskResult:
    task_id: str
    outcome: Outcome
    sub_sr: Fraction
    steps_taken: int
    golden_steps: int
    subset: Subset
    difficulty: Difficulty
    noise_types_fired: Mapping[str, int] = field(default_factory=dict)
    run: int = 0
    clause_hits: tuple = ()
    error: Optional[str] = None

    @property
    def step_ratio(self) -> Fraction:
        return step_ratio(self.steps_taken, self.golden_steps)

    @property
    def all_matched(self) -> bool:
        return self.sub_sr == 1


def _require(results: Sequence) -> None:
    if not results:
        raise EmptyResultSet("no results to aggregate")


def success_rate(results: Sequence[TaskResult]) -> Fraction:
    _require(results)
    return Fraction(sum(r.outcome is Outcome.SUCCESS for r in results), len(results))


def mean_sub_sr(results: Sequence[TaskResult]) -> Fraction:
    _require(results)
    return sum((r.sub_sr for r in results), Fraction(0)) / len(results)


def failure_distribution(results: Sequence[TaskResult]) -> Dict[Outcome, Fraction]:
    _require(results)
    counts = Counter(r.outcome for r in results)
    return {o: Fraction(counts[o], len(results)) for o in Outcome}


def step_ratio(steps_taken: int, golden_steps: int) -> Fraction:
    if golden_steps < 1:
        raise ValueError("golden_steps must be >= 1")
    return Fraction(steps_taken, golden_steps)


def mean_step_ratio(results: Sequence[TaskResult]) -> Fraction:
    _require(results)
    return sum((r.step_ratio for r in results), Fraction(0)) / len(results)


def pass_at_k(success_matrix: Mapping[str, Sequence[bool]], k: int) -> Fraction:
    """Fraction of tasks with at least one success among their first ``k`` runs."""
    if not success_matrix:
        raise EmptyResultSet("empty success matrix")
    if k < 1:
        raise ValueError("k must be >= 1")
    passed = 0
    for task_id, runs in success_matrix.items():
        if len(runs) < k:
            raise InsufficientRuns(f"{task_id}: {len(runs)} runs < k={k}")
        passed += any(runs[:k])
    return Fraction(passed, len(success_matrix))


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class Agreement:
    counts: ConfusionCounts
    auto_sr: Fraction
    human_sr: Fraction
    accuracy: Fraction


def agreement_from_counts(counts: ConfusionCounts) -> Agreement:
    n = counts.total
    if n == 0:
        raise EmptyResultSet("no labelled tasks")
    return Agreement(
        counts=counts,
        auto_sr=Fraction(counts.tp + counts.fp, n),
        human_sr=Fraction(counts.tp + counts.fn, n),
        accuracy=Fraction(counts.tp + counts.tn, n),
    )


def agreement(auto: Sequence[Outcome], human: Sequence[bool]) -> Agreement:
    """Confusion matrix of auto-eval Success (positive) against human success labels."""
    if len(auto) != len(human):
        raise LengthMismatch(f"{len(auto)} auto outcomes vs {len(human)} human labels")
    c = Counter((Outcome(a) is Outcome.SUCCESS, bool(h)) for a, h in zip(auto, human))
    return agreement_from_counts(
        ConfusionCounts(tp=c[True, True], fp=c[True, False], fn=c[False, True], tn=c[False, False])
    )


def percent(x: Fraction) -> Decimal:
    """``x`` as a percentage, rounded half-up to two decimals."""
    x = Fraction(x)
    # floor(x * 10^4 + 1/2) in integers, so ties are decided exactly.
    sign = -1 if x < 0 else 1
    a = abs(x)
    hundredths = (2 * a.numerator * 10000 + a.denominator) // (2 * a.denominator)
    return Decimal(sign * hundredths).scaleb(-2)


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def group_results(results: Iterable[TaskResult], key) -> Dict[object, List[TaskResult]]:
    groups: Dict[object, List[TaskResult]] = {}
    for r in results:
        groups.setdefault(key(r), []).append(r)
    return groups
