"""Ordered clause matching over trajectories and outcome classification."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple

from .condlang import ConditionSet, eval_clause
from .trajectory import Termination, Trajectory


class Outcome(str, Enum):
    SUCCESS = "Success"
    EARLY_TERMINATION = "EarlyTermination"
    OVERDUE_TERMINATION = "OverdueTermination"
    FAILURE = "Failure"


@dataclass(frozen=True)
class MatchReport:
    clause_hits: Tuple[Optional[int], ...]

    @property
    def matched_count(self) -> int:
        return sum(h is not None for h in self.clause_hits)

    @property
    def all_matched(self) -> bool:
        return self.matched_count == len(self.clause_hits)

    @property
    def clause_count(self) -> int:
        return len(self.clause_hits)


def match_trajectory(t: Trajectory, cs: ConditionSet) -> MatchReport:
    """
    Greedy earliest assignment of clauses to strictly increasing steps.

    Clause k is only tried once clause k-1 has a hit, and at later steps.
    For subsequence matching this greedy choice is optimal: any valid
    assignment can be shifted to the earliest hits without breaking order.
    """
    hits: list = [None] * len(cs.clauses)
    k = 0
    for step in t.steps:
        if k == len(cs.clauses):
            break
        if eval_clause(cs.clauses[k], step.tree, step.action.interaction_point).matched:
            hits[k] = step.index
            k += 1
    return MatchReport(tuple(hits))


def classify_outcome(t: Trajectory, report: MatchReport) -> Outcome:
    finished = t.termination is Termination.FINISHED_ACTION
    if report.all_matched:
        return Outcome.SUCCESS if finished else Outcome.OVERDUE_TERMINATION
    return Outcome.EARLY_TERMINATION if finished else Outcome.FAILURE


def sub_sr(report: MatchReport) -> Fraction:
    return Fraction(report.matched_count, report.clause_count)
