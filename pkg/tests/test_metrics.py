import random
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from trajeval.evalengine import Outcome
from trajeval.metrics import (
    ConfusionCounts,
    Difficulty,
    EmptyResultSet,
    InsufficientRuns,
    LengthMismatch,
    TaskResult,
    agreement,
    agreement_from_counts,
    difficulty_by_steps,
    difficulty_by_weight,
    failure_distribution,
    mean_step_ratio,
    mean_sub_sr,
    pass_at_k,
    percent,
    step_ratio,
    success_rate,
    task_difficulty,
)
from trajeval.trajectory import ExplorationAbility as EA, Subset

ICON, HFD, HNAV = EA.ICON_UNDERSTANDING, EA.HIDDEN_FUNCTION_DISCOVERY, EA.HIERARCHICAL_NAVIGATION


@pytest.mark.parametrize(
    "steps,expected",
    [(1, Difficulty.EASY), (7, Difficulty.EASY), (8, Difficulty.MEDIUM), (19, Difficulty.MEDIUM), (20, Difficulty.HARD), (31, Difficulty.HARD)],
)
def test_difficulty_by_steps(steps, expected):
    assert difficulty_by_steps(steps) is expected


@pytest.mark.parametrize(
    "abilities,expected",
    [
        ([ICON], Difficulty.EASY),
        ([HFD], Difficulty.EASY),
        ([ICON, HFD], Difficulty.MEDIUM),
        ([HNAV], Difficulty.MEDIUM),
        ([ICON, HNAV], Difficulty.HARD),
        ([HNAV, HFD], Difficulty.HARD),
        ([HNAV, HFD, HFD], Difficulty.HARD),
        ([], Difficulty.EASY),
    ],
)
def test_difficulty_by_weight(abilities, expected):
    assert difficulty_by_weight(abilities) is expected


def test_gui_reasoning_uses_weight():
    assert task_difficulty(Subset.GUI_REASONING, 30, [ICON]) is Difficulty.EASY
    assert task_difficulty(Subset.BASE, 30, [ICON]) is Difficulty.HARD


def _result(outcome, sub=None, steps=1, golden=1, task_id="t"):
    if sub is None:
        sub = Fraction(1) if outcome in (Outcome.SUCCESS, Outcome.OVERDUE_TERMINATION) else Fraction(0)
    return TaskResult(task_id, outcome, sub, steps, golden, Subset.BASE, Difficulty.EASY)


def test_success_rate_headline():
    rs = [_result(Outcome.SUCCESS)] * 539 + [_result(Outcome.FAILURE)] * 541
    sr = success_rate(rs)
    assert sr == Fraction(539, 1080)
    assert percent(sr) == Decimal("49.91")


def test_empty_result_set():
    for fn in (success_rate, mean_sub_sr, failure_distribution, mean_step_ratio):
        with pytest.raises(EmptyResultSet):
            fn([])


def test_distribution_sums_to_one():
    rng = random.Random(3)
    rs = [_result(rng.choice(list(Outcome))) for _ in range(97)]
    dist = failure_distribution(rs)
    assert set(dist) == set(Outcome)
    assert sum(dist.values()) == 1


def test_mean_sub_sr():
    rs = [_result(Outcome.FAILURE, Fraction(1, 2)), _result(Outcome.SUCCESS, Fraction(1))]
    assert mean_sub_sr(rs) == Fraction(3, 4)


@pytest.mark.parametrize("steps,golden,expected", [(4, 4, 1), (15, 5, 3), (9, 6, Fraction(3, 2)), (1, 4, Fraction(1, 4))])
def test_step_ratio(steps, golden, expected):
    assert step_ratio(steps, golden) == expected


def test_mean_step_ratio():
    rs = [_result(Outcome.SUCCESS, steps=4, golden=4), _result(Outcome.FAILURE, steps=15, golden=5)]
    assert mean_step_ratio(rs) == 2


def test_pass_at_k_single_task():
    m = {"t": [False, False, False, True, False]}
    assert [pass_at_k(m, k) for k in range(1, 6)] == [0, 0, 0, 1, 1]


def test_pass_at_k_insufficient_runs():
    with pytest.raises(InsufficientRuns):
        pass_at_k({"a": [True, False], "b": [True]}, 2)
    with pytest.raises(EmptyResultSet):
        pass_at_k({}, 1)


@given(st.dictionaries(st.text(max_size=3), st.lists(st.booleans(), min_size=5, max_size=5), min_size=1, max_size=20))
def test_pass_at_k_monotone(matrix):
    values = [pass_at_k(matrix, k) for k in range(1, 6)]
    assert values == sorted(values)
    assert values[0] == Fraction(sum(r[0] for r in matrix.values()), len(matrix))


def test_agreement_overall_row():
    a = agreement_from_counts(ConfusionCounts(534, 5, 22, 519))
    assert (percent(a.auto_sr), percent(a.human_sr), percent(a.accuracy)) == (
        Decimal("49.91"),
        Decimal("51.48"),
        Decimal("97.50"),
    )


def test_agreement_long_horizon_row():
    a = agreement_from_counts(ConfusionCounts(9, 0, 0, 51))
    assert (percent(a.auto_sr), percent(a.human_sr), percent(a.accuracy)) == (
        Decimal("15.00"),
        Decimal("15.00"),
        Decimal("100.00"),
    )


def test_agreement_lists():
    auto = [Outcome.SUCCESS, Outcome.SUCCESS, Outcome.OVERDUE_TERMINATION, Outcome.FAILURE]
    human = [True, False, True, False]
    a = agreement(auto, human)
    assert a.counts == ConfusionCounts(1, 1, 1, 1)
    with pytest.raises(LengthMismatch):
        agreement(auto, human[:3])


@given(st.lists(st.tuples(st.sampled_from(list(Outcome)), st.booleans()), min_size=1, max_size=60))
def test_accuracy_identity(pairs):
    a = agreement([p[0] for p in pairs], [p[1] for p in pairs])
    c = a.counts
    assert a.accuracy == 1 - Fraction(c.fp + c.fn, c.total)
    assert c.total == len(pairs)


@pytest.mark.parametrize(
    "x,expected",
    [(Fraction(1, 3), "33.33"), (Fraction(2, 3), "66.67"), (Fraction(1, 80000), "0.00"), (Fraction(1, 20000), "0.01"), (Fraction(1), "100.00")],
)
def test_percent_half_up(x, expected):
    assert percent(x) == Decimal(expected)
