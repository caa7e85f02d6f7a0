"""Golden tests for the two wait-action tables."""

import pytest

from tawn.values import UNDEFINED
from tawn.wait import W, WR, WRS, WS, parl_combine, wait_meet

MEET_TABLE = [
    (W, W, W), (W, WR, WR), (W, WS, WS), (W, WRS, WRS),
    (WR, W, WR), (WR, WR, WR), (WR, WS, WRS), (WR, WRS, WRS),
    (WS, W, WS), (WS, WR, WRS), (WS, WS, WS), (WS, WRS, WRS),
    (WRS, W, WRS), (WRS, WR, WRS), (WRS, WS, WRS), (WRS, WRS, WRS),
]

PARL_TABLE = [
    (W, W, W), (W, WR, WR), (W, WS, W), (W, WRS, WR),
    (WR, W, W), (WR, WR, WR), (WR, WS, UNDEFINED), (WR, WRS, UNDEFINED),
    (WS, W, WS), (WS, WR, WRS), (WS, WS, WS), (WS, WRS, WRS),
    (WRS, W, WS), (WRS, WR, WRS), (WRS, WS, UNDEFINED), (WRS, WRS, UNDEFINED),
]


@pytest.mark.parametrize("a,b,expected", MEET_TABLE)
def test_meet_entry(a, b, expected):
    assert wait_meet(a, b) is expected


@pytest.mark.parametrize("a,b,expected", PARL_TABLE)
def test_parl_entry(a, b, expected):
    assert parl_combine(a, b) is expected


def test_meet_is_commutative_idempotent_and_absorbing():
    kinds = [W, WR, WS, WRS]
    for a in kinds:
        assert wait_meet(a, a) is a
        assert wait_meet(a, WRS) is WRS
        for b in kinds:
            assert wait_meet(a, b) is wait_meet(b, a)


def test_parl_gaps_are_exactly_the_synchronising_cases():
    gaps = [(a, b) for (a, b, r) in PARL_TABLE if r is UNDEFINED]
    assert gaps == [(WR, WS), (WR, WRS), (WRS, WS), (WRS, WRS)]
    # A gap appears exactly when the left side waits for a receive and
    # the right side waits for a send.
    for (a, b, r) in PARL_TABLE:
        expected_gap = a.conditional_on_receive and b.conditional_on_send
        assert (r is UNDEFINED) == expected_gap
