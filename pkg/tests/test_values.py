from tawn.values import (INFINITY, UNDEFINED, t_add, t_leq, t_less, t_max,
                         t_mul, t_sub)


def test_infinity_absorbs_addition():
    assert t_add(INFINITY, 5) is INFINITY
    assert t_add(5, INFINITY) is INFINITY
    assert t_add(3, 4) == 7


def test_finite_below_infinity():
    assert t_less(10**9, INFINITY)
    assert not t_less(INFINITY, 10**9)
    assert not t_less(INFINITY, INFINITY)
    assert t_leq(INFINITY, INFINITY)


def test_subtraction_partiality():
    assert t_sub(INFINITY, INFINITY) is UNDEFINED
    assert t_sub(3, 5) is UNDEFINED
    assert t_sub(5, 3) == 2
    assert t_sub(INFINITY, 7) is INFINITY


def test_undefined_poisons_comparisons():
    assert not t_less(UNDEFINED, 3)
    assert not t_less(3, UNDEFINED)
    assert not t_leq(UNDEFINED, UNDEFINED)


def test_mul_and_max():
    assert t_mul(2, INFINITY) is INFINITY
    assert t_mul(0, INFINITY) == 0
    assert t_mul(3, 4) == 12
    assert t_max(3, INFINITY) is INFINITY
    assert t_max(3, 7) == 7
