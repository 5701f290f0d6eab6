from fractions import Fraction

import pytest

from relaxlab.errors import ExtRealArithmeticError
from relaxlab.extreal import MINUS_INF, PLUS_INF, ExtReal, ext_max, ext_sum


def test_total_order():
    assert MINUS_INF < ExtReal(Fraction(-10**9)) < ExtReal(0) < PLUS_INF
    assert not (PLUS_INF < PLUS_INF)
    assert MINUS_INF <= MINUS_INF


def test_addition_rules():
    assert ExtReal(Fraction(1, 3)) + ExtReal(Fraction(2, 3)) == ExtReal(1)
    assert PLUS_INF + ExtReal(5) == PLUS_INF
    assert MINUS_INF + ExtReal(5) == MINUS_INF
    with pytest.raises(ExtRealArithmeticError):
        _ = PLUS_INF + MINUS_INF


def test_zero_times_plus_inf_is_plus_inf():
    assert PLUS_INF.scale(0) == PLUS_INF


def test_zero_times_minus_inf_is_zero():
    # 0 * f for f identically -inf acts as the indicator of dom f = whole space
    assert MINUS_INF.scale(0) == ExtReal(0)


def test_positive_scaling():
    assert MINUS_INF.scale(Fraction(1, 2)) == MINUS_INF
    assert ExtReal(Fraction(3, 4)).scale(2) == ExtReal(Fraction(3, 2))


def test_scale_rejects_negative():
    with pytest.raises(ExtRealArithmeticError):
        ExtReal(1).scale(-1)


def test_aggregates():
    vals = [ExtReal(1), ExtReal(Fraction(1, 2)), MINUS_INF]
    assert ext_sum(vals) == MINUS_INF
    assert ext_max(vals) == ExtReal(1)


def test_pos_part():
    assert ExtReal(-3).pos_part() == ExtReal(0)
    assert MINUS_INF.pos_part() == ExtReal(0)
    assert PLUS_INF.pos_part() == PLUS_INF
