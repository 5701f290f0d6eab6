import random
from fractions import Fraction

import pytest

from relaxlab.errors import PatternError
from relaxlab.patterns import Pattern


def test_half_powers_values():
    w = Pattern.half_powers()  # 2**-k
    assert [w.value(k) for k in (1, 2, 3)] == [
        Fraction(1, 2),
        Fraction(1, 4),
        Fraction(1, 8),
    ]


def test_tail_sum_geometric():
    w = Pattern.half_powers()
    assert w.tail_sum(3) == Fraction(1, 8)
    assert w.tail_sum(0) == 1


def test_tail_sum_zero_constant():
    assert Pattern.constant(0).tail_sum(7) == 0


def test_tail_sum_divergent():
    with pytest.raises(PatternError):
        Pattern.constant(1).tail_sum(2)
    with pytest.raises(PatternError):
        Pattern.geometric(1, 2).tail_sum(0)


def test_tail_sum_through_prefix():
    # prefix covers k = 1, 2; geometric values resume at k = 3 with 2**-3
    w = Pattern.geometric(1, Fraction(1, 2), prefix=[5, 7])
    assert w.tail_sum(0) == 5 + 7 + Fraction(1, 4)


def test_tail_sum_exactness_random():
    # partial sums agree with the closed form: sum_{n<k<=m} w_k
    # equals tail_sum(n) - tail_sum(m) exactly
    rng = random.Random(7)
    for _ in range(10):
        a = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        rho = Fraction(rng.randint(1, 7), 8)
        prefix = [Fraction(rng.randint(-5, 5), 3) for _ in range(rng.randint(0, 4))]
        w = Pattern.geometric(a, rho, prefix=prefix)
        n = rng.randint(0, 6)
        m = rng.randint(n + 1, 64)
        partial = sum(w.value(k) for k in range(n + 1, m + 1))
        assert partial == w.tail_sum(n) - w.tail_sum(m)


def test_eventual_values():
    assert Pattern.constant(3, prefix=[1]).eventual_value() == 3
    assert Pattern.half_powers().eventual_value() == 0
    assert Pattern.geometric(1, 2).eventual_value() is None
    assert Pattern.geometric(5, 1).eventual_value() == 5


def test_entrywise_checks():
    assert Pattern.half_powers().is_entrywise_positive()
    assert not Pattern.constant(0).is_entrywise_positive()
    assert Pattern.constant(0).is_entrywise_nonneg()
    assert not Pattern.geometric(-1, Fraction(1, 2)).is_entrywise_nonneg()


def test_ratio_must_be_positive():
    with pytest.raises(PatternError):
        Pattern.geometric(1, 0)


def test_with_prefix_length():
    w = Pattern.half_powers().with_prefix_length(3)
    assert w.prefix == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8))
    assert all(w.value(k) == Pattern.half_powers().value(k) for k in range(1, 9))
