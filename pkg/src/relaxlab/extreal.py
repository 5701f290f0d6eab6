"""Extended reals with the convex-analysis arithmetic conventions.

Values are exact: the finite variant wraps a Fraction.  Multiplication by a
nonnegative scalar follows the convention 0 * (+inf) = +inf, while
0 * (-inf) = 0 (a function identically -inf has full domain, so its
zero-multiple is the zero indicator).  (+inf) + (-inf) raises; it cannot
occur in a valid evaluation and flags a bug when it does.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

from .errors import ExtRealArithmeticError

Rat = Fraction
RatLike = Union[Fraction, int]


class ExtReal:
    """An element of [-inf, +inf] with exact rational finite part."""

    __slots__ = ("kind", "value")

    # kind: -1 -> -inf, 0 -> finite, +1 -> +inf

    def __init__(self, value: RatLike = 0, kind: int = 0):
        self.kind = kind
        self.value = Fraction(value) if kind == 0 else None

    @staticmethod
    def finite(q: RatLike) -> "ExtReal":
        return ExtReal(q, 0)

    def is_finite(self) -> bool:
        return self.kind == 0

    def as_rat(self) -> Fraction:
        if self.kind != 0:
            raise ExtRealArithmeticError(f"{self} is not finite")
        return self.value

    def __repr__(self) -> str:
        if self.kind > 0:
            return "+inf"
        if self.kind < 0:
            return "-inf"
        return str(self.value)

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if self.kind != other.kind:
            return False
        return self.kind != 0 or self.value == other.value

    def __hash__(self):
        return hash((self.kind, self.value))

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        if self.kind != other.kind:
            return self.kind < other.kind
        return self.kind == 0 and self.value < other.value

    def __le__(self, other) -> bool:
        return self == other or self < other

    def __gt__(self, other) -> bool:
        return _coerce(other) < self

    def __ge__(self, other) -> bool:
        return _coerce(other) <= self

    def __add__(self, other) -> "ExtReal":
        other = _coerce(other)
        if self.kind == 0 and other.kind == 0:
            return ExtReal(self.value + other.value)
        if self.kind * other.kind == -1:
            raise ExtRealArithmeticError("(+inf) + (-inf) is undefined")
        return ExtReal(0, self.kind if self.kind != 0 else other.kind)

    __radd__ = __add__

    def __neg__(self) -> "ExtReal":
        if self.kind != 0:
            return ExtReal(0, -self.kind)
        return ExtReal(-self.value)

    def __sub__(self, other) -> "ExtReal":
        return self + (-_coerce(other))

    def scale(self, c: RatLike) -> "ExtReal":
        """c * self for a scalar c >= 0, honoring 0*(+inf) = +inf."""
        c = Fraction(c)
        if c < 0:
            raise ExtRealArithmeticError("scale expects a nonnegative scalar")
        if self.kind > 0:
            return PLUS_INF          # covers c == 0 by the stated convention
        if self.kind < 0:
            return ExtReal(0) if c == 0 else MINUS_INF
        return ExtReal(c * self.value)

    def pos_part(self) -> "ExtReal":
        return self if self > ZERO else ZERO


PLUS_INF = ExtReal(0, 1)
MINUS_INF = ExtReal(0, -1)
ZERO = ExtReal(0)


def _coerce(x) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    return ExtReal(Fraction(x))


def ext_sum(values) -> ExtReal:
    total = ZERO
    for v in values:
        total = total + _coerce(v)
    return total


def ext_max(values) -> ExtReal:
    items = [_coerce(v) for v in values]
    if not items:
        raise ExtRealArithmeticError("max of an empty collection")
    best = items[0]
    for v in items[1:]:
        if v > best:
            best = v
    return best


def ext_min(values) -> ExtReal:
    items = [_coerce(v) for v in values]
    if not items:
        raise ExtRealArithmeticError("min of an empty collection")
    best = items[0]
    for v in items[1:]:
        if v < best:
            best = v
    return best
