"""Eventually-constant / eventually-geometric rational sequences.

A Pattern fixes finitely many leading values and then follows one of two
tail laws for k > n0 (n0 = prefix length):

    Constant(c):        value(k) = c
    Geometric(a, rho):  value(k) = a * rho**k   (absolute index, rho > 0)

Patterns parameterize family centers, series weights, and multiplier
sequences.  Summability (needed by tail sums and by l1 multipliers) means a
Constant(0) tail or a Geometric tail with rho < 1; it is enforced by the
consumers that require it, so growing ratios (rho > 1) remain available for
per-index multiplier sequences such as 2**k.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from .errors import PatternError

Rat = Fraction


@dataclass(frozen=True)
class ConstantTail:
    c: Fraction


@dataclass(frozen=True)
class GeometricTail:
    a: Fraction
    rho: Fraction


Tail = Union[ConstantTail, GeometricTail]


@dataclass(frozen=True)
class Pattern:
    prefix: Tuple[Fraction, ...]
    tail: Tail

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(Fraction(v) for v in self.prefix))
        if isinstance(self.tail, GeometricTail):
            if self.tail.rho <= 0:
                raise PatternError("geometric ratio must be positive")

    # -- constructors -------------------------------------------------

    @staticmethod
    def constant(c, prefix: Sequence = ()) -> "Pattern":
        return Pattern(tuple(Fraction(v) for v in prefix), ConstantTail(Fraction(c)))

    @staticmethod
    def geometric(a, rho, prefix: Sequence = ()) -> "Pattern":
        return Pattern(
            tuple(Fraction(v) for v in prefix),
            GeometricTail(Fraction(a), Fraction(rho)),
        )

    @staticmethod
    def zero() -> "Pattern":
        return Pattern.constant(0)

    @staticmethod
    def half_powers() -> "Pattern":
        """The weights 2**-k."""
        return Pattern.geometric(1, Fraction(1, 2))

    # -- basic queries ------------------------------------------------

    @property
    def n0(self) -> int:
        """Index after which the tail law applies."""
        return len(self.prefix)

    def value(self, k: int) -> Fraction:
        if k < 1:
            raise PatternError(f"pattern index {k} out of range (k >= 1)")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        if isinstance(self.tail, ConstantTail):
            return self.tail.c
        return self.tail.a * self.tail.rho**k

    def eventual_value(self) -> Optional[Fraction]:
        """Limit of value(k), or None when the tail grows without bound."""
        if isinstance(self.tail, ConstantTail):
            return self.tail.c
        if self.tail.a == 0 or self.tail.rho < 1:
            return Fraction(0)
        if self.tail.rho == 1:
            return self.tail.a
        return None

    def is_eventually_zero(self) -> bool:
        if isinstance(self.tail, ConstantTail):
            return self.tail.c == 0
        return self.tail.a == 0

    def is_summable(self) -> bool:
        if isinstance(self.tail, ConstantTail):
            return self.tail.c == 0
        return self.tail.a == 0 or self.tail.rho < 1

    def is_entrywise_nonneg(self) -> bool:
        if any(v < 0 for v in self.prefix):
            return False
        if isinstance(self.tail, ConstantTail):
            return self.tail.c >= 0
        return self.tail.a >= 0

    def is_entrywise_positive(self) -> bool:
        if any(v <= 0 for v in self.prefix):
            return False
        if isinstance(self.tail, ConstantTail):
            return self.tail.c > 0
        return self.tail.a > 0

    # -- arithmetic ---------------------------------------------------

    def scale(self, c) -> "Pattern":
        c = Fraction(c)
        prefix = tuple(c * v for v in self.prefix)
        if isinstance(self.tail, ConstantTail):
            return Pattern(prefix, ConstantTail(c * self.tail.c))
        return Pattern(prefix, GeometricTail(c * self.tail.a, self.tail.rho))

    def with_prefix_length(self, n: int) -> "Pattern":
        """Equivalent pattern whose explicit prefix covers indices 1..n."""
        if n <= len(self.prefix):
            return self
        prefix = tuple(self.value(k) for k in range(1, n + 1))
        return Pattern(prefix, self.tail)

    def tail_sum(self, n: int) -> Fraction:
        """Sum of value(k) over k > n, exactly; raises on divergence."""
        if n < 0:
            raise PatternError("tail_sum index must be >= 0")
        if n < len(self.prefix):
            head = sum(self.prefix[n:], Fraction(0))
            return head + self.tail_sum(len(self.prefix))
        if isinstance(self.tail, ConstantTail):
            if self.tail.c != 0:
                raise PatternError("tail sum of a nonzero constant tail diverges")
            return Fraction(0)
        a, rho = self.tail.a, self.tail.rho
        if a == 0:
            return Fraction(0)
        if rho >= 1:
            raise PatternError("tail sum diverges for ratio >= 1")
        return a * rho ** (n + 1) / (1 - rho)
