"""Regions: exactly decidable convex sets over (scalars, tail value).

A Region is a conjunction of linear inequalities over the declared scalar
variables and the tail value, an optional per-index coordinate box, and a
``tail_free`` flag.  ``tail_free=False`` additionally pins the tail value to
zero (membership in the c0-like slice); the weak** closure of a region frees
the tail and keeps the same scalar inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Optional, Tuple

from .errors import PatternError
from .patterns import ConstantTail, GeometricTail, Pattern

TAIL = "__tail__"


@dataclass(frozen=True)
class LinRow:
    """sum(coeff * var) <= rhs, variables being scalar names or TAIL."""

    coeffs: Tuple[Tuple[str, Fraction], ...]
    rhs: Fraction

    @staticmethod
    def of(coeffs: Dict[str, Fraction], rhs) -> "LinRow":
        items = tuple(
            sorted((name, Fraction(c)) for name, c in coeffs.items() if c != 0)
        )
        return LinRow(items, Fraction(rhs))

    def value(self, scalars: Dict[str, Fraction], tail: Fraction) -> Fraction:
        total = Fraction(0)
        for name, c in self.coeffs:
            total += c * (tail if name == TAIL else scalars[name])
        return total

    def holds(self, scalars: Dict[str, Fraction], tail: Fraction) -> bool:
        return self.value(scalars, tail) <= self.rhs


def _pattern_sup(p: Pattern, after: int) -> Optional[Fraction]:
    """sup of p.value(k) over k > after; None encodes +inf."""
    after = max(after, p.n0)
    if isinstance(p.tail, ConstantTail):
        return p.tail.c
    a, rho = p.tail.a, p.tail.rho
    if a == 0:
        return Fraction(0)
    if rho < 1:
        # values shrink toward zero keeping the sign of a
        return a * rho ** (after + 1) if a > 0 else Fraction(0)
    if rho == 1:
        return a
    return None if a > 0 else a * rho ** (after + 1)


def _pattern_inf(p: Pattern, after: int) -> Optional[Fraction]:
    sup = _pattern_sup(p.scale(-1), after)
    return None if sup is None else -sup


def simplify_rows(rows: Iterable[LinRow]) -> Tuple[LinRow, ...]:
    """Drop duplicate-direction rows, keeping the tightest right-hand side."""
    best: Dict[Tuple[Tuple[str, Fraction], ...], Fraction] = {}
    order = []
    for row in rows:
        if not row.coeffs and row.rhs >= 0:
            continue  # trivially true
        if row.coeffs not in best:
            order.append(row.coeffs)
            best[row.coeffs] = row.rhs
        elif row.rhs < best[row.coeffs]:
            best[row.coeffs] = row.rhs
    return tuple(LinRow(c, best[c]) for c in order)


@dataclass(frozen=True)
class Region:
    rows: Tuple[LinRow, ...] = ()
    tail_free: bool = True
    coord_box: Optional[Tuple[Pattern, Pattern]] = None

    @staticmethod
    def of(rows: Iterable[LinRow], tail_free: bool = True, coord_box=None) -> "Region":
        return Region(simplify_rows(rows), tail_free, coord_box)

    @staticmethod
    def whole() -> "Region":
        return Region()

    @staticmethod
    def empty() -> "Region":
        # 0 <= -1 is unsatisfiable
        return Region(rows=(LinRow.of({}, Fraction(-1)),))

    def is_whole(self) -> bool:
        return not self.rows and self.tail_free and self.coord_box is None

    def closure(self) -> "Region":
        """weak**-closure within the model: same rows, tail freed."""
        return Region(self.rows, True, self.coord_box)

    def intersect(self, other: "Region") -> "Region":
        box = self.coord_box
        if box is None:
            box = other.coord_box
        elif other.coord_box is not None:
            box = _intersect_boxes(box, other.coord_box)
        return Region.of(
            self.rows + other.rows,
            self.tail_free and other.tail_free,
            box,
        )

    def contains(self, point) -> bool:
        """Exact membership for a Point (from relaxlab.expr)."""
        if not self.tail_free and point.tail_value != 0:
            return False
        for row in self.rows:
            if not row.holds(point.scalars, point.tail_value):
                return False
        if self.coord_box is not None:
            lo, hi = self.coord_box
            n = max(len(point.prefix), lo.n0, hi.n0)
            for k in range(1, n + 1):
                x = point.coord(k)
                if not (lo.value(k) <= x <= hi.value(k)):
                    return False
            t = point.tail_value
            lo_sup = _pattern_sup(lo, n)
            hi_inf = _pattern_inf(hi, n)
            if lo_sup is None or lo_sup > t:
                return False
            if hi_inf is None or hi_inf < t:
                return False
        return True


def _intersect_boxes(a, b):
    lo = _pattern_pointwise(a[0], b[0], max)
    hi = _pattern_pointwise(a[1], b[1], min)
    return (lo, hi)


def _normalized_tail(p: Pattern):
    """Collapse degenerate geometric tails (a == 0 or rho == 1) to constants."""
    t = p.tail
    if isinstance(t, GeometricTail):
        if t.a == 0:
            return ConstantTail(Fraction(0))
        if t.rho == 1:
            return ConstantTail(t.a)
    return t


def _pattern_pointwise(p: Pattern, q: Pattern, pick) -> Pattern:
    """Pointwise max/min of two patterns, exact.

    Mixed geometric/constant tails are supported by extending the prefix
    until the geometric side stays on one side of the constant forever.
    """
    n = max(p.n0, q.n0)
    tp, tq = _normalized_tail(p), _normalized_tail(q)
    if isinstance(tp, ConstantTail) and isinstance(tq, ConstantTail):
        prefix = tuple(pick(p.value(k), q.value(k)) for k in range(1, n + 1))
        return Pattern(prefix, ConstantTail(pick(tp.c, tq.c)))
    if isinstance(tp, GeometricTail) and isinstance(tq, GeometricTail):
        if tp.rho != tq.rho:
            raise PatternError("pointwise combination of different ratios")
        prefix = tuple(pick(p.value(k), q.value(k)) for k in range(1, n + 1))
        return Pattern(prefix, GeometricTail(pick(tp.a, tq.a), tp.rho))
    # one geometric, one constant: once |a| rho**k passes |c| the comparison
    # between the two tails is decided forever
    g = tp if isinstance(tp, GeometricTail) else tq
    c = tq.c if isinstance(tq, ConstantTail) else tp.c
    if c != 0:
        if g.rho < 1:
            settled = lambda k: abs(g.a) * g.rho**k < abs(c)  # noqa: E731
        else:
            settled = lambda k: abs(g.a) * g.rho**k > abs(c)  # noqa: E731
        while not settled(n + 1):
            n += 1
            if n > 4096:
                raise PatternError("pointwise combination did not stabilize")
    prefix = tuple(pick(p.value(k), q.value(k)) for k in range(1, n + 1))
    geo_val = g.a * g.rho ** (n + 1)
    if pick(geo_val, c) == c and geo_val != c:
        tail: object = ConstantTail(c)
    else:
        tail = GeometricTail(g.a, g.rho)
    return Pattern(prefix, tail)
