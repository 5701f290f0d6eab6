"""Convex-by-construction expression trees over k-indexed atoms and scalars.

The DSL models functions on two sequence classes:

* Primal points: finitely supported rational sequences plus named scalars
  (the computable stand-in for c0 x R^m); the tail value is pinned to 0.
* Bidual points: eventually constant sequences (the stand-in for l-infinity);
  the tail value is free.

Family-indexed expressions depend on a free index k >= 1 and become scalar
expressions through SupK / LimSupK / SeriesK (the upper sum) / AtIndex.
Every constructor preserves convexity: scalings are nonnegative, maxima and
suprema of convex functions are convex, and series use nonnegative weights.
Evaluation is exact, with values in the extended reals.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import singledispatch
from typing import Dict, Iterator, Optional, Sequence, Tuple, Union

from .errors import ConvexityError, EvalError, SpaceMismatchError
from .extreal import MINUS_INF, PLUS_INF, ZERO, ExtReal, ext_max, ext_sum
from .patterns import GeometricTail, Pattern
from .regions import Region

Rat = Fraction


class Space(Enum):
    PRIMAL = "primal"
    BIDUAL = "bidual"


class Arity(Enum):
    SCALAR = "scalar"
    FAMILY = "family"


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Point:
    """A sequence-plus-scalars point of one of the two model spaces."""

    prefix: Tuple[Fraction, ...]
    tail_value: Fraction
    scalar_items: Tuple[Tuple[str, Fraction], ...]
    space: Space

    @staticmethod
    def primal(prefix: Sequence = (), scalars: Optional[Dict] = None) -> "Point":
        return Point(
            tuple(Fraction(v) for v in prefix),
            Fraction(0),
            _freeze_scalars(scalars),
            Space.PRIMAL,
        )

    @staticmethod
    def bidual(
        prefix: Sequence = (), tail=0, scalars: Optional[Dict] = None
    ) -> "Point":
        return Point(
            tuple(Fraction(v) for v in prefix),
            Fraction(tail),
            _freeze_scalars(scalars),
            Space.BIDUAL,
        )

    def __post_init__(self):
        if self.space is Space.PRIMAL and self.tail_value != 0:
            raise EvalError("primal points have tail value 0")

    @property
    def scalars(self) -> Dict[str, Fraction]:
        return dict(self.scalar_items)

    def coord(self, k: int) -> Fraction:
        if k < 1:
            raise EvalError(f"coordinate index {k} out of range")
        if k <= len(self.prefix):
            return self.prefix[k - 1]
        return self.tail_value

    def scalar(self, name: str) -> Fraction:
        for key, value in self.scalar_items:
            if key == name:
                return value
        raise EvalError(f"point has no scalar named {name!r}")

    def embed(self) -> "Point":
        """The canonical inclusion of a primal point into the bidual space."""
        if self.space is Space.BIDUAL:
            return self
        return Point(self.prefix, self.tail_value, self.scalar_items, Space.BIDUAL)


def _freeze_scalars(scalars: Optional[Dict]) -> Tuple[Tuple[str, Fraction], ...]:
    if not scalars:
        return ()
    return tuple(sorted((k, Fraction(v)) for k, v in scalars.items()))


def mix_points(p: Point, q: Point, t: Fraction) -> Point:
    """Exact convex combination t*p + (1-t)*q of same-space points."""
    if p.space is not q.space:
        raise SpaceMismatchError("cannot mix points of different spaces")
    t = Fraction(t)
    n = max(len(p.prefix), len(q.prefix))
    prefix = tuple(t * p.coord(k) + (1 - t) * q.coord(k) for k in range(1, n + 1))
    tail = t * p.tail_value + (1 - t) * q.tail_value
    names = {k for k, _ in p.scalar_items} | {k for k, _ in q.scalar_items}
    scalars = {name: t * p.scalar(name) + (1 - t) * q.scalar(name) for name in names}
    if p.space is Space.PRIMAL:
        return Point.primal(prefix, scalars)
    return Point.bidual(prefix, tail, scalars)


# ---------------------------------------------------------------------------
# expression nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoordAbs:
    """Family member k evaluates |x_k - center_k|."""

    center: Pattern
    space: Space = Space.PRIMAL


@dataclass(frozen=True)
class CoordLin:
    """Family member k evaluates coeff_k * x_k."""

    coeff: Pattern
    space: Space = Space.PRIMAL


@dataclass(frozen=True)
class ScalarTerm:
    """coeff * (named scalar variable)."""

    name: str
    coeff: Fraction
    space: Space = Space.PRIMAL


@dataclass(frozen=True)
class Const:
    """Family member k evaluates the additive constant values_k."""

    values: Pattern
    space: Space = Space.PRIMAL


@dataclass(frozen=True)
class TailConst:
    """A scalar rational constant."""

    value: Fraction
    space: Space = Space.PRIMAL


@dataclass(frozen=True)
class NegInfConst:
    """The constant -inf (the limsup convention for finite families)."""

    space: Space = Space.PRIMAL


@dataclass(frozen=True)
class AddFinite:
    children: Tuple["Expr", ...]
    space: Space = Space.PRIMAL

    def __post_init__(self):
        if not self.children:
            raise ConvexityError("AddFinite needs at least one child")


@dataclass(frozen=True)
class ScaleNonneg:
    coeff: Fraction
    child: "Expr"
    space: Space = Space.PRIMAL

    def __post_init__(self):
        if self.coeff < 0:
            raise ConvexityError(
                f"ScaleNonneg coefficient {self.coeff} is negative"
            )


@dataclass(frozen=True)
class ScaleIndexed:
    """Family member k evaluates weights_k * child_k (weights >= 0)."""

    weights: Pattern
    child: "Expr"
    space: Space = Space.PRIMAL

    def __post_init__(self):
        if not self.weights.is_entrywise_nonneg():
            raise ConvexityError("ScaleIndexed weights must be entrywise >= 0")


@dataclass(frozen=True)
class MaxFinite:
    children: Tuple["Expr", ...]
    space: Space = Space.PRIMAL

    def __post_init__(self):
        if not self.children:
            raise ConvexityError("MaxFinite needs at least one child")


@dataclass(frozen=True)
class PosPart:
    child: "Expr"
    space: Space = Space.PRIMAL


@dataclass(frozen=True)
class SeriesK:
    """Upper sum over k of weights_k * term_k.

    Divergence evaluates to +inf (never an error); a nonzero eventual
    weight-times-term product reads as a domain restriction downstream.
    """

    weights: Pattern
    term: "Expr"
    space: Space = Space.PRIMAL

    def __post_init__(self):
        if arity(self.term) is not Arity.FAMILY:
            raise ConvexityError("SeriesK needs a family-indexed term")
        if not self.weights.is_entrywise_nonneg():
            raise ConvexityError("SeriesK weights must be entrywise >= 0")
        if not self.weights.is_summable() and not is_certified_nonneg(self.term):
            raise ConvexityError(
                "SeriesK with non-summable weights needs a nonnegative term"
            )


@dataclass(frozen=True)
class SupK:
    term: "Expr"
    space: Space = Space.PRIMAL

    def __post_init__(self):
        if arity(self.term) is not Arity.FAMILY:
            raise ConvexityError("SupK needs a family-indexed term")


@dataclass(frozen=True)
class LimSupK:
    term: "Expr"
    space: Space = Space.PRIMAL

    def __post_init__(self):
        if arity(self.term) is not Arity.FAMILY:
            raise ConvexityError("LimSupK needs a family-indexed term")


@dataclass(frozen=True)
class AtIndex:
    """Family member pinned at a concrete index k."""

    k: int
    term: "Expr"
    space: Space = Space.PRIMAL

    def __post_init__(self):
        if self.k < 1:
            raise ConvexityError("AtIndex requires k >= 1")
        if arity(self.term) is not Arity.FAMILY:
            raise ConvexityError("AtIndex needs a family-indexed term")


@dataclass(frozen=True)
class IndicatorRegion:
    region: Region
    space: Space = Space.PRIMAL


Expr = Union[
    CoordAbs,
    CoordLin,
    ScalarTerm,
    Const,
    TailConst,
    NegInfConst,
    AddFinite,
    ScaleNonneg,
    ScaleIndexed,
    MaxFinite,
    PosPart,
    SeriesK,
    SupK,
    LimSupK,
    AtIndex,
    IndicatorRegion,
]

_LEAVES = (CoordAbs, CoordLin, ScalarTerm, Const, TailConst, NegInfConst, IndicatorRegion)


def children(e: Expr) -> Tuple[Expr, ...]:
    if isinstance(e, (AddFinite, MaxFinite)):
        return e.children
    if isinstance(e, (ScaleNonneg, ScaleIndexed, PosPart)):
        return (e.child,)
    if isinstance(e, (SeriesK, SupK, LimSupK, AtIndex)):
        return (e.term,)
    return ()


def walk(e: Expr) -> Iterator[Expr]:
    yield e
    for c in children(e):
        yield from walk(c)


def arity(e: Expr) -> Arity:
    if isinstance(e, (CoordAbs, CoordLin, Const)):
        return Arity.FAMILY
    if isinstance(e, (SeriesK, SupK, LimSupK, AtIndex)) or isinstance(e, _LEAVES):
        return Arity.SCALAR
    if isinstance(e, ScaleIndexed):
        return Arity.FAMILY
    if any(arity(c) is Arity.FAMILY for c in children(e)):
        return Arity.FAMILY
    return Arity.SCALAR


def describe(e: Expr) -> str:
    """Short structural tag used in refusal diagnostics."""
    name = type(e).__name__
    inner = children(e)
    if not inner:
        return name
    return f"{name}({', '.join(describe(c) for c in inner)})"


def retag(e: Expr, space: Space) -> Expr:
    """Structural copy of e with every node tagged for the given space."""
    if isinstance(e, AddFinite):
        return AddFinite(tuple(retag(c, space) for c in e.children), space)
    if isinstance(e, MaxFinite):
        return MaxFinite(tuple(retag(c, space) for c in e.children), space)
    if isinstance(e, ScaleNonneg):
        return ScaleNonneg(e.coeff, retag(e.child, space), space)
    if isinstance(e, ScaleIndexed):
        return ScaleIndexed(e.weights, retag(e.child, space), space)
    if isinstance(e, PosPart):
        return PosPart(retag(e.child, space), space)
    if isinstance(e, SeriesK):
        return SeriesK(e.weights, retag(e.term, space), space)
    if isinstance(e, SupK):
        return SupK(retag(e.term, space), space)
    if isinstance(e, LimSupK):
        return LimSupK(retag(e.term, space), space)
    if isinstance(e, AtIndex):
        return AtIndex(e.k, retag(e.term, space), space)
    if isinstance(e, IndicatorRegion):
        return IndicatorRegion(e.region, space)
    return type(e)(**{**{f: getattr(e, f) for f in e.__dataclass_fields__}, "space": space})


# ---------------------------------------------------------------------------
# convenience constructors (space propagates from the children)
# ---------------------------------------------------------------------------


def _space_of(parts: Sequence[Expr]) -> Space:
    spaces = {p.space for p in parts}
    if len(spaces) > 1:
        raise SpaceMismatchError("mixed-space children in one expression")
    return next(iter(spaces))


def add(*parts: Expr) -> Expr:
    if len(parts) == 1:
        return parts[0]
    return AddFinite(tuple(parts), _space_of(parts))


def smax(*parts: Expr) -> Expr:
    if len(parts) == 1:
        return parts[0]
    return MaxFinite(tuple(parts), _space_of(parts))


def scale(c, e: Expr) -> Expr:
    return ScaleNonneg(Fraction(c), e, e.space)


def pos(e: Expr) -> Expr:
    return PosPart(e, e.space)


def coord_abs(center: Pattern, space: Space = Space.PRIMAL) -> Expr:
    return CoordAbs(center, space)


def coord_lin(coeff: Pattern, space: Space = Space.PRIMAL) -> Expr:
    return CoordLin(coeff, space)


def sterm(name: str, coeff=1, space: Space = Space.PRIMAL) -> Expr:
    return ScalarTerm(name, Fraction(coeff), space)


def const_seq(values: Pattern, space: Space = Space.PRIMAL) -> Expr:
    return Const(values, space)


def rconst(value, space: Space = Space.PRIMAL) -> Expr:
    return TailConst(Fraction(value), space)


def series(weights: Pattern, term: Expr) -> Expr:
    return SeriesK(weights, term, term.space)


def sup(term: Expr) -> Expr:
    return SupK(term, term.space)


def limsup(term: Expr) -> Expr:
    return LimSupK(term, term.space)


def at_index(k: int, term: Expr) -> Expr:
    return AtIndex(k, term, term.space)


def scale_indexed(weights: Pattern, e: Expr) -> Expr:
    return ScaleIndexed(weights, e, e.space)


def indicator(region: Region, space: Space = Space.PRIMAL) -> Expr:
    return IndicatorRegion(region, space)


# ---------------------------------------------------------------------------
# structural certificates
# ---------------------------------------------------------------------------


def is_certified_nonneg(e: Expr) -> bool:
    """Structurally certain that every value of e is >= 0."""
    if isinstance(e, CoordAbs):
        return True
    if isinstance(e, PosPart):
        return True
    if isinstance(e, IndicatorRegion):
        return True
    if isinstance(e, Const):
        return e.values.is_entrywise_nonneg()
    if isinstance(e, TailConst):
        return e.value >= 0
    if isinstance(e, AddFinite):
        return all(is_certified_nonneg(c) for c in e.children)
    if isinstance(e, MaxFinite):
        return any(is_certified_nonneg(c) for c in e.children)
    if isinstance(e, (ScaleNonneg, ScaleIndexed)):
        return is_certified_nonneg(e.child)
    if isinstance(e, (SeriesK, SupK, LimSupK, AtIndex)):
        return is_certified_nonneg(children(e)[0])
    return False


def patterns_of(e: Expr) -> Iterator[Pattern]:
    for node in walk(e):
        if isinstance(node, (CoordAbs,)):
            yield node.center
        elif isinstance(node, CoordLin):
            yield node.coeff
        elif isinstance(node, Const):
            yield node.values
        elif isinstance(node, (SeriesK, ScaleIndexed)):
            yield node.weights


def has_growing_patterns(e: Expr) -> bool:
    for p in patterns_of(e):
        if isinstance(p.tail, GeometricTail) and p.tail.a != 0 and p.tail.rho > 1:
            return True
    return False


def stabilization_index(*exprs: Expr) -> int:
    """Smallest n0 past which every pattern and pinned index has stabilized."""
    n = 1
    for e in exprs:
        for node in walk(e):
            if isinstance(node, AtIndex):
                n = max(n, node.k)
        for p in patterns_of(e):
            n = max(n, p.n0)
    return n


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def evaluate(e: Expr, p: Point, k: Optional[int] = None) -> ExtReal:
    """Exact extended-real value of e at p (index k for family expressions)."""
    if e.space is not p.space:
        raise SpaceMismatchError(
            f"expression on {e.space.value} evaluated at a {p.space.value} point"
        )
    return _eval(e, p, k)


def _need_k(e: Expr, k: Optional[int]) -> int:
    if k is None:
        raise EvalError(f"family-indexed {type(e).__name__} needs an index k")
    if k < 1:
        raise EvalError(f"family index {k} out of range")
    return k


@singledispatch
def _eval(e, p: Point, k: Optional[int]) -> ExtReal:
    raise EvalError(f"cannot evaluate {type(e).__name__}")


@_eval.register
def _(e: CoordAbs, p: Point, k: Optional[int]) -> ExtReal:
    k = _need_k(e, k)
    return ExtReal(abs(p.coord(k) - e.center.value(k)))


@_eval.register
def _(e: CoordLin, p: Point, k: Optional[int]) -> ExtReal:
    k = _need_k(e, k)
    return ExtReal(e.coeff.value(k) * p.coord(k))


@_eval.register
def _(e: ScalarTerm, p: Point, k: Optional[int]) -> ExtReal:
    return ExtReal(e.coeff * p.scalar(e.name))


@_eval.register
def _(e: Const, p: Point, k: Optional[int]) -> ExtReal:
    k = _need_k(e, k)
    return ExtReal(e.values.value(k))


@_eval.register
def _(e: TailConst, p: Point, k: Optional[int]) -> ExtReal:
    return ExtReal(e.value)


@_eval.register
def _(e: NegInfConst, p: Point, k: Optional[int]) -> ExtReal:
    return MINUS_INF


@_eval.register
def _(e: AddFinite, p: Point, k: Optional[int]) -> ExtReal:
    return ext_sum(_eval(c, p, k) for c in e.children)


@_eval.register
def _(e: ScaleNonneg, p: Point, k: Optional[int]) -> ExtReal:
    return _eval(e.child, p, k).scale(e.coeff)


@_eval.register
def _(e: ScaleIndexed, p: Point, k: Optional[int]) -> ExtReal:
    k = _need_k(e, k)
    return _eval(e.child, p, k if arity(e.child) is Arity.FAMILY else None).scale(
        e.weights.value(k)
    )


@_eval.register
def _(e: MaxFinite, p: Point, k: Optional[int]) -> ExtReal:
    return ext_max(_eval(c, p, k) for c in e.children)


@_eval.register
def _(e: PosPart, p: Point, k: Optional[int]) -> ExtReal:
    return _eval(e.child, p, k).pos_part()


@_eval.register
def _(e: AtIndex, p: Point, k: Optional[int]) -> ExtReal:
    return _eval(e.term, p, e.k)


@_eval.register
def _(e: IndicatorRegion, p: Point, k: Optional[int]) -> ExtReal:
    return ZERO if e.region.contains(p) else PLUS_INF


@_eval.register
def _(e: SupK, p: Point, k: Optional[int]) -> ExtReal:
    from . import tails

    return tails.sup_value(e.term, p)


@_eval.register
def _(e: LimSupK, p: Point, k: Optional[int]) -> ExtReal:
    from . import tails

    return tails.limsup_value(e.term, p)


@_eval.register
def _(e: SeriesK, p: Point, k: Optional[int]) -> ExtReal:
    from . import tails

    return tails.series_value(e.weights, e.term, p)


def eval_member(e: Expr, p: Point, k: int) -> ExtReal:
    """Value of a family member at index k (scalar children ignore k)."""
    if e.space is not p.space:
        raise SpaceMismatchError("space mismatch in family member evaluation")
    return _eval(e, p, k if arity(e) is Arity.FAMILY else None)


# ---------------------------------------------------------------------------
# structure report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    convex: bool
    convexity_rule: str
    finite_everywhere: bool
    continuous_everywhere: bool
    proper: bool


def _convexity_rule(e: Expr) -> str:
    if isinstance(e, (CoordAbs,)):
        return "norm atom |x_k - c_k|"
    if isinstance(e, (CoordLin, ScalarTerm, Const, TailConst)):
        return "affine atom"
    if isinstance(e, NegInfConst):
        return "constant"
    if isinstance(e, AddFinite):
        return "finite sum of convex"
    if isinstance(e, (ScaleNonneg, ScaleIndexed)):
        return "nonnegative scaling of convex"
    if isinstance(e, MaxFinite):
        return "finite max of convex"
    if isinstance(e, PosPart):
        return "positive part of convex"
    if isinstance(e, SeriesK):
        return "upper sum with nonnegative weights"
    if isinstance(e, (SupK, LimSupK)):
        return "pointwise supremum / limit of convex"
    if isinstance(e, AtIndex):
        return "family member"
    if isinstance(e, IndicatorRegion):
        return "indicator of a convex region"
    return "convex by construction"


def _finite_everywhere(e: Expr) -> bool:
    if isinstance(e, IndicatorRegion):
        return e.region.is_whole()
    if isinstance(e, NegInfConst):
        return False
    if isinstance(e, SeriesK):
        return (
            e.weights.is_summable()
            and not has_growing_patterns(e.term)
            and _finite_everywhere(e.term)
        )
    if isinstance(e, (SupK, LimSupK)):
        return not has_growing_patterns(e.term) and _finite_everywhere(e.term)
    return all(_finite_everywhere(c) for c in children(e))


def _never_minus_inf(e: Expr) -> bool:
    if isinstance(e, NegInfConst):
        return False
    if isinstance(e, MaxFinite):
        return any(_never_minus_inf(c) for c in e.children)
    if isinstance(e, ScaleNonneg) and e.coeff == 0:
        return True
    if isinstance(e, PosPart):
        return True
    return all(_never_minus_inf(c) for c in children(e))


def validate(e: Expr) -> StructureReport:
    """Structural certificates for the hypotheses used by the calculus.

    Within this atom class a finite-valued convex expression is norm
    continuous, so the continuity flag coincides with finiteness.
    """
    finite = _finite_everywhere(e)
    return StructureReport(
        convex=True,
        convexity_rule=_convexity_rule(e),
        finite_everywhere=finite,
        continuous_everywhere=finite,
        proper=_never_minus_inf(e),
    )
