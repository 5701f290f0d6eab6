"""Piecewise-affine decomposition of expression members.

A convex piecewise-linear member is the maximum of finitely many pieces.
Each piece is affine in the decision variables (coordinates, the tail
variable, scalars) with coefficients that may carry one multiplicative
rate**k factor per additive part:

    piece(k) = alpha(vars) + sum_rate rate**k * beta_rate(vars)

Concrete indices k <= n0 substitute pattern values and produce plain affine
pieces; the tail regime keeps the rates symbolic so per-k constraints over
the infinite tail collapse to finitely many rows (the affine-in-sigma
endpoint argument).  Structures outside this fragment are refused, never
approximated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .errors import ReduceRefusal
from .patterns import ConstantTail, Pattern
from . import expr as ex


@dataclass
class LinForm:
    """sum(coeffs[var] * var) + const over abstract variable names."""

    coeffs: Dict[str, Fraction] = field(default_factory=dict)
    const: Fraction = Fraction(0)

    @staticmethod
    def of_const(c) -> "LinForm":
        return LinForm({}, Fraction(c))

    @staticmethod
    def var(name: str, coeff=1) -> "LinForm":
        return LinForm({name: Fraction(coeff)}, Fraction(0))

    def add(self, other: "LinForm") -> "LinForm":
        coeffs = dict(self.coeffs)
        for k, v in other.coeffs.items():
            coeffs[k] = coeffs.get(k, Fraction(0)) + v
        return LinForm({k: v for k, v in coeffs.items() if v != 0},
                       self.const + other.const)

    def scale(self, c) -> "LinForm":
        c = Fraction(c)
        if c == 0:
            return LinForm.of_const(0)
        return LinForm({k: c * v for k, v in self.coeffs.items()}, c * self.const)

    def is_zero(self) -> bool:
        return not self.coeffs and self.const == 0

    def is_const(self) -> bool:
        return not self.coeffs


# a piece maps None -> rate-free affine part, rate -> affine coefficient of
# rate**k; rates are positive Fractions different from 1
Piece = Dict[Optional[Fraction], LinForm]


def piece_of(form: LinForm) -> Piece:
    return {None: form}


def piece_add(a: Piece, b: Piece) -> Piece:
    out = dict(a)
    for key, form in b.items():
        out[key] = out[key].add(form) if key in out else form
    return out


def piece_scale(a: Piece, c) -> Piece:
    return {key: form.scale(c) for key, form in a.items()}


def piece_rate_shift(a: Piece, coef, rho: Fraction) -> Piece:
    """Multiply a piece by coef * rho**k."""
    out: Piece = {}
    for key, form in a.items():
        rate = rho if key is None else rho * key
        new_key = None if rate == 1 else rate
        scaled = form.scale(coef)
        out[new_key] = out[new_key].add(scaled) if new_key in out else scaled
    return out


def cross_sum(parts: List[List[Piece]]) -> List[Piece]:
    out: List[Piece] = [{None: LinForm.of_const(0)}]
    for options in parts:
        if len(out) * len(options) > 256:
            raise ReduceRefusal("piecewise decomposition grew beyond the budget")
        out = [piece_add(p, q) for p in out for q in options]
    return out


class MemberEnv:
    """How coordinates, patterns, and scalars read inside one member."""

    def __init__(
        self,
        coord: LinForm,
        scalar: Callable[[str], LinForm],
        pattern_law: Callable[[Pattern], Tuple],
        coord_of: Optional[Callable[[int], LinForm]] = None,
    ):
        self.coord = coord
        self.scalar = scalar
        self.pattern_law = pattern_law
        self.coord_of = coord_of

    @staticmethod
    def concrete(k: int, coord_of: Callable[[int], LinForm],
                 scalar: Callable[[str], LinForm]) -> "MemberEnv":
        return MemberEnv(
            coord_of(k),
            scalar,
            lambda p: ("const", p.value(k)),
            coord_of,
        )

    @staticmethod
    def tail(
        coord_form: LinForm,
        scalar: Callable[[str], LinForm],
        coord_of: Optional[Callable[[int], LinForm]] = None,
    ) -> "MemberEnv":
        def law(p: Pattern):
            t = p.tail
            if isinstance(t, ConstantTail):
                return ("const", t.c)
            if t.a == 0 or t.rho == 1:
                return ("const", t.a if t.rho == 1 else Fraction(0))
            return ("geo", t.a, t.rho)

        return MemberEnv(coord_form, scalar, law, coord_of)


def pieces_of(e: "ex.Expr", env: MemberEnv) -> List[Piece]:
    """Pieces whose maximum equals member e under env; refuses otherwise."""
    if isinstance(e, ex.CoordAbs):
        law = env.pattern_law(e.center)
        if law[0] == "const":
            inner = piece_of(env.coord.add(LinForm.of_const(-law[1])))
        else:
            inner = {None: env.coord, law[2]: LinForm.of_const(-law[1])}
        return [inner, piece_scale(inner, -1)]
    if isinstance(e, ex.CoordLin):
        law = env.pattern_law(e.coeff)
        if law[0] == "const":
            return [piece_of(env.coord.scale(law[1]))]
        return [piece_rate_shift(piece_of(env.coord), law[1], law[2])]
    if isinstance(e, ex.Const):
        law = env.pattern_law(e.values)
        if law[0] == "const":
            return [piece_of(LinForm.of_const(law[1]))]
        return [{law[2]: LinForm.of_const(law[1])}]
    if isinstance(e, ex.ScalarTerm):
        return [piece_of(env.scalar(e.name).scale(e.coeff))]
    if isinstance(e, ex.TailConst):
        return [piece_of(LinForm.of_const(e.value))]
    if isinstance(e, ex.AddFinite):
        return cross_sum([pieces_of(c, env) for c in e.children])
    if isinstance(e, ex.ScaleNonneg):
        return [piece_scale(p, e.coeff) for p in pieces_of(e.child, env)]
    if isinstance(e, ex.ScaleIndexed):
        law = env.pattern_law(e.weights)
        inner = pieces_of(e.child, env)
        if law[0] == "const":
            return [piece_scale(p, law[1]) for p in inner]
        return [piece_rate_shift(p, law[1], law[2]) for p in inner]
    if isinstance(e, ex.MaxFinite):
        out: List[Piece] = []
        for c in e.children:
            out.extend(pieces_of(c, env))
        return out
    if isinstance(e, ex.PosPart):
        return pieces_of(e.child, env) + [piece_of(LinForm.of_const(0))]
    if isinstance(e, ex.AtIndex):
        if env.coord_of is None:
            raise ReduceRefusal(
                f"pinned index needs a coordinate table: {ex.describe(e)}", subtree=e
            )
        return pieces_of(e.term, MemberEnv.concrete(e.k, env.coord_of, env.scalar))
    raise ReduceRefusal(
        f"not piecewise-affine in this fragment: {ex.describe(e)}", subtree=e
    )
