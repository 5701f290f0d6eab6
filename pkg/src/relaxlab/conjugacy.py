"""Conjugacy calculus as certified expression-to-expression rewrites.

Biconjugation here is structural, not numeric: within this atom class a
finite-valued convex expression is norm continuous, and its weak**-lsc
closure is the same formula read on bidual points (tail freed).  Sums,
maxima, nonnegative scalings and summable upper sums biconjugate termwise
under that continuity certificate; pointwise suprema instead go through the
dedicated supremum formula

    (sup_k f_k)** = max{ sup_k f_k**, (limsup_k f_k)** } + I_cl(dom sup f_k)

and indicators close their regions.  Inputs whose certificates cannot be
established structurally are refused with the failing subtree named.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .errors import ConjugacyRefusal
from .patterns import GeometricTail, Pattern
from .pieces import LinForm, MemberEnv, pieces_of
from .regions import LinRow, Region, TAIL
from . import expr as ex
from .expr import (
    Arity,
    Expr,
    Space,
    StructureReport,
    arity,
    describe,
    is_certified_nonneg,
    retag,
    validate,
)

RULE_MOREAU = "MoreauExtend"
RULE_SUM = "SumRule"
RULE_MAX = "MaxRule"
RULE_UPPER_SUM = "UpperSumRule"
RULE_SUP = "SupFormula"
RULE_INDICATOR = "IndicatorClosure"


@dataclass(frozen=True)
class BiconjugateResult:
    expr: Expr
    rules_applied: Tuple[str, ...]
    precondition_witness: StructureReport


# ---------------------------------------------------------------------------
# the tail function f_infinity
# ---------------------------------------------------------------------------


def f_infinity(fam: Union[Expr, Sequence[Expr]]) -> Expr:
    """limsup_k of the family, computed atom-wise on the primal space.

    An explicitly finite family follows the convention f_infinity == -inf.
    """
    if not isinstance(fam, (list, tuple)):
        if arity(fam) is not Arity.FAMILY:
            raise ConjugacyRefusal(
                f"f_infinity needs a family, got {describe(fam)}", subtree=fam
            )
        return _limsup_rewrite(fam)
    space = fam[0].space if fam else Space.PRIMAL
    return ex.NegInfConst(space)


def _limsup_rewrite(e: Expr) -> Expr:
    if arity(e) is Arity.SCALAR:
        return e
    if isinstance(e, ex.CoordAbs):
        limit = e.center.eventual_value()
        if limit is None:
            raise ConjugacyRefusal(
                f"family center does not stabilize: {describe(e)}", subtree=e
            )
        return ex.TailConst(abs(limit), e.space)
    if isinstance(e, ex.CoordLin):
        # finitely supported coordinates vanish along the tail
        return ex.TailConst(Fraction(0), e.space)
    if isinstance(e, ex.Const):
        limit = e.values.eventual_value()
        if limit is None:
            raise ConjugacyRefusal(
                f"family constants do not stabilize: {describe(e)}", subtree=e
            )
        return ex.TailConst(limit, e.space)
    if isinstance(e, ex.AddFinite):
        return ex.AddFinite(tuple(_limsup_rewrite(c) for c in e.children), e.space)
    if isinstance(e, ex.MaxFinite):
        return ex.MaxFinite(tuple(_limsup_rewrite(c) for c in e.children), e.space)
    if isinstance(e, ex.ScaleNonneg):
        return ex.ScaleNonneg(e.coeff, _limsup_rewrite(e.child), e.space)
    if isinstance(e, ex.PosPart):
        return ex.PosPart(_limsup_rewrite(e.child), e.space)
    if isinstance(e, ex.ScaleIndexed):
        child_inf = _limsup_rewrite(e.child) if arity(e.child) is Arity.FAMILY else e.child
        t = e.weights.tail
        if isinstance(t, GeometricTail) and t.a != 0 and t.rho > 1:
            raise ConjugacyRefusal(
                f"growing weights have no finite limsup: {describe(e)}", subtree=e
            )
        limit = e.weights.eventual_value()
        if limit is None or limit == 0:
            if not validate(child_inf).finite_everywhere:
                raise ConjugacyRefusal(
                    f"vanishing weights on a non-finite member: {describe(e)}",
                    subtree=e,
                )
            return ex.TailConst(Fraction(0), e.space)
        return ex.ScaleNonneg(limit, child_inf, e.space)
    raise ConjugacyRefusal(f"cannot take limsup of {describe(e)}", subtree=e)


# ---------------------------------------------------------------------------
# upper sums and positive parts
# ---------------------------------------------------------------------------


def upper_sum(fam: Expr, weights: Pattern) -> Expr:
    """Sum over k of weights_k * fam_k with divergence reading as +inf."""
    if arity(fam) is not Arity.FAMILY:
        raise ConjugacyRefusal(
            f"upper_sum needs a family, got {describe(fam)}", subtree=fam
        )
    if not weights.is_entrywise_nonneg():
        raise ConjugacyRefusal(
            "negative weights make the upper sum ill-posed in the certified fragment"
        )
    if not weights.is_summable() and not is_certified_nonneg(fam):
        raise ConjugacyRefusal(
            "non-summable weights need a certified nonnegative family", subtree=fam
        )
    return ex.SeriesK(weights, fam, fam.space)


def positive_part(e: Expr) -> Expr:
    """max(e, 0); biconjugation commutes with this wrapper by the max rule."""
    return ex.PosPart(e, e.space)


# ---------------------------------------------------------------------------
# domain computation and closure
# ---------------------------------------------------------------------------


def _scalar_form(name: str) -> LinForm:
    return LinForm.var(name)


def _rows_from_form(form: LinForm, rows: List[LinRow]):
    # form <= 0 as a region row; constants become feasible/infeasible markers
    if form.is_const():
        if form.const > 0:
            rows.append(LinRow.of({}, -form.const))
        return
    rows.append(LinRow.of(form.coeffs, -form.const))


def _tail_env(space: Space) -> MemberEnv:
    coord = LinForm.var(TAIL) if space is Space.BIDUAL else LinForm.of_const(0)
    return MemberEnv.tail(coord, _scalar_form)


def _dom_rows(e: Expr, rows: List[LinRow]):
    """Rows cutting out {e < +inf}; refuses when not representable."""
    if isinstance(e, ex.IndicatorRegion):
        raise ConjugacyRefusal("indicator below the top level", subtree=e)
    if isinstance(e, (ex.SupK, ex.LimSupK)):
        term = e.term if isinstance(e, ex.SupK) else e.term
        env = _tail_env(e.space)
        for piece in pieces_of(term, env):
            for rate, beta in piece.items():
                if rate is not None and rate > 1:
                    _rows_from_form(beta, rows)
        return
    if isinstance(e, ex.SeriesK):
        env = _tail_env(e.space)
        law = env.pattern_law(e.weights)
        if law[0] == "const" and law[1] == 0:
            return
        for piece in pieces_of(e.term, env):
            for rate, form in piece.items():
                if law[0] == "const":
                    # non-summable weights: the eventual member must vanish
                    if rate is None or rate > 1:
                        _rows_from_form(form, rows)
                else:
                    eff = law[2] if rate is None else law[2] * rate
                    if eff >= 1:
                        _rows_from_form(form, rows)
        return
    for c in ex.children(e):
        _dom_rows(c, rows)


def dom_region(e: Expr, close: bool = False) -> Region:
    """The effective domain of e as a Region over (scalars, tail).

    On the primal space the region describes the c0-like slice
    (tail pinned to zero); ``close=True`` returns its weak** closure,
    which keeps the scalar inequalities and frees the tail.
    """
    rows: List[LinRow] = []
    base = Region.whole()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, ex.IndicatorRegion):
            base = base.intersect(node.region)
            continue
        if isinstance(node, (ex.AddFinite, ex.MaxFinite)):
            stack.extend(node.children)
            continue
        if isinstance(node, (ex.ScaleNonneg, ex.PosPart)):
            stack.append(node.child)
            continue
        _dom_rows(node, rows)
    region = base.intersect(
        Region.of(rows, tail_free=e.space is Space.BIDUAL)
    )
    return region.closure() if close else region


def dom_closure(e: Expr) -> Region:
    """weak**-closure of dom e: same scalar inequalities, tail freed."""
    if arity(e) is not Arity.SCALAR:
        raise ConjugacyRefusal(
            f"dom_closure needs a scalar expression, got {describe(e)}", subtree=e
        )
    return dom_region(e, close=True)


# ---------------------------------------------------------------------------
# biconjugation
# ---------------------------------------------------------------------------


def _certify(e: Expr, top: bool = True):
    if isinstance(e, ex.IndicatorRegion):
        if not top:
            raise ConjugacyRefusal(
                f"indicator below the top level: {describe(e)}", subtree=e
            )
        return
    if isinstance(e, ex.NegInfConst):
        raise ConjugacyRefusal("improper (-inf) expression", subtree=e)
    if isinstance(e, ex.SeriesK):
        if not e.weights.is_summable():
            raise ConjugacyRefusal(
                f"non-summable upper sum is not finite-valued: {describe(e)}",
                subtree=e,
            )
        if ex.has_growing_patterns(e.term):
            raise ConjugacyRefusal(
                f"upper sum over a growing family: {describe(e)}", subtree=e
            )
    if isinstance(e, (ex.SupK, ex.LimSupK)) and ex.has_growing_patterns(e.term):
        raise ConjugacyRefusal(
            f"supremum unbounded along the tail: {describe(e)}", subtree=e
        )
    keep_top = top and isinstance(e, ex.AddFinite)
    for c in ex.children(e):
        _certify(c, keep_top)


def _rewrite(e: Expr, rules: dict) -> Expr:
    if isinstance(e, ex.AddFinite):
        if len(e.children) > 1:
            rules[RULE_SUM] = True
        return ex.AddFinite(
            tuple(_rewrite(c, rules) for c in e.children), Space.BIDUAL
        )
    if isinstance(e, ex.MaxFinite):
        if len(e.children) > 1:
            rules[RULE_MAX] = True
        return ex.MaxFinite(
            tuple(_rewrite(c, rules) for c in e.children), Space.BIDUAL
        )
    if isinstance(e, ex.PosPart):
        rules[RULE_MAX] = True
        return ex.PosPart(_rewrite(e.child, rules), Space.BIDUAL)
    if isinstance(e, ex.ScaleNonneg):
        return ex.ScaleNonneg(e.coeff, _rewrite(e.child, rules), Space.BIDUAL)
    if isinstance(e, ex.ScaleIndexed):
        return ex.ScaleIndexed(e.weights, _rewrite(e.child, rules), Space.BIDUAL)
    if isinstance(e, ex.AtIndex):
        return ex.AtIndex(e.k, _rewrite(e.term, rules), Space.BIDUAL)
    if isinstance(e, ex.SeriesK):
        rules[RULE_UPPER_SUM] = True
        return ex.SeriesK(e.weights, _rewrite(e.term, rules), Space.BIDUAL)
    if isinstance(e, ex.SupK):
        rules[RULE_SUP] = True
        return _sup_formula(e.term, rules)
    if isinstance(e, ex.LimSupK):
        return _rewrite(f_infinity(e.term), rules)
    if isinstance(e, ex.IndicatorRegion):
        rules[RULE_INDICATOR] = True
        return ex.IndicatorRegion(e.region.closure(), Space.BIDUAL)
    rules[RULE_MOREAU] = True
    return retag(e, Space.BIDUAL)


def _sup_formula(fam: Expr, rules: dict) -> Expr:
    members = ex.SupK(_rewrite(fam, rules), Space.BIDUAL)
    tail = f_infinity(fam)
    parts: List[Expr] = [members]
    if not isinstance(tail, ex.NegInfConst):
        parts.append(_rewrite(tail, rules))
    out = ex.MaxFinite(tuple(parts), Space.BIDUAL) if len(parts) > 1 else parts[0]
    region = dom_closure(ex.SupK(fam, fam.space))
    if not region.is_whole():
        rules[RULE_INDICATOR] = True
        out = ex.AddFinite(
            (out, ex.IndicatorRegion(region, Space.BIDUAL)), Space.BIDUAL
        )
    return out


def biconjugate(e: Expr) -> BiconjugateResult:
    """The weak**-lsc convex closure of e, read on bidual points.

    Works for scalar expressions and, member-wise, for family expressions
    (used when relaxing constraint families).
    """
    if e.space is not Space.PRIMAL:
        raise ConjugacyRefusal("biconjugate expects a primal-space expression")
    _certify(e)
    rules: dict = {}
    out = _rewrite(e, rules)
    if not rules:
        rules[RULE_MOREAU] = True
    return BiconjugateResult(out, tuple(rules), validate(e))


def biconjugate_sup(fam: Union[Expr, Sequence[Expr]]) -> BiconjugateResult:
    """Biconjugate of sup_k over a family via the supremum formula."""
    if isinstance(fam, (list, tuple)):
        if not fam:
            raise ConjugacyRefusal("empty family has no supremum")
        if len(fam) == 1:
            inner = biconjugate(fam[0])
            rules = dict.fromkeys(inner.rules_applied, True)
            rules[RULE_SUP] = True
            return BiconjugateResult(
                inner.expr, tuple(rules), inner.precondition_witness
            )
        sup_expr = ex.MaxFinite(tuple(fam), fam[0].space)
    else:
        sup_expr = ex.SupK(fam, fam.space)
    witness = validate(sup_expr)
    if not witness.continuous_everywhere:
        raise ConjugacyRefusal(
            f"supremum not certified continuous: {describe(sup_expr)}",
            subtree=sup_expr,
        )
    _certify(sup_expr)
    rules: dict = {RULE_SUP: True}
    if isinstance(sup_expr, ex.SupK):
        out = _sup_formula(sup_expr.term, rules)
    else:
        rules[RULE_MAX] = True
        out = ex.MaxFinite(
            tuple(_rewrite(c, rules) for c in sup_expr.children), Space.BIDUAL
        )
    return BiconjugateResult(out, tuple(rules), witness)
