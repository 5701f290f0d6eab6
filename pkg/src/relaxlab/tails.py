"""Exact analysis of family values along the tail k -> infinity.

Past the stabilization index every pattern follows its tail law, so a family
member evaluated at a fixed point becomes an exponential sum

    v(k) = c + sum_i b_i * r_i**k        (r_i > 0, r_i != 1)

once the signs of absolute values and the branches of maxima settle.  Signs
settle at a computable index because distinct exponential rates dominate each
other geometrically.  Suprema, limsups and upper sums over all k then reduce
to finite scans plus closed forms; everything stays in exact rational
arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

from .errors import ExtRealArithmeticError, SolverError
from .extreal import MINUS_INF, PLUS_INF, ExtReal, ext_max, ext_sum
from .patterns import ConstantTail, GeometricTail, Pattern
from . import expr as ex

_MAX_SCAN = 200_000


def _scan_guard(k: int):
    if k > _MAX_SCAN:
        raise SolverError("tail sign analysis exceeded the scan budget")


@dataclass(frozen=True)
class ExpSum:
    """c + sum of coef * rate**k with positive rates distinct from 1."""

    const: Fraction
    comps: Tuple[Tuple[Fraction, Fraction], ...]  # (rate, coef), rate desc

    @staticmethod
    def of(const, comps: Optional[Dict[Fraction, Fraction]] = None) -> "ExpSum":
        merged: Dict[Fraction, Fraction] = {}
        const = Fraction(const)
        for rate, coef in (comps or {}).items():
            if coef == 0:
                continue
            if rate == 1:
                const += coef
            else:
                merged[rate] = merged.get(rate, Fraction(0)) + coef
        items = tuple(
            sorted(((r, c) for r, c in merged.items() if c != 0), reverse=True)
        )
        return ExpSum(const, items)

    def at(self, k: int) -> Fraction:
        return self.const + sum((c * r**k for r, c in self.comps), Fraction(0))

    def add(self, other: "ExpSum") -> "ExpSum":
        comps = dict(self.comps)
        for r, c in other.comps:
            comps[r] = comps.get(r, Fraction(0)) + c
        return ExpSum.of(self.const + other.const, comps)

    def scale(self, c) -> "ExpSum":
        c = Fraction(c)
        return ExpSum.of(c * self.const, {r: c * b for r, b in self.comps})

    def shift_const(self, c) -> "ExpSum":
        return ExpSum(self.const + Fraction(c), self.comps)

    def times_geometric(self, a, rho) -> "ExpSum":
        """Pointwise product with a * rho**k."""
        a, rho = Fraction(a), Fraction(rho)
        comps = {rho * r: a * c for r, c in self.comps}
        if self.const != 0:
            comps[rho] = comps.get(rho, Fraction(0)) + a * self.const
        return ExpSum.of(0, comps)

    def is_constant(self) -> bool:
        return not self.comps


def _sign(q: Fraction) -> int:
    return (q > 0) - (q < 0)


def sign_stabilize(form: ExpSum, start: int) -> Tuple[int, int]:
    """(k_from, sign) with sign(form(k)) constant for all k >= k_from."""
    if form.is_constant():
        return start, _sign(form.const)
    rates = form.comps
    growing = [rc for rc in rates if rc[0] > 1]
    if growing or form.const == 0:
        # dominant term is the largest-rate component
        r_star, b_star = rates[0]
        k = start
        while abs(b_star) * r_star**k <= abs(form.const) + sum(
            abs(c) * r**k for r, c in rates[1:]
        ):
            k += 1
            _scan_guard(k)
        return k, _sign(b_star)
    # all rates < 1 and a nonzero constant: the constant wins
    k = start
    while sum(abs(c) * r**k for r, c in rates) >= abs(form.const):
        k += 1
        _scan_guard(k)
    return k, _sign(form.const)


def sup_exp_sum(form: ExpSum, start: int) -> ExtReal:
    """Exact supremum of form(k) over k >= start."""
    if form.is_constant():
        return ExtReal(form.const)
    r_star, b_star = form.comps[0]
    if r_star > 1:
        if b_star > 0:
            return PLUS_INF
        # values eventually sink below the first one; scan to certainty
        best = form.at(start)
        k1, s = sign_stabilize(form.shift_const(-best), start)
        if s >= 0:  # pragma: no cover - dominance forces s < 0
            raise SolverError("tail supremum failed to localize")
        for k in range(start, k1):
            v = form.at(k)
            if v > best:
                best = v
        return ExtReal(best)
    # every rate < 1: values converge to the constant
    limit = form.const
    pure = ExpSum(Fraction(0), form.comps)
    k1, s = sign_stabilize(pure, start)
    window = [form.at(k) for k in range(start, k1)]
    if s <= 0:
        return ExtReal(max(window + [limit]))
    # beyond k1 the values stay above the limit and decay toward it
    best = form.at(k1)
    for v in window:
        if v > best:
            best = v
    pos = sum((c for _, c in form.comps if c > 0), Fraction(0))
    k = k1
    while pos * r_star ** (k + 1) > best - limit:
        k += 1
        _scan_guard(k)
        v = form.at(k)
        if v > best:
            best = v
    return ExtReal(best)


def limsup_exp_sum(form: ExpSum) -> ExtReal:
    for rate, coef in form.comps:
        if rate > 1 and coef != 0:
            return PLUS_INF if coef > 0 else MINUS_INF
    return ExtReal(form.const)


# ---------------------------------------------------------------------------
# resolving a family member into its tail description at a fixed point
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TailForm:
    """Member values for k >= start: an ExpSum, or a constant +-inf."""

    start: int
    form: Optional[ExpSum]
    infinite: Optional[ExtReal] = None

    @staticmethod
    def of_form(start: int, form: ExpSum) -> "TailForm":
        return TailForm(start, form, None)

    @staticmethod
    def of_ext(start: int, v: ExtReal) -> "TailForm":
        if v.is_finite():
            return TailForm(start, ExpSum.of(v.as_rat()), None)
        return TailForm(start, None, v)


def _tail_law(p: Pattern):
    """('const', c) or ('geo', a, rho) with rho != 1 for k > p.n0."""
    t = p.tail
    if isinstance(t, ConstantTail):
        return ("const", t.c)
    if t.a == 0 or t.rho == 1:
        return ("const", t.a if t.rho == 1 and t.a != 0 else Fraction(0))
    return ("geo", t.a, t.rho)


def _abs_form(tf: TailForm) -> TailForm:
    if tf.infinite is not None:
        return TailForm.of_ext(tf.start, tf.infinite if tf.infinite > 0 else PLUS_INF)
    k1, s = sign_stabilize(tf.form, tf.start)
    if s == 0:
        return TailForm.of_form(k1, ExpSum.of(0))
    return TailForm.of_form(k1, tf.form if s > 0 else tf.form.scale(-1))


def _max_forms(a: TailForm, b: TailForm) -> TailForm:
    if a.infinite is not None:
        if a.infinite == PLUS_INF:
            return a
        return TailForm(max(a.start, b.start), b.form, b.infinite)
    if b.infinite is not None:
        return _max_forms(b, a)
    start = max(a.start, b.start)
    k1, s = sign_stabilize(a.form.add(b.form.scale(-1)), start)
    return TailForm.of_form(k1, a.form if s >= 0 else b.form)


def resolve(e: "ex.Expr", p: "ex.Point", k0: int) -> TailForm:
    """Tail description of family member e at point p, valid from >= k0."""
    if ex.arity(e) is ex.Arity.SCALAR:
        return TailForm.of_ext(k0, ex._eval(e, p, None))
    t = p.tail_value
    if isinstance(e, ex.CoordAbs):
        law = _tail_law(e.center)
        if law[0] == "const":
            inner = ExpSum.of(t - law[1])
        else:
            inner = ExpSum.of(t, {law[2]: -law[1]})
        return _abs_form(TailForm.of_form(k0, inner))
    if isinstance(e, ex.CoordLin):
        law = _tail_law(e.coeff)
        if law[0] == "const":
            return TailForm.of_form(k0, ExpSum.of(law[1] * t))
        return TailForm.of_form(k0, ExpSum.of(0, {law[2]: law[1] * t}))
    if isinstance(e, ex.Const):
        law = _tail_law(e.values)
        if law[0] == "const":
            return TailForm.of_form(k0, ExpSum.of(law[1]))
        return TailForm.of_form(k0, ExpSum.of(0, {law[2]: law[1]}))
    if isinstance(e, ex.AddFinite):
        parts = [resolve(c, p, k0) for c in e.children]
        start = max(part.start for part in parts)
        infs = [part.infinite for part in parts if part.infinite is not None]
        if infs:
            if any(v == PLUS_INF for v in infs) and any(v == MINUS_INF for v in infs):
                raise ExtRealArithmeticError("(+inf) + (-inf) in a family tail")
            return TailForm.of_ext(start, infs[0])
        total = ExpSum.of(0)
        for part in parts:
            total = total.add(part.form)
        return TailForm.of_form(start, total)
    if isinstance(e, ex.ScaleNonneg):
        inner = resolve(e.child, p, k0)
        if inner.infinite is not None:
            return TailForm.of_ext(inner.start, inner.infinite.scale(e.coeff))
        return TailForm.of_form(inner.start, inner.form.scale(e.coeff))
    if isinstance(e, ex.ScaleIndexed):
        inner = resolve(e.child, p, max(k0, e.weights.n0 + 1))
        law = _tail_law(e.weights)
        if inner.infinite is not None:
            if inner.infinite == PLUS_INF:
                return TailForm.of_ext(inner.start, PLUS_INF)  # 0*(+inf)=+inf
            if law[0] == "const" and law[1] == 0:
                return TailForm.of_form(inner.start, ExpSum.of(0))
            return TailForm.of_ext(inner.start, MINUS_INF)
        if law[0] == "const":
            return TailForm.of_form(inner.start, inner.form.scale(law[1]))
        return TailForm.of_form(
            inner.start, inner.form.times_geometric(law[1], law[2])
        )
    if isinstance(e, ex.MaxFinite):
        parts = [resolve(c, p, k0) for c in e.children]
        out = parts[0]
        for part in parts[1:]:
            out = _max_forms(out, part)
        return out
    if isinstance(e, ex.PosPart):
        inner = resolve(e.child, p, k0)
        return _max_forms(inner, TailForm.of_form(k0, ExpSum.of(0)))
    raise SolverError(f"cannot resolve tail of {type(e).__name__}")


# ---------------------------------------------------------------------------
# entry points used by expression evaluation
# ---------------------------------------------------------------------------


def _first_tail_index(term: "ex.Expr", p: "ex.Point", *patterns: Pattern) -> int:
    n = ex.stabilization_index(term)
    n = max(n, len(p.prefix))
    for q in patterns:
        n = max(n, q.n0)
    return n + 1


def sup_value(term: "ex.Expr", p: "ex.Point") -> ExtReal:
    tf = resolve(term, p, _first_tail_index(term, p))
    window = [ex.eval_member(term, p, k) for k in range(1, tf.start)]
    if tf.infinite is not None:
        tail = tf.infinite
    else:
        tail = sup_exp_sum(tf.form, tf.start)
    return ext_max(window + [tail])


def limsup_value(term: "ex.Expr", p: "ex.Point") -> ExtReal:
    tf = resolve(term, p, _first_tail_index(term, p))
    if tf.infinite is not None:
        return tf.infinite
    return limsup_exp_sum(tf.form)


def series_value(weights: Pattern, term: "ex.Expr", p: "ex.Point") -> ExtReal:
    """Upper sum of weights_k * term_k: limsup of the partial sums, exact."""
    tf = resolve(term, p, _first_tail_index(term, p, weights))
    start = tf.start
    head = ext_sum(
        ex.eval_member(term, p, k).scale(weights.value(k)) for k in range(1, start)
    )
    law = _tail_law(weights)
    if tf.infinite is not None:
        if tf.infinite == PLUS_INF:
            tail = PLUS_INF  # 0*(+inf) = +inf keeps every summand infinite
        elif law[0] == "const" and law[1] == 0:
            tail = ExtReal(0)
        else:
            tail = MINUS_INF
        return head + tail
    if law[0] == "const":
        products = tf.form.scale(law[1])
        linear = products.const  # the per-k constant part of the summand
    else:
        products = tf.form.times_geometric(law[1], law[2])
        linear = products.const
    # classify the partial sums: growing geometric beats linear beats finite
    for rate, coef in products.comps:
        if rate > 1 and coef != 0:
            return head + (PLUS_INF if coef > 0 else MINUS_INF)
    if linear != 0:
        return head + (PLUS_INF if linear > 0 else MINUS_INF)
    total = Fraction(0)
    for rate, coef in products.comps:
        total += coef * rate**start / (1 - rate)
    return head + ExtReal(total)
