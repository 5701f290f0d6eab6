"""Exact collapse of model problems to finite linear programs.

Every pattern stabilizes past n0, so coordinates split into three zones:
explicit prefix variables x_1..x_{n0}, a shared segment value (the tail
variable) covering n0 < k <= N, and, for primal sources, the eventual zeros
beyond N.  Letting N grow yields a finite program whose value equals the
infimum over the model space exactly:

* per-k constraint rows for k <= n0;
* segment rows at the tail variable, with rate**k factors handled by the
  affine-in-sigma endpoint rule (rows at sigma = rho**(n0+1) and at the
  sigma -> 0 limit; growing rates add a recession row);
* for primal sources, at-infinity rows with the coordinate pinned to zero
  (these rows are what the bare biconjugate relaxation forgets, and their
  absence on bidual sources is exactly how the gap appears);
* series tails in the objective become closed-form linear terms.

Pieces outside the supported fragment are refused, never approximated.
Supported exactness requires all summable series weights to share one
geometric ratio (the segment-compression argument needs a common averaging
distribution) and at most one rate per constraint piece.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import ReduceRefusal
from .patterns import ConstantTail, GeometricTail, Pattern
from .pieces import LinForm, MemberEnv, Piece, pieces_of
from .regions import LinRow, Region, TAIL, _pattern_inf, _pattern_sup
from . import expr as ex
from .expr import Arity, Expr, Space, arity, describe

RowTag = Tuple


@dataclass
class Row:
    coeffs: Dict[str, Fraction]
    rhs: Fraction
    tag: RowTag


@dataclass
class FinitProgram:
    """An exact finite program: min objective over the listed rows."""

    variables: List[str]
    objective: Dict[str, Fraction]
    obj_const: Fraction
    rows: List[Row]
    n0: int
    space: Space
    scalars: Tuple[str, ...]


def _collect_series_ratio(exprs: Sequence[Expr]):
    ratios = set()
    for root in exprs:
        for node in ex.walk(root):
            if isinstance(node, ex.SeriesK):
                t = node.weights.tail
                if isinstance(t, GeometricTail) and t.a != 0:
                    ratios.add(t.rho)
    if len(ratios) > 1:
        raise ReduceRefusal(
            "summable series weights must share one geometric ratio; "
            f"found {sorted(ratios)}"
        )


class _Lowerer:
    def __init__(self, n0: int, space: Space, scalars: Sequence[str]):
        self.n0 = n0
        self.space = space
        self.scalars = tuple(scalars)
        self.rows: List[Row] = []
        self._aux = 0
        self.aux_names: List[str] = []

    # -- variable handles ---------------------------------------------

    def coord_of(self, k: int) -> LinForm:
        if k > self.n0:
            raise ReduceRefusal(f"pinned index {k} beyond the collapse index")
        return LinForm.var(f"x{k}")

    def scalar_form(self, name: str) -> LinForm:
        if name not in self.scalars:
            raise ReduceRefusal(f"undeclared scalar variable {name!r}")
        return LinForm.var(name)

    def fresh_aux(self) -> LinForm:
        self._aux += 1
        name = f"__aux{self._aux}"
        self.aux_names.append(name)
        return LinForm.var(name)

    def seg_env(self) -> MemberEnv:
        return MemberEnv.tail(LinForm.var(TAIL), self.scalar_form, self.coord_of)

    def atinf_env(self) -> MemberEnv:
        return MemberEnv.tail(LinForm.of_const(0), self.scalar_form, self.coord_of)

    def scalar_env(self) -> MemberEnv:
        # scalar expressions reach coordinates only through pinned indices
        return MemberEnv.concrete(1, self.coord_of, self.scalar_form)

    # -- rows -----------------------------------------------------------

    def add_le(self, form: LinForm, rhs: LinForm, tag: RowTag):
        """Row: form <= rhs."""
        diff = form.add(rhs.scale(-1))
        if diff.is_const():
            if diff.const > 0:
                self.rows.append(Row({}, Fraction(-1), tag))  # infeasible marker
            return
        self.rows.append(Row(dict(diff.coeffs), -diff.const, tag))

    # -- constraints ----------------------------------------------------

    def impose_piece_tail(self, piece: Piece, rhs: LinForm, seg: bool, tag: RowTag):
        """Impose piece(k) <= rhs for all tail indices.

        ``seg`` selects the segment zone (sigma ranges over the whole tail)
        versus the primal at-infinity zone (only the sigma -> 0 limit and the
        growth recession survive as N -> infinity).
        """
        rates = [r for r in piece.keys() if r is not None]
        alpha = piece.get(None, LinForm.of_const(0))
        if not rates:
            self.add_le(alpha, rhs, tag)
            return
        if len(rates) > 1:
            raise ReduceRefusal(
                "constraint member mixes several geometric rates along the tail"
            )
        rate = rates[0]
        beta = piece[rate]
        sigma0 = rate ** (self.n0 + 1)
        if rate < 1:
            if seg:
                self.add_le(alpha.add(beta.scale(sigma0)), rhs, tag)
                self.add_le(alpha, rhs, tag)
            else:
                self.add_le(alpha, rhs, tag)
        else:
            if seg:
                self.add_le(beta, LinForm.of_const(0), tag)
                self.add_le(alpha.add(beta.scale(sigma0)), rhs, tag)
            else:
                # closed relaxation of the vanishing-at-infinity requirement
                self.add_le(beta, LinForm.of_const(0), tag)

    def impose_family_le(self, fam: Expr, rhs: LinForm, block: int):
        for k in range(1, self.n0 + 1):
            env = MemberEnv.concrete(k, self.coord_of, self.scalar_form)
            for piece in pieces_of(fam, env):
                self.add_le(piece[None], rhs, ("family", block, k))
        for piece in pieces_of(fam, self.seg_env()):
            self.impose_piece_tail(piece, rhs, True, ("family_tail", block))
        if self.space is Space.PRIMAL:
            for piece in pieces_of(fam, self.atinf_env()):
                self.impose_piece_tail(piece, rhs, False, ("family_atinf", block))

    def impose_scalar_le(self, e: Expr, block: int):
        if isinstance(e, ex.NegInfConst):
            return  # -inf <= 0 trivially
        for piece in pieces_of(e, self.scalar_env()):
            self.add_le(piece[None], LinForm.of_const(0), ("scalar", block))

    def impose_region(self, region: Region):
        tail_form = (
            LinForm.of_const(0) if self.space is Space.PRIMAL else LinForm.var(TAIL)
        )
        for row in region.rows:
            form = LinForm.of_const(0)
            for name, c in row.coeffs:
                base = tail_form if name == TAIL else self.scalar_form(name)
                form = form.add(base.scale(c))
            self.add_le(form, LinForm.of_const(row.rhs), ("region",))
        if not region.tail_free and self.space is Space.BIDUAL:
            t = LinForm.var(TAIL)
            self.add_le(t, LinForm.of_const(0), ("region",))
            self.add_le(t.scale(-1), LinForm.of_const(0), ("region",))
        if region.coord_box is not None:
            lo, hi = region.coord_box
            for k in range(1, self.n0 + 1):
                xk = self.coord_of(k)
                self.add_le(LinForm.of_const(lo.value(k)), xk, ("region",))
                self.add_le(xk, LinForm.of_const(hi.value(k)), ("region",))
            lo_sup = _pattern_sup(lo, self.n0)
            hi_inf = _pattern_inf(hi, self.n0)
            targets = [LinForm.var(TAIL)]
            if self.space is Space.PRIMAL:
                targets.append(LinForm.of_const(0))
            for t in targets:
                if lo_sup is None:
                    self.rows.append(Row({}, Fraction(-1), ("region",)))
                else:
                    self.add_le(LinForm.of_const(lo_sup), t, ("region",))
                if hi_inf is None:
                    self.rows.append(Row({}, Fraction(-1), ("region",)))
                else:
                    self.add_le(t, LinForm.of_const(hi_inf), ("region",))

    # -- objective ------------------------------------------------------

    def lower_member_at(self, fam: Expr, k: int) -> LinForm:
        env = MemberEnv.concrete(k, self.coord_of, self.scalar_form)
        pieces = pieces_of(fam, env)
        if len(pieces) == 1:
            return pieces[0][None]
        m = self.fresh_aux()
        for piece in pieces:
            self.add_le(piece[None], m, ("epi",))
        return m

    def lower_min(self, e: Expr) -> LinForm:
        """Affine handle h with h >= e enforced; exact under minimization."""
        if arity(e) is not Arity.SCALAR:
            raise ReduceRefusal(f"objective must be scalar, got {describe(e)}")
        if isinstance(e, ex.ScalarTerm):
            return self.scalar_form(e.name).scale(e.coeff)
        if isinstance(e, ex.TailConst):
            return LinForm.of_const(e.value)
        if isinstance(e, ex.AddFinite):
            out = LinForm.of_const(0)
            for c in e.children:
                out = out.add(self.lower_min(c))
            return out
        if isinstance(e, ex.ScaleNonneg):
            if e.coeff == 0:
                # 0 * f = indicator of dom f: add the domain rows, value 0
                from .conjugacy import dom_region

                self.impose_region(dom_region(e.child))
                return LinForm.of_const(0)
            return self.lower_min(e.child).scale(e.coeff)
        if isinstance(e, (ex.MaxFinite, ex.PosPart)):
            kids = list(e.children) if isinstance(e, ex.MaxFinite) else [e.child]
            m = self.fresh_aux()
            for c in kids:
                self.add_le(self.lower_min(c), m, ("epi",))
            if isinstance(e, ex.PosPart):
                self.add_le(LinForm.of_const(0), m, ("epi",))
            return m
        if isinstance(e, ex.SupK):
            m = self.fresh_aux()
            self.impose_family_le(e.term, m, -1)
            return m
        if isinstance(e, ex.SeriesK):
            return self.lower_series(e.weights, e.term)
        if isinstance(e, ex.IndicatorRegion):
            self.impose_region(e.region)
            return LinForm.of_const(0)
        if isinstance(e, ex.AtIndex):
            return self.lower_member_at(e.term, e.k)
        if isinstance(e, ex.NegInfConst):
            raise ReduceRefusal("objective is identically -inf")
        if isinstance(e, ex.LimSupK):
            from .conjugacy import f_infinity

            return self.lower_min(f_infinity(e.term))
        raise ReduceRefusal(f"cannot lower {describe(e)} in the objective")

    def lower_series(self, weights: Pattern, term: Expr) -> LinForm:
        out = LinForm.of_const(0)
        for k in range(1, self.n0 + 1):
            wk = weights.value(k)
            if wk != 0:
                out = out.add(self.lower_member_at(term, k).scale(wk))
        t = weights.tail
        if isinstance(t, ConstantTail):
            cw = t.c
            if cw == 0:
                return out
            # non-summable weights: the eventual member must vanish
            envs = [(self.seg_env(), True)]
            if self.space is Space.PRIMAL:
                envs.append((self.atinf_env(), False))
            for env, _seg in envs:
                for piece in pieces_of(term, env):
                    if any(r is not None for r in piece):
                        raise ReduceRefusal(
                            "non-summable series over a rate-varying member"
                        )
                    self.add_le(piece[None], LinForm.of_const(0), ("series_dom",))
            return out
        if t.rho >= 1 and t.a != 0:
            raise ReduceRefusal("series weights diverge along the tail")
        return out.add(self._series_tail(weights, term))

    def _series_tail(self, weights: Pattern, term: Expr) -> LinForm:
        aw, rho = weights.tail.a, weights.tail.rho
        if aw == 0:
            return LinForm.of_const(0)
        return self._series_tail_of(term, aw, rho)

    def _series_tail_of(self, term: Expr, aw: Fraction, rho: Fraction) -> LinForm:
        """Closed form of sum over k > n0 of (aw rho**k) * term_k."""
        seg = self.seg_env()
        pieces = pieces_of(term, seg)
        if all(set(p.keys()) <= {None} for p in pieces):
            # rate-free member: one handle, scaled by the weight tail sum
            if len(pieces) == 1:
                handle = pieces[0][None]
            else:
                handle = self.fresh_aux()
                for piece in pieces:
                    self.add_le(piece[None], handle, ("epi",))
            total = aw * rho ** (self.n0 + 1) / (1 - rho)
            return handle.scale(total)
        if len(pieces) == 1:
            piece = pieces[0]
            out = LinForm.of_const(0)
            for rate, form in piece.items():
                eff = rho if rate is None else rho * rate
                if eff >= 1:
                    raise ReduceRefusal("series tail diverges for this member")
                out = out.add(form.scale(aw * eff ** (self.n0 + 1) / (1 - eff)))
            return out
        if isinstance(term, ex.AddFinite):
            out = LinForm.of_const(0)
            for c in term.children:
                out = out.add(self._series_tail_of(c, aw, rho))
            return out
        if isinstance(term, ex.ScaleNonneg):
            return self._series_tail_of(term.child, aw * term.coeff, rho)
        if isinstance(term, ex.ScaleIndexed):
            law = MemberEnv.tail(LinForm.of_const(0), self.scalar_form).pattern_law(
                term.weights
            )
            if law[0] == "const":
                return self._series_tail_of(term.child, aw * law[1], rho)
            return self._series_tail_of(term.child, aw * law[1], rho * law[2])
        raise ReduceRefusal(
            f"series member mixes rates under max/abs: {describe(term)}"
        )


def reduce_source(
    objective: Optional[Expr],
    constraints: Sequence[Expr],
    scalars: Sequence[str],
    space: Space,
    region: Optional[Region] = None,
    sup_epigraph: Optional[Sequence[Expr]] = None,
    pin_tail: bool = False,
) -> FinitProgram:
    """Lower a problem (objective, constraint blocks, region) to an LP.

    With ``sup_epigraph`` set, the program minimizes an epigraph variable
    bounded below by all listed blocks (used for Slater margins) and any
    ``objective`` is added on top of it; ``pin_tail`` forces the segment
    variable to zero so the argmin is a genuine finitely supported point.
    """
    all_exprs = list(constraints)
    if objective is not None:
        all_exprs.append(objective)
    if sup_epigraph is not None:
        all_exprs.extend(sup_epigraph)
    n0 = ex.stabilization_index(*all_exprs) if all_exprs else 1
    if region is not None and region.coord_box is not None:
        n0 = max(n0, region.coord_box[0].n0, region.coord_box[1].n0)
    _collect_series_ratio(all_exprs)
    low = _Lowerer(n0, space, scalars)
    obj_form = LinForm.of_const(0)
    if sup_epigraph is not None:
        m = low.fresh_aux()
        for block in sup_epigraph:
            if arity(block) is Arity.FAMILY:
                low.impose_family_le(block, m, -1)
            else:
                for piece in pieces_of(block, low.scalar_env()):
                    low.add_le(piece[None], m, ("family", -1, 0))
        obj_form = m
    if objective is not None:
        obj_form = obj_form.add(low.lower_min(objective))
    for i, block in enumerate(constraints):
        if arity(block) is Arity.FAMILY:
            low.impose_family_le(block, LinForm.of_const(0), i)
        else:
            low.impose_scalar_le(block, i)
    if region is not None:
        low.impose_region(region)
    if pin_tail:
        low.add_le(LinForm.var(TAIL), LinForm.of_const(0), ("pin",))
        low.add_le(LinForm.var(TAIL).scale(-1), LinForm.of_const(0), ("pin",))
    variables = (
        [f"x{k}" for k in range(1, n0 + 1)] + [TAIL] + list(scalars) + low.aux_names
    )
    return FinitProgram(
        variables=variables,
        objective=dict(obj_form.coeffs),
        obj_const=obj_form.const,
        rows=low.rows,
        n0=n0,
        space=space,
        scalars=tuple(scalars),
    )
