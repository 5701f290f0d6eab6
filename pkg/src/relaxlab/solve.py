"""Exact optimal values, Slater certificates, scalar-value certification,
and Lagrange multiplier recovery.

All programs collapse through :mod:`relaxlab.reduce` and solve with the
exact rational simplex; infeasibility reads +inf and unboundedness -inf.
Witness points for primal sources are Goldstein limits: when the optimal
segment value is nonzero the reported argmin is the bidual point the
minimizing sequence converges to.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .conjugacy import dom_region
from .errors import (
    ConjugacyRefusal,
    MultiplierValidationError,
    ReduceRefusal,
    SolverError,
)
from .extreal import MINUS_INF, PLUS_INF, ExtReal
from .patterns import Pattern
from .reduce import FinitProgram, reduce_source
from .regions import TAIL
from .relax import Problem, Relaxation
from .simplex import LPStatus, solve_lp
from . import expr as ex
from .expr import Arity, Expr, Point, Space, arity, evaluate

ZERO = ExtReal(0)


@dataclass(frozen=True)
class SlaterCertificate:
    point: Point
    margin: Fraction
    reinforced: bool
    weights: Optional[Pattern] = None


@dataclass(frozen=True)
class MultiplierRecord:
    lam: Pattern
    lam_hat: Pattern
    lam_inf: Fraction
    penalized_value: ExtReal


@dataclass
class SolveResult:
    value: ExtReal
    argmin: Optional[Point]
    duals: Optional[List[Tuple[Tuple, Fraction]]]


def solve_fp(fp: FinitProgram) -> SolveResult:
    index = {name: i for i, name in enumerate(fp.variables)}
    costs = [Fraction(0)] * len(fp.variables)
    for name, c in fp.objective.items():
        costs[index[name]] = c
    rows = []
    for row in fp.rows:
        a = [Fraction(0)] * len(fp.variables)
        for name, c in row.coeffs.items():
            a[index[name]] = c
        rows.append((a, row.rhs))
    res = solve_lp(costs, rows)
    if res.status is LPStatus.INFEASIBLE:
        return SolveResult(PLUS_INF, None, None)

    def to_point(x: List[Fraction]) -> Point:
        prefix = [x[index[f"x{k}"]] for k in range(1, fp.n0 + 1)]
        tail = x[index[TAIL]]
        scalars = {s: x[index[s]] for s in fp.scalars}
        if fp.space is Space.PRIMAL and tail == 0:
            return Point.primal(prefix, scalars)
        return Point.bidual(prefix, tail, scalars)

    if res.status is LPStatus.UNBOUNDED:
        return SolveResult(MINUS_INF, to_point(res.x) if res.x else None, None)
    duals = [(row.tag, mu) for row, mu in zip(fp.rows, res.duals)]
    return SolveResult(ExtReal(res.value + fp.obj_const), to_point(res.x), duals)


def solve_problem(p: Problem) -> SolveResult:
    fp = reduce_source(p.objective, p.constraints, p.scalars, Space.PRIMAL)
    return solve_fp(fp)


def solve_relaxation(r: Relaxation) -> SolveResult:
    fp = reduce_source(
        r.objective, r.constraints, r.scalars, Space.BIDUAL, region=r.region
    )
    return solve_fp(fp)


# ---------------------------------------------------------------------------
# Slater certificates
# ---------------------------------------------------------------------------


def _zero_point(p: Problem) -> Point:
    return Point.primal([], {s: Fraction(0) for s in p.scalars})


def check_slater(
    p: Problem,
    reinforced: bool = False,
    weights: Optional[Pattern] = None,
) -> Optional[SlaterCertificate]:
    """Search for a strictly feasible point; None when the infimum is >= 0.

    The certificate point is canonical: among the points meeting the target
    margin it minimizes sum|x_k| + sum|scalars|, which reproduces textbook
    Slater points like (0, 2) for the running gap example.
    """
    if reinforced:
        if weights is None or not weights.is_summable() or not weights.is_entrywise_positive():
            raise ReduceRefusal(
                "reinforced Slater needs summable, entrywise positive weights"
            )
        if len(p.family_blocks) != 1 or p.scalar_blocks:
            raise ReduceRefusal(
                "reinforced Slater check supports exactly one constraint family"
            )
        blocks: List[Expr] = [
            ex.ScaleIndexed(weights, p.family_blocks[0], Space.PRIMAL)
        ]
        sup_e: Optional[Expr] = ex.SupK(blocks[0], Space.PRIMAL)
    else:
        if not p.constraints:
            return None  # nothing to be strictly feasible for
        blocks = list(p.constraints)
        sup_e = p.sup_expr()
    dom_f0 = dom_region(p.objective)
    gate = solve_fp(
        reduce_source(None, [], p.scalars, Space.PRIMAL, region=dom_f0,
                      sup_epigraph=blocks)
    )
    if not gate.value < ZERO:
        return None
    zero = _zero_point(p)
    v0 = evaluate(sup_e, zero)
    if v0 < ZERO and evaluate(p.objective, zero).is_finite():
        return SlaterCertificate(zero, (-v0).as_rat(), reinforced, weights)
    m_star = gate.value
    if v0.is_finite() and v0 > ZERO:
        target = v0.as_rat()
        if m_star.is_finite():
            target = min(target, -m_star.as_rat())
    elif m_star.is_finite():
        target = -m_star.as_rat() / 2
    else:
        target = Fraction(1)
    n0 = ex.stabilization_index(p.objective, *blocks)
    parts: List[Expr] = [
        ex.AtIndex(k, ex.CoordAbs(Pattern.constant(0)), Space.PRIMAL)
        for k in range(1, n0 + 1)
    ]
    for s in p.scalars:
        parts.append(
            ex.MaxFinite((ex.sterm(s), ex.sterm(s, -1)), Space.PRIMAL)
        )
    canon_obj = parts[0] if len(parts) == 1 else ex.AddFinite(tuple(parts), Space.PRIMAL)
    shifted = [
        ex.AddFinite((b, ex.TailConst(target, Space.PRIMAL)), Space.PRIMAL)
        for b in blocks
    ]
    res = solve_fp(
        reduce_source(
            canon_obj, shifted, p.scalars, Space.PRIMAL, region=dom_f0, pin_tail=True
        )
    )
    if res.argmin is None:
        raise SolverError("slater margin program unexpectedly infeasible")
    point = Point.primal(res.argmin.prefix, res.argmin.scalars)
    margin = -evaluate(sup_e, point)
    if not (margin.is_finite() and margin > ZERO):
        raise SolverError("slater point does not have a positive margin")
    return SlaterCertificate(point, margin.as_rat(), reinforced, weights)


# ---------------------------------------------------------------------------
# the scalar characterization 0 = inf max{f0 - alpha, f}
# ---------------------------------------------------------------------------


def _scalar_names(exprs: Sequence[Expr]) -> Tuple[str, ...]:
    return tuple(
        sorted(
            {
                n.name
                for root in exprs
                for n in ex.walk(root)
                if isinstance(n, ex.ScalarTerm)
            }
        )
    )


def performance_value(
    f0: Expr,
    constraints: Sequence[Expr],
    alpha: Fraction,
    scalars: Optional[Sequence[str]] = None,
) -> ExtReal:
    """h(alpha) := inf max{f0 - alpha, constraint system}."""
    parts: List[Expr] = [
        ex.AddFinite((f0, ex.TailConst(Fraction(-alpha), Space.PRIMAL)), Space.PRIMAL)
    ]
    for b in constraints:
        parts.append(ex.SupK(b, b.space) if arity(b) is Arity.FAMILY else b)
    root = parts[0] if len(parts) == 1 else ex.MaxFinite(tuple(parts), Space.PRIMAL)
    names = tuple(scalars) if scalars is not None else _scalar_names([f0, *constraints])
    fp = reduce_source(root, [], names, Space.PRIMAL)
    return solve_fp(fp).value


def certify_value(
    f0: Expr,
    constraints: Sequence[Expr],
    alpha,
    scalars: Optional[Sequence[str]] = None,
) -> bool:
    """alpha equals the optimal value iff h(alpha) == 0 (under Slater)."""
    return performance_value(f0, constraints, Fraction(alpha), scalars) == ZERO


def find_value(
    f0: Expr,
    constraints: Sequence[Expr],
    scalars: Optional[Sequence[str]] = None,
) -> Fraction:
    names = tuple(scalars) if scalars is not None else _scalar_names([f0, *constraints])
    fp = reduce_source(f0, list(constraints), names, Space.PRIMAL)
    value = solve_fp(fp).value
    if not value.is_finite():
        kind = "infeasible" if value == PLUS_INF else "unbounded"
        raise SolverError(f"optimal value is {kind}; nothing to certify")
    return value.as_rat()


def bisect_value(
    f0: Expr,
    constraints: Sequence[Expr],
    scalars: Optional[Sequence[str]] = None,
    steps: int = 60,
) -> Tuple[Fraction, Fraction]:
    """Dyadic bisection on alpha using monotonicity of h; independent of the
    LP value path (h is still evaluated exactly, but no v(P) solve enters)."""

    def h(a: Fraction) -> ExtReal:
        return performance_value(f0, constraints, a, scalars)

    lo, hi = Fraction(-1), Fraction(1)
    for _ in range(40):
        v = h(lo)
        if v == ZERO:
            return lo, lo
        if v > ZERO:
            break
        lo *= 2
    else:
        raise SolverError("bisection bracket search failed (lower end)")
    for _ in range(40):
        v = h(hi)
        if v == ZERO:
            return hi, hi
        if v < ZERO:
            break
        hi *= 2
    else:
        raise SolverError("bisection bracket search failed (upper end)")
    for _ in range(steps):
        mid = (lo + hi) / 2
        v = h(mid)
        if v == ZERO:
            return mid, mid
        if v > ZERO:
            lo = mid
        else:
            hi = mid
    return lo, hi


# ---------------------------------------------------------------------------
# multiplier recovery
# ---------------------------------------------------------------------------


def recover_multipliers(p: Problem) -> MultiplierRecord:
    """Read LP duals as multipliers and validate both penalized forms.

    Only validated records are returned: the summable form
    f0 + sum lam_k f_k^+ + lam_inf * limsup f_k and the bounded form
    f0 + sum lamhat_k f_k^+ must both reproduce v(P) exactly.
    """
    if check_slater(p) is None:
        raise ConjugacyRefusal("multiplier recovery requires a Slater certificate")
    if len(p.family_blocks) > 1:
        raise ReduceRefusal("multiplier recovery supports at most one family block")
    fp = reduce_source(p.objective, p.constraints, p.scalars, Space.PRIMAL)
    base = solve_fp(fp)
    if not base.value.is_finite():
        raise SolverError("multiplier recovery needs a finite optimal value")
    v_p = base.value
    groups: Dict[Tuple, Fraction] = {}
    for tag, mu in base.duals:
        groups[tag] = groups.get(tag, Fraction(0)) + mu
    scalar_ids = [i for i, c in enumerate(p.constraints) if arity(c) is Arity.SCALAR]
    family_ids = [i for i, c in enumerate(p.constraints) if arity(c) is Arity.FAMILY]
    lam_scalars = [groups.get(("scalar", i), Fraction(0)) for i in scalar_ids]
    fam_prefix: List[Fraction] = []
    tail_mass = Fraction(0)
    atinf_mass = Fraction(0)
    if family_ids:
        fb = family_ids[0]
        fam_prefix = [
            groups.get(("family", fb, k), Fraction(0)) for k in range(1, fp.n0 + 1)
        ]
        tail_mass = groups.get(("family_tail", fb), Fraction(0))
        atinf_mass = groups.get(("family_atinf", fb), Fraction(0))
    candidates = list(dict.fromkeys([atinf_mass + tail_mass, atinf_mass]))
    f_inf = p.f_inf()
    attempts = []
    for lam_inf in candidates:
        parts: List[Expr] = [p.objective]
        for lam, i in zip(lam_scalars, scalar_ids):
            parts.append(
                ex.ScaleNonneg(lam, ex.PosPart(p.constraints[i], Space.PRIMAL), Space.PRIMAL)
            )
        a2_parts = list(parts)
        if family_ids:
            fam = p.constraints[family_ids[0]]
            lam_pat = Pattern.constant(0, prefix=fam_prefix)
            hat_pat = Pattern.constant(lam_inf, prefix=fam_prefix)
            parts.append(ex.SeriesK(lam_pat, ex.PosPart(fam, Space.PRIMAL), Space.PRIMAL))
            a2_parts.append(
                ex.SeriesK(hat_pat, ex.PosPart(fam, Space.PRIMAL), Space.PRIMAL)
            )
        parts.append(ex.ScaleNonneg(lam_inf, f_inf, Space.PRIMAL))
        penal_a1b = ex.AddFinite(tuple(parts), Space.PRIMAL)
        penal_a2 = (
            a2_parts[0]
            if len(a2_parts) == 1
            else ex.AddFinite(tuple(a2_parts), Space.PRIMAL)
        )
        v1 = solve_fp(
            reduce_source(penal_a1b, [], p.scalars, Space.PRIMAL)
        ).value
        v2 = solve_fp(reduce_source(penal_a2, [], p.scalars, Space.PRIMAL)).value
        if v1 == v_p and v2 == v_p:
            enum_prefix = lam_scalars + fam_prefix
            return MultiplierRecord(
                lam=Pattern.constant(0, prefix=enum_prefix),
                lam_hat=Pattern.constant(lam_inf, prefix=enum_prefix),
                lam_inf=lam_inf,
                penalized_value=v_p,
            )
        attempts.append((lam_inf, v1, v2))
    raise MultiplierValidationError(
        f"penalized values {attempts} do not reproduce v(P)", v_p, attempts
    )
