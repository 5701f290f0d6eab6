"""Problems, their biconjugate relaxations, and certified duality chains.

A Problem is  inf f0(x)  s.t.  block <= 0 for every constraint block, over
primal points; a block is a single scalar constraint or a k-indexed family.
Infeasibility reads as value +inf.  The relaxation variants move everything
to bidual points:

    pstar2  objective** and member** constraints only;
    pinf    adds (limsup_k f_k)** <= 0 and z in cl^w** dom(sup_k f_k)**;
    p1      same extra constraint, region dom(sup f)** without closure;
    p2      member** constraints plus z in cl^w** dom(sum_k f_k^+);
    p3      member** constraints plus the closed domain, no limsup row;
    pc      the concave-like reduction (member**, region cl^w** dom sup f).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .conjugacy import (
    BiconjugateResult,
    biconjugate,
    dom_region,
    f_infinity,
)
from .errors import ConjugacyRefusal, ConvexityError, InternalInvariantError
from .extreal import ExtReal
from .patterns import Pattern
from .regions import Region
from . import expr as ex
from .expr import Arity, Expr, Point, Space, arity, evaluate, validate

REL_TOL = None  # everything here is exact; no tolerances exist


class Variant(Enum):
    PSTAR2 = "pstar2"
    P1 = "p1"
    P2 = "p2"
    P3 = "p3"
    PINF = "pinf"
    PCONCAVE = "pc"


@dataclass(frozen=True)
class Problem:
    name: str
    objective: Expr
    constraints: Tuple[Expr, ...]
    scalars: Tuple[str, ...]

    def __post_init__(self):
        if arity(self.objective) is not Arity.SCALAR:
            raise ConvexityError("objective must be a scalar expression")
        for e in (self.objective, *self.constraints):
            if e.space is not Space.PRIMAL:
                raise ConvexityError("problems are stated on the primal space")
        used = {
            n.name
            for root in (self.objective, *self.constraints)
            for n in ex.walk(root)
            if isinstance(n, ex.ScalarTerm)
        }
        missing = used - set(self.scalars)
        if missing:
            raise ConvexityError(f"undeclared scalar variables: {sorted(missing)}")

    @property
    def family_blocks(self) -> Tuple[Expr, ...]:
        return tuple(c for c in self.constraints if arity(c) is Arity.FAMILY)

    @property
    def scalar_blocks(self) -> Tuple[Expr, ...]:
        return tuple(c for c in self.constraints if arity(c) is Arity.SCALAR)

    def sup_expr(self) -> Optional[Expr]:
        """sup over the whole constraint system, as a scalar expression."""
        parts: List[Expr] = list(self.scalar_blocks)
        parts.extend(ex.SupK(b, b.space) for b in self.family_blocks)
        if not parts:
            return None
        return parts[0] if len(parts) == 1 else ex.MaxFinite(tuple(parts), Space.PRIMAL)

    def f_inf(self) -> Expr:
        """limsup of the enumerated constraint family (-inf when finite)."""
        fams = self.family_blocks
        if not fams:
            return ex.NegInfConst(Space.PRIMAL)
        parts = [f_infinity(b) for b in fams]
        return parts[0] if len(parts) == 1 else ex.MaxFinite(tuple(parts), Space.PRIMAL)


@dataclass(frozen=True)
class Relaxation:
    variant: Variant
    objective: Expr
    constraints: Tuple[Expr, ...]
    region: Region
    scalars: Tuple[str, ...]
    provenance: Tuple[str, ...]
    caveats: Tuple[str, ...] = ()


def build_relaxation(p: Problem, variant: Variant) -> Relaxation:
    if variant is Variant.PCONCAVE:
        return build_concave_relaxation(p)
    obj = biconjugate(p.objective)
    cons = [biconjugate(c) for c in p.constraints]
    rules: Dict[str, bool] = {}
    for r in (obj, *cons):
        for tag in r.rules_applied:
            rules[tag] = True
    out_cons: List[Expr] = [r.expr for r in cons]
    provenance = [f"objective/constraints: {', '.join(rules)}"]
    caveats: List[str] = []
    region = Region.whole()
    sup = p.sup_expr()

    def closed_dom_sup() -> Region:
        if sup is None:
            return Region.whole()
        return dom_region(sup, close=True)

    if variant is Variant.PSTAR2:
        provenance.append("region: whole bidual space")
    elif variant in (Variant.PINF, Variant.P1):
        f_inf = p.f_inf()
        if not isinstance(f_inf, ex.NegInfConst):
            bc_inf = biconjugate(f_inf)
            out_cons.append(bc_inf.expr)
            provenance.append("tail constraint: (limsup_k f_k)** <= 0")
        else:
            provenance.append("finite family: limsup constraint is -inf, dropped")
        if variant is Variant.PINF:
            region = closed_dom_sup()
            provenance.append("region: cl^w** dom (sup_k f_k)**")
        else:
            region = (
                dom_region(biconjugate(sup).expr) if sup is not None else Region.whole()
            )
            provenance.append("region: dom (sup_k f_k)** (no closure)")
    elif variant is Variant.P2:
        parts: List[Expr] = [
            ex.SeriesK(Pattern.constant(1), ex.PosPart(b, b.space), b.space)
            for b in p.family_blocks
        ]
        parts.extend(ex.PosPart(b, b.space) for b in p.scalar_blocks)
        if parts:
            total = parts[0] if len(parts) == 1 else ex.AddFinite(tuple(parts), Space.PRIMAL)
            region = dom_region(total, close=True)
        provenance.append("region: cl^w** dom (sum_k f_k^+), unit weights")
    elif variant is Variant.P3:
        region = closed_dom_sup()
        provenance.append("region: cl^w** dom (sup_k f_k)**, no tail constraint")
    return Relaxation(
        variant=variant,
        objective=obj.expr,
        constraints=tuple(out_cons),
        region=region,
        scalars=p.scalars,
        provenance=tuple(provenance),
        caveats=tuple(caveats),
    )


# ---------------------------------------------------------------------------
# concave-like families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConcaveLikeBudget:
    index_range: int = 3
    weight_pairs: Tuple[Tuple[Fraction, Fraction], ...] = (
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(1), Fraction(1)),
    )
    point_samples: int = 24
    seed: int = 2024


@dataclass(frozen=True)
class ConcaveLikeWitness:
    subfamily: Tuple[int, ...]
    weights: Tuple[Fraction, ...]
    violations: Tuple[Tuple[int, Point], ...]  # candidate index -> point


@dataclass(frozen=True)
class ConcaveLikeVerdict:
    disproved: bool
    witness: Optional[ConcaveLikeWitness] = None

    @property
    def not_disproved(self) -> bool:
        return not self.disproved


def _members(fam: Union[Expr, Sequence[Expr]], count: int) -> List[Expr]:
    if isinstance(fam, (list, tuple)):
        return list(fam)
    return [ex.AtIndex(k, fam, fam.space) for k in range(1, count + 1)]


def _sample_points(exprs: Sequence[Expr], budget: ConcaveLikeBudget) -> List[Point]:
    rng = random.Random(budget.seed)
    names = sorted(
        {
            n.name
            for root in exprs
            for n in ex.walk(root)
            if isinstance(n, ex.ScalarTerm)
        }
    )
    depth = max((ex.stabilization_index(e) for e in exprs), default=1) + 2
    pts = []
    base = [Fraction(0), Fraction(1), Fraction(-1), Fraction(3)]
    for v in base:
        pts.append(Point.primal([v] * depth, {s: v for s in names}))
    while len(pts) < budget.point_samples:
        prefix = [Fraction(rng.randint(-6, 6), 2) for _ in range(depth)]
        scal = {s: Fraction(rng.randint(-6, 6), 2) for s in names}
        pts.append(Point.primal(prefix, scal))
    return pts


def is_concave_like(
    fam: Union[Expr, Sequence[Expr]],
    budget: ConcaveLikeBudget = ConcaveLikeBudget(),
) -> ConcaveLikeVerdict:
    """Sampled refutation of closedness for convex combinations.

    Disproved verdicts carry exact witnesses: a subfamily, weights, and for
    every candidate member a point where the weighted combination strictly
    exceeds the candidate.  NotDisproved is explicitly not a proof.
    """
    finite = isinstance(fam, (list, tuple))
    members = _members(fam, budget.index_range)
    points = _sample_points(members, budget)
    support = max(len(pt.prefix) for pt in points)
    candidates = members if finite else _members(fam, support + 1)
    for pair in itertools.combinations(range(len(members)), 2):
        for weights in budget.weight_pairs:
            total = sum(weights, Fraction(0))
            violations: List[Tuple[int, Point]] = []
            refuted_all = True
            for ci, cand in enumerate(candidates):
                found = None
                for pt in points:
                    combo = ExtReal(0)
                    for wi, mi in zip(weights, pair):
                        combo = combo + evaluate(members[mi], pt).scale(wi)
                    bound = evaluate(cand, pt).scale(total)
                    if combo > bound:
                        found = pt
                        break
                if found is None:
                    refuted_all = False
                    break
                violations.append((ci + 1, found))
            if refuted_all:
                return ConcaveLikeVerdict(
                    True,
                    ConcaveLikeWitness(
                        tuple(i + 1 for i in pair), weights, tuple(violations)
                    ),
                )
    return ConcaveLikeVerdict(False)


def build_concave_relaxation(
    p: Problem, budget: ConcaveLikeBudget = ConcaveLikeBudget()
) -> Relaxation:
    sup = p.sup_expr()
    if sup is None:
        raise ConjugacyRefusal("concave-like relaxation needs constraints")
    if not validate(sup).continuous_everywhere:
        raise ConjugacyRefusal(
            "sup of the family is not certified continuous", subtree=sup
        )
    fam: Union[Expr, Sequence[Expr]]
    if len(p.family_blocks) == 1 and not p.scalar_blocks:
        fam = p.family_blocks[0]
    else:
        fam = list(p.constraints)
    verdict = is_concave_like(fam, budget)
    if verdict.disproved:
        w = verdict.witness
        raise ConjugacyRefusal(
            "family disproved concave-like on subfamily "
            f"{w.subfamily} with weights {tuple(map(str, w.weights))}"
        )
    obj = biconjugate(p.objective)
    cons = [biconjugate(c) for c in p.constraints]
    return Relaxation(
        variant=Variant.PCONCAVE,
        objective=obj.expr,
        constraints=tuple(r.expr for r in cons),
        region=dom_region(sup, close=True),
        scalars=p.scalars,
        provenance=("concave-like reduction: member**, region cl^w** dom sup f",),
        caveats=(
            "concave-like: not disproved on the sample budget; this is not a proof",
        ),
    )


# ---------------------------------------------------------------------------
# duality chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainReport:
    v_p: ExtReal
    v_lower: ExtReal
    lower_variant: Variant
    certified_equal: bool
    dual_bounds: Tuple[ExtReal, ExtReal]
    slater_margin: Optional[Fraction]
    continuity: bool

    def describe(self) -> str:
        if self.certified_equal:
            return f"v(D) = v(D') = v(P) = {self.v_p} (certified)"
        return (
            f"v(D), v(D') lie in [{self.dual_bounds[0]}, {self.dual_bounds[1]}]"
            " (not certified equal)"
        )


def duality_chain_report(
    p: Problem, lower_variant: Variant = Variant.PINF
) -> ChainReport:
    """Two-sided certification of the Fenchel dual values.

    The dual problems are never evaluated directly: weak duality pins both
    dual values between the lower relaxation and v(P), and under a Slater
    certificate with the continuity flag the chain collapses to equality.
    """
    from . import solve as sv

    v_p = sv.solve_problem(p).value
    lower = build_relaxation(p, lower_variant)
    v_lower = sv.solve_relaxation(lower).value
    if not v_lower <= v_p:
        raise InternalInvariantError(
            f"weak duality violated: v({lower_variant.value}) = {v_lower} > {v_p} = v(P)"
        )
    cert = sv.check_slater(p)
    sup = p.sup_expr()
    continuity = sup is None or validate(sup).continuous_everywhere
    certified = (
        lower_variant is Variant.PINF
        and cert is not None
        and continuity
        and v_lower == v_p
    )
    return ChainReport(
        v_p=v_p,
        v_lower=v_lower,
        lower_variant=lower_variant,
        certified_equal=certified,
        dual_bounds=(v_lower, v_p),
        slater_margin=None if cert is None else cert.margin,
        continuity=continuity,
    )
