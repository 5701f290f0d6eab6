"""Independent finite-dimensional numerical oracle.

One-dimensional sampled functions, linear-time discrete Legendre transforms
over the convex hull of the sampled epigraph, convex envelopes by double
transform, and Fenchel primal/dual values on grids.  This is the only module
that touches binary64: it cross-checks the exact structured backend and
demonstrates strong duality in the reflexive regime, so every comparison
carries an explicit tolerance (1e-9 structural, grid modulus functional).
+inf is an explicit per-sample flag (math.inf), never a sentinel magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .conjugacy import biconjugate
from .errors import SolverError
from . import expr as ex
from .expr import Expr, Point, Space, evaluate

INF = math.inf
STRUCT_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    xs: Tuple[float, ...]
    vals: Tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.vals):
            raise SolverError("grid abscissae and values differ in length")
        if any(b <= a for a, b in zip(self.xs, self.xs[1:])):
            raise SolverError("grid abscissae must be strictly increasing")
        if any(v == -INF or (v != INF and not math.isfinite(v)) for v in self.vals):
            raise SolverError("grid values must be finite or +inf")
        if not any(v != INF for v in self.vals):
            raise SolverError("grid needs at least one finite value")

    def finite_points(self) -> List[Tuple[float, float]]:
        return [(x, v) for x, v in zip(self.xs, self.vals) if v != INF]

    def modulus(self) -> float:
        """Largest value variation across one cell of the finite part."""
        pts = self.finite_points()
        return max(
            (abs(b[1] - a[1]) for a, b in zip(pts, pts[1:])), default=0.0
        )


def uniform_grid(fn, lo: float, hi: float, n: int) -> Grid:
    xs = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    return Grid(tuple(xs), tuple(float(fn(x)) for x in xs))


def _lower_hull(points: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    hull: List[Tuple[float, float]] = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep turn convex: slope to p must exceed slope of last edge
            if (y2 - y1) * (p[0] - x2) >= (p[1] - y2) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def llt_conjugate(f: Grid, dual_xs: Sequence[float]) -> Grid:
    """Discrete Legendre transform: f*(s) = max_i (s x_i - f(x_i)).

    Equals the conjugate of the piecewise-linear interpolant of f extended
    by +inf outside the sampled domain; linear time in samples plus duals.
    """
    if any(b <= a for a, b in zip(dual_xs, list(dual_xs)[1:])):
        raise SolverError("dual abscissae must be strictly increasing")
    hull = _lower_hull(f.finite_points())
    out = []
    idx = 0
    for s in dual_xs:
        while idx + 1 < len(hull) and (
            s * hull[idx + 1][0] - hull[idx + 1][1]
            >= s * hull[idx][0] - hull[idx][1]
        ):
            idx += 1
        out.append(s * hull[idx][0] - hull[idx][1])
    return Grid(tuple(float(s) for s in dual_xs), tuple(out))


def _hull_slopes(f: Grid) -> List[float]:
    hull = _lower_hull(f.finite_points())
    return [
        (b[1] - a[1]) / (b[0] - a[0]) for a, b in zip(hull, hull[1:])
    ]


def llt_biconjugate(f: Grid) -> Grid:
    """Double transform on the same abscissae: the lower convex envelope."""
    slopes = sorted(set(_hull_slopes(f))) or [0.0]
    fstar = llt_conjugate(f, slopes)
    pts = f.finite_points()
    lo, hi = pts[0][0], pts[-1][0]
    vals = []
    for x in f.xs:
        if x < lo or x > hi:
            vals.append(INF)
            continue
        vals.append(max(x * s - v for s, v in zip(fstar.xs, fstar.vals)))
    return Grid(f.xs, tuple(vals))


def _interpolate(f: Grid, x: float) -> float:
    pts = f.finite_points()
    if not pts or x < pts[0][0] or x > pts[-1][0]:
        return INF
    for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
        if x1 <= x <= x2:
            if y1 == INF or y2 == INF:
                return INF
            t = 0.0 if x2 == x1 else (x - x1) / (x2 - x1)
            return y1 + t * (y2 - y1)
    return pts[-1][1] if x == pts[-1][0] else INF


def fenchel_dual_value(f: Grid, g: Grid) -> Tuple[float, float]:
    """(vP, vD) for inf f+g and its Fenchel dual sup -f*(s) - g*(-s).

    vP scans the union of breakpoints inside the common domain (exact for
    the piecewise-linear interpolants); vD maximizes over the hull slopes of
    both functions and reports +inf when the dual is unbounded (disjoint
    domains make it so).
    """
    fpts, gpts = f.finite_points(), g.finite_points()
    lo = max(fpts[0][0], gpts[0][0])
    hi = min(fpts[-1][0], gpts[-1][0])
    v_p = INF
    if lo <= hi:
        candidates = sorted(
            {x for x, _ in fpts if lo <= x <= hi}
            | {x for x, _ in gpts if lo <= x <= hi}
            | {lo, hi}
        )
        v_p = min(_interpolate(f, x) + _interpolate(g, x) for x in candidates)
    # dual unboundedness from the recession slopes
    if gpts[-1][0] < fpts[0][0] or fpts[-1][0] < gpts[0][0]:
        return v_p, INF
    slopes = sorted(
        set(_hull_slopes(f)) | {-s for s in _hull_slopes(g)} | {0.0}
    )
    fstar = llt_conjugate(f, slopes)
    gstar_neg = llt_conjugate(g, sorted(-s for s in slopes))
    gstar_at = dict(zip(gstar_neg.xs, gstar_neg.vals))
    v_d = max(
        -fs - gstar_at[-s] for s, fs in zip(fstar.xs, fstar.vals)
    )
    return v_p, v_d


@dataclass(frozen=True)
class CrossCheckReport:
    variable: str
    deviation: float
    modulus: float

    @property
    def ok(self) -> bool:
        return self.deviation <= max(self.modulus, STRUCT_TOL)


def restrict_to_line(
    e: Expr,
    variable: str,
    fixed: Optional[Dict[str, Fraction]] = None,
):
    """A callable t -> e(point) along one variable, everything else fixed.

    ``variable`` is a scalar name or a coordinate like ``x1``; remaining
    scalars take the values in ``fixed`` (default 0) and the tail is 0.
    """
    fixed = {k: Fraction(v) for k, v in (fixed or {}).items()}
    names = {
        n.name for n in ex.walk(e) if isinstance(n, ex.ScalarTerm)
    }
    coord_idx = int(variable[1:]) if variable.startswith("x") else None

    def at(t: Fraction, space: Space = Space.PRIMAL) -> Point:
        scalars = {s: fixed.get(s, Fraction(0)) for s in names}
        prefix: List[Fraction] = []
        if coord_idx is not None:
            prefix = [fixed.get(f"x{k}", Fraction(0)) for k in range(1, coord_idx + 1)]
            prefix[coord_idx - 1] = t
        else:
            scalars[variable] = t
        if space is Space.PRIMAL:
            return Point.primal(prefix, scalars)
        return Point.bidual(prefix, 0, scalars)

    return at


def cross_check(
    e: Expr,
    variable: str,
    lo: Fraction,
    hi: Fraction,
    samples: int,
    fixed: Optional[Dict[str, Fraction]] = None,
) -> CrossCheckReport:
    """Sampled-envelope agreement between the oracle and the structured
    biconjugate along one line; the deviation must stay within the grid
    modulus (zero up to float error when the restriction is already convex).
    """
    at = restrict_to_line(e, variable, fixed)
    lo, hi = Fraction(lo), Fraction(hi)
    ts = [lo + (hi - lo) * i / (samples - 1) for i in range(samples)]
    vals = []
    for t in ts:
        v = evaluate(e, at(t))
        vals.append(float(v.as_rat()) if v.is_finite() else INF)
    grid = Grid(tuple(float(t) for t in ts), tuple(vals))
    numeric = llt_biconjugate(grid)
    structured = biconjugate(e).expr
    deviation = 0.0
    for t, num in zip(ts, numeric.vals):
        v = evaluate(structured, at(t, Space.BIDUAL))
        sym = float(v.as_rat()) if v.is_finite() else INF
        if num == INF and sym == INF:
            continue
        if num == INF or sym == INF:
            deviation = INF
            break
        deviation = max(deviation, abs(num - sym))
    return CrossCheckReport(variable, deviation, grid.modulus())
