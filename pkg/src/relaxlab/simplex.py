"""Two-phase primal simplex over exact rationals with Bland's rule.

Solves   min c.x  subject to  A x <= b,  x free,
by splitting free variables into nonnegative pairs and adding slacks.
Bland's anti-cycling rule makes the pivot path (and therefore the optimal
basis and the reported argmin) deterministic.  No tolerances appear
anywhere: every comparison is exact.

The dual multiplier of row i is read off as the final reduced cost of the
row's slack column; with the sign conventions used here it satisfies
c + A^T mu = 0, mu >= 0, and value = -mu.b at finite optima.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from .errors import SolverError

_PIVOT_CAP = 100_000


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: LPStatus
    value: Optional[Fraction]
    x: Optional[List[Fraction]]
    duals: Optional[List[Fraction]]


def solve_lp(
    costs: Sequence[Fraction],
    rows: Sequence[Tuple[Sequence[Fraction], Fraction]],
) -> LPResult:
    """Minimize costs.x over {x : row.x <= rhs for every row}, x free."""
    n = len(costs)
    m = len(rows)
    if m == 0:
        if any(c != 0 for c in costs):
            return LPResult(LPStatus.UNBOUNDED, None, [Fraction(0)] * n, None)
        return LPResult(LPStatus.OPTIMAL, Fraction(0), [Fraction(0)] * n, [])
    return _Simplex(costs, rows).run()


class _Simplex:
    def __init__(self, costs, rows):
        self.n = len(costs)
        self.m = len(rows)
        self.costs = [Fraction(c) for c in costs]
        ncols = 2 * self.n + self.m
        self.tab: List[List[Fraction]] = []
        self.rhs: List[Fraction] = []
        self.negated: List[bool] = []
        for a, b in rows:
            a = list(a) + [Fraction(0)] * (self.n - len(a))
            row = [Fraction(0)] * ncols
            for j, v in enumerate(a):
                row[2 * j] = Fraction(v)
                row[2 * j + 1] = -Fraction(v)
            b = Fraction(b)
            neg = b < 0
            if neg:
                row = [-v for v in row]
                b = -b
            self.negated.append(neg)
            self.rhs.append(b)
            self.tab.append(row)
        for i in range(self.m):
            self.tab[i][2 * self.n + i] = Fraction(-1) if self.negated[i] else Fraction(1)
        self.ncols = ncols
        self.basis: List[int] = []

    # -- tableau mechanics ---------------------------------------------

    def _pivot(self, r: int, j: int):
        piv = self.tab[r][j]
        inv = Fraction(1) / piv
        self.tab[r] = [v * inv for v in self.tab[r]]
        self.rhs[r] = self.rhs[r] * inv
        for i in range(len(self.tab)):
            if i == r:
                continue
            f = self.tab[i][j]
            if f == 0:
                continue
            self.tab[i] = [a - f * b for a, b in zip(self.tab[i], self.tab[r])]
            self.rhs[i] = self.rhs[i] - f * self.rhs[r]
        self.basis[r] = j

    def _reduced(self, col_costs: List[Fraction]) -> List[Fraction]:
        red = list(col_costs)
        for r, j in enumerate(self.basis):
            cb = col_costs[j]
            if cb == 0:
                continue
            row = self.tab[r]
            for col in range(len(red)):
                if row[col] != 0:
                    red[col] -= cb * row[col]
        return red

    def _iterate(self, col_costs: List[Fraction], allowed) -> str:
        pivots = 0
        while True:
            pivots += 1
            if pivots > _PIVOT_CAP:
                raise SolverError("simplex pivot budget exhausted")
            red = self._reduced(col_costs)
            enter = None
            for j in range(len(red)):
                if allowed(j) and red[j] < 0:
                    enter = j  # Bland: smallest eligible column index
                    break
            if enter is None:
                return "optimal"
            leave = None
            best = None
            for r in range(len(self.tab)):
                a = self.tab[r][enter]
                if a > 0:
                    ratio = self.rhs[r] / a
                    if best is None or ratio < best or (
                        ratio == best and self.basis[r] < self.basis[leave]
                    ):
                        best = ratio
                        leave = r
            if leave is None:
                return "unbounded"
            self._pivot(leave, enter)

    # -- phases ----------------------------------------------------------

    def run(self) -> LPResult:
        nc = self.ncols
        art_cols = []
        for i in range(self.m):
            if self.negated[i]:
                art_cols.append(len(self.tab[i]))
                for r in range(self.m):
                    self.tab[r].append(Fraction(1) if r == i else Fraction(0))
                self.basis.append(nc + len(art_cols) - 1)
            else:
                self.basis.append(2 * self.n + i)
        total_cols = nc + len(art_cols)
        if art_cols:
            phase1 = [Fraction(0)] * total_cols
            for j in range(nc, total_cols):
                phase1[j] = Fraction(1)
            if self._iterate(phase1, lambda j: True) == "unbounded":
                raise SolverError("phase-1 objective cannot be unbounded")
            if self._objective(phase1) > 0:
                return LPResult(LPStatus.INFEASIBLE, None, None, None)
            self._evict_artificials(nc)
        col_costs = [Fraction(0)] * (len(self.tab[0]) if self.tab else 0)
        for j in range(self.n):
            col_costs[2 * j] = self.costs[j]
            col_costs[2 * j + 1] = -self.costs[j]
        status = self._iterate(col_costs, lambda j: j < nc)
        x = self._solution()
        if status == "unbounded":
            return LPResult(LPStatus.UNBOUNDED, None, x, None)
        value = sum((c * v for c, v in zip(self.costs, x)), Fraction(0))
        red = self._reduced(col_costs)
        duals = [red[2 * self.n + i] for i in range(self.m)]
        return LPResult(LPStatus.OPTIMAL, value, x, duals)

    def _objective(self, col_costs) -> Fraction:
        total = Fraction(0)
        for r, j in enumerate(self.basis):
            total += col_costs[j] * self.rhs[r]
        return total

    def _evict_artificials(self, nc: int):
        # drive zero-level artificials out of the basis where possible; a row
        # with no remaining nonzero entry among the real columns is redundant,
        # pinned at zero, and can never block a later pivot, so it stays
        for r in range(len(self.tab)):
            if self.basis[r] >= nc:
                for j in range(nc):
                    if self.tab[r][j] != 0:
                        self._pivot(r, j)
                        break

    def _solution(self) -> List[Fraction]:
        vals = [Fraction(0)] * self.ncols
        for r, j in enumerate(self.basis):
            if j < self.ncols:
                vals[j] = self.rhs[r]
        return [vals[2 * j] - vals[2 * j + 1] for j in range(self.n)]
