"""Built-in example problems.

Galleries are code-level constants rather than data files, so tests cannot
drift from the published values they reproduce:

* ``c0-gap``       the sequence-space program whose bare biconjugate
                   relaxation drops the value from 1 to 0;
* ``finite``       one constraint, no gap;
* ``reinforced``   a family needing weighted (reinforced) strict feasibility;
* ``dual-ball``    the closed-form linear-program gap on a dual ball.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import GalleryError
from .extreal import MINUS_INF, ExtReal
from .patterns import ConstantTail, GeometricTail, Pattern
from .relax import Problem
from . import expr as ex
from .expr import Space


def c0_gap() -> Problem:
    ones = Pattern.constant(1)
    f0 = ex.add(
        ex.sterm("y"),
        ex.series(Pattern.half_powers(), ex.coord_abs(ones)),
    )
    fam = ex.add(ex.coord_abs(ones), ex.sterm("y", -1))
    return Problem("c0-gap", f0, (fam,), ("y",))


def finite_gallery() -> Problem:
    f0 = ex.at_index(1, ex.coord_lin(Pattern.constant(1)))
    con = ex.add(
        ex.at_index(1, ex.coord_abs(Pattern.constant(1))),
        ex.rconst(-1),
    )
    return Problem("finite", f0, (con,), ())


def reinforced_gallery() -> Problem:
    fam = ex.add(
        ex.coord_abs(Pattern.constant(1)),
        ex.scale_indexed(Pattern.geometric(1, 2), ex.sterm("y", -1)),
    )
    return Problem("reinforced", ex.sterm("y"), (fam,), ("y",))


@dataclass(frozen=True)
class DualBallReport:
    query: Pattern
    v_p: ExtReal
    v_pstar: ExtReal
    gap: bool


class DualBallGallery:
    """Closed-form values of the dual-ball linear program family.

    For a query x* the primal value is -f*(x*): zero when sup_k |x*_k| <= 1
    and -inf otherwise.  The relaxed value additionally needs x* in the norm
    closure of the predual ball, i.e. a tail converging to zero.  A gap
    appears exactly on in-ball queries with a nonzero tail, even though the
    supremum of the constraint family is continuous everywhere.
    """

    name = "dual-ball"

    @staticmethod
    def sup_abs(q: Pattern) -> Optional[Fraction]:
        """sup_k |q_k| exactly; None encodes +inf."""
        best = max((abs(v) for v in q.prefix), default=Fraction(0))
        t = q.tail
        if isinstance(t, ConstantTail):
            return max(best, abs(t.c))
        if t.a == 0:
            return best
        if t.rho > 1:
            return None
        return max(best, abs(t.a) * t.rho ** (q.n0 + 1))

    @staticmethod
    def tail_vanishes(q: Pattern) -> bool:
        return q.eventual_value() == 0

    def query(self, q: Pattern) -> DualBallReport:
        sup = self.sup_abs(q)
        in_ball = sup is not None and sup <= 1
        v_p = ExtReal(0) if in_ball else MINUS_INF
        v_pstar = ExtReal(0) if in_ball and self.tail_vanishes(q) else MINUS_INF
        return DualBallReport(q, v_p, v_pstar, v_p != v_pstar)


GALLERIES = {
    "c0-gap": c0_gap,
    "finite": finite_gallery,
    "reinforced": reinforced_gallery,
    "dual-ball": DualBallGallery,
}


def gallery(name: str) -> Union[Problem, DualBallGallery]:
    try:
        factory = GALLERIES[name]
    except KeyError:
        raise GalleryError(
            f"unknown gallery {name!r}; available: {sorted(GALLERIES)}"
        ) from None
    return factory()
