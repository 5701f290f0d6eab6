"""Seeded random problem generators shared by the test suite.

Three families:

* ``slater_instance``  countably constrained programs with a built-in
  Slater point (the level variable y can always be pushed up) and a
  finite-valued continuous sup;
* ``slater_free_instance``  the same shape plus a pinned scalar block
  y = c, which kills strict feasibility;
* ``finite_instance``  finitely many scalar constraints with an interior
  point.
"""

import random
from fractions import Fraction

from relaxlab.patterns import Pattern
from relaxlab.relax import Problem
from relaxlab import expr as ex

F = Fraction


def _const_pattern(rng, lo=-2, hi=2, max_prefix=2):
    prefix = [F(rng.randint(2 * lo, 2 * hi), 2) for _ in range(rng.randint(0, max_prefix))]
    return Pattern.constant(F(rng.randint(lo, hi)), prefix)


def slater_instance(rng: random.Random, name="gen") -> Problem:
    a = rng.choice([F(1), F(1, 2), F(2)])
    b = rng.choice([F(1), F(2), F(1, 2)])
    center = _const_pattern(rng)
    shift = _const_pattern(rng, lo=-2, hi=1)
    fam = ex.add(
        ex.scale(a, ex.coord_abs(center)),
        ex.const_seq(shift),
        ex.sterm("y", -b),
    )
    alpha = rng.choice([F(1), F(2), F(1, 2)])
    parts = [ex.scale(alpha, ex.sterm("y"))]
    if rng.random() < 0.7:
        beta = rng.choice([F(1), F(1, 2)])
        parts.append(
            ex.scale(beta, ex.series(Pattern.half_powers(), ex.coord_abs(_const_pattern(rng))))
        )
    if rng.random() < 0.4:
        parts.append(ex.at_index(1, ex.coord_abs(Pattern.constant(F(rng.randint(-1, 1))))))
    constraints = [fam]
    if rng.random() < 0.3:
        lo = F(rng.randint(-3, 0))
        constraints.append(ex.add(ex.rconst(lo), ex.sterm("y", -1)))  # y >= lo
    return Problem(name, ex.add(*parts), tuple(constraints), ("y",))


def slater_free_instance(rng: random.Random, name="gen-free") -> Problem:
    base = slater_instance(rng, name)
    c = F(rng.randint(-2, 2))
    pin = (
        ex.add(ex.sterm("y"), ex.rconst(-c)),  # y - c <= 0
        ex.add(ex.sterm("y", -1), ex.rconst(c)),  # c - y <= 0
    )
    return Problem(name, base.objective, base.constraints + pin, base.scalars)


def finite_instance(rng: random.Random, name="gen-finite") -> Problem:
    lo = F(rng.randint(-4, 0))
    hi = lo + F(rng.randint(1, 4))
    target = F(rng.randint(-2, 2))
    parts = [
        ex.smax(
            ex.add(ex.sterm("y"), ex.rconst(-target)),
            ex.add(ex.sterm("y", -1), ex.rconst(target)),
        )
    ]
    if rng.random() < 0.5:
        parts.append(ex.scale(rng.choice([F(1), F(1, 2)]), ex.sterm("y")))
    if rng.random() < 0.4:
        parts.append(ex.at_index(1, ex.coord_abs(Pattern.constant(1))))
    constraints = [
        ex.add(ex.rconst(lo), ex.sterm("y", -1)),  # lo - y <= 0
        ex.add(ex.sterm("y"), ex.rconst(-hi)),  # y - hi <= 0
    ]
    if rng.random() < 0.5:
        r = F(rng.randint(1, 3))
        constraints.append(
            ex.add(ex.at_index(1, ex.coord_abs(Pattern.constant(0))), ex.rconst(-r))
        )
    return Problem(name, ex.add(*parts), tuple(constraints), ("y",))
