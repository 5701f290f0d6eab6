import random
from fractions import Fraction

import pytest

from relaxlab.errors import EvalError, SpaceMismatchError, ConvexityError
from relaxlab.extreal import MINUS_INF, PLUS_INF, ExtReal
from relaxlab.expr import (
    Arity,
    Point,
    Space,
    add,
    arity,
    at_index,
    coord_abs,
    coord_lin,
    const_seq,
    evaluate,
    eval_member,
    indicator,
    limsup,
    mix_points,
    pos,
    scale,
    scale_indexed,
    series,
    smax,
    stabilization_index,
    sterm,
    sup,
    validate,
)
from relaxlab.patterns import Pattern
from relaxlab.regions import LinRow, Region

HALF = Fraction(1, 2)
ONES = Pattern.constant(1)
W = Pattern.half_powers()  # 2**-k


def c0_objective():
    # y + sum_k 2^-k |x_k - 1|
    return add(sterm("y"), series(W, coord_abs(ONES)))


def c0_member():
    # |x_k - 1| - y
    return add(coord_abs(ONES), sterm("y", -1))


def ones_point(n, y):
    return Point.primal([1] * n, {"y": y})


def test_objective_at_prefix_one_points():
    f0 = c0_objective()
    for n in range(0, 8):
        got = evaluate(f0, ones_point(n, 1))
        assert got == ExtReal(1 + HALF**n)


def test_sup_at_slater_point():
    f = sup(c0_member())
    assert evaluate(f, Point.primal([], {"y": 2})) == ExtReal(-1)


def test_zero_const_family():
    z = const_seq(Pattern.constant(0))
    p = Point.primal([3, -2], {"y": 5})
    for k in (1, 2, 9):
        assert evaluate(z, p, k) == ExtReal(0)


def test_family_needs_index_and_space_checked():
    fam = c0_member()
    with pytest.raises(EvalError):
        evaluate(fam, Point.primal([], {"y": 0}))
    with pytest.raises(SpaceMismatchError):
        evaluate(fam, Point.bidual([], 0, {"y": 0}), 1)


def test_sup_on_bidual_tail():
    fam = add(coord_abs(ONES, Space.BIDUAL), sterm("y", -1, Space.BIDUAL))
    v = evaluate(sup(fam), Point.bidual([0, 3], HALF, {"y": 0}))
    # coords: |0-1|=1, |3-1|=2, tail |1/2-1| = 1/2
    assert v == ExtReal(2)


def test_series_divergence_reads_plus_inf():
    fam = pos(c0_member())  # (|x_k - 1| - y)^+ is certified nonnegative
    s = series(Pattern.constant(1), fam)
    assert evaluate(s, Point.primal([], {"y": 0})) == PLUS_INF
    assert evaluate(s, Point.primal([1, 1], {"y": 1})) == ExtReal(0)
    # brute partial sums grow without bound at y = 0
    partial = sum(
        eval_member(fam, Point.primal([], {"y": 0}), k).as_rat() for k in range(1, 40)
    )
    assert partial >= 30


def test_series_with_geometric_scaled_family():
    # sum_k 2^-k * (|x_k - 1| - y) converges even though the term is signed
    s = series(W, c0_member())
    got = evaluate(s, Point.primal([], {"y": 3}))
    assert got == ExtReal(1 - 3)  # sum 2^-k (1 - 3) ... = (1) - y * 1


def test_limsup_values():
    fam = c0_member()
    assert evaluate(limsup(fam), Point.primal([7, 7, 7], {"y": HALF})) == ExtReal(
        HALF
    )
    grow = scale_indexed(Pattern.geometric(1, 2), sterm("y", -1))
    assert evaluate(limsup(grow), Point.primal([], {"y": 1})) == MINUS_INF
    assert evaluate(limsup(grow), Point.primal([], {"y": -1})) == PLUS_INF


def test_scale_indexed_weighted_sup():
    # sup_k 2^-k (|x_k - 1| - y): approaches 0 from below for y >= 1
    weighted = scale_indexed(W, c0_member())
    v = evaluate(sup(weighted), Point.primal([], {"y": 3}))
    assert v == ExtReal(0)
    v = evaluate(sup(weighted), Point.primal([], {"y": 0}))
    assert v == ExtReal(HALF)


def test_reinforced_family_eval():
    # f_k = |x_k - 1| - 2^k y
    fam = add(coord_abs(ONES), scale_indexed(Pattern.geometric(1, 2), sterm("y", -1)))
    p = Point.primal([], {"y": 1})
    assert eval_member(fam, p, 1) == ExtReal(-1)
    assert eval_member(fam, p, 3) == ExtReal(1 - 8)
    assert evaluate(sup(fam), p) == ExtReal(-1)
    assert evaluate(sup(fam), Point.primal([], {"y": -1})) == PLUS_INF
    # alpha_k f_k with alpha_k = 2^-k has sup 2^-1 - 1 = -1/2 at (0, 1)
    weighted = scale_indexed(W, fam)
    assert evaluate(sup(weighted), p) == ExtReal(-HALF)


def test_indicator_region():
    region = Region(rows=(LinRow.of({"y": -1}, -1),))  # -y <= -1, i.e. y >= 1
    e = indicator(region)
    assert evaluate(e, Point.primal([], {"y": 2})) == ExtReal(0)
    assert evaluate(e, Point.primal([], {"y": 0})) == PLUS_INF


def test_at_index_pins_member():
    e = at_index(1, coord_lin(Pattern.constant(1)))
    assert arity(e) is Arity.SCALAR
    assert evaluate(e, Point.primal([5], {})) == ExtReal(5)


def test_validate_flags():
    assert validate(sup(c0_member())).continuous_everywhere
    assert not validate(indicator(Region(rows=(LinRow.of({"y": 1}, 0),)))).finite_everywhere
    s = series(Pattern.constant(1), pos(c0_member()))
    assert not validate(s).finite_everywhere
    assert validate(c0_objective()).proper


def test_convexity_guard():
    with pytest.raises(ConvexityError):
        scale(-1, sterm("y"))
    with pytest.raises(ConvexityError):
        scale_indexed(Pattern.constant(-1), coord_abs(ONES))


def test_eventual_stabilization_invariant():
    rng = random.Random(3)
    for _ in range(20):
        center = Pattern.constant(
            Fraction(rng.randint(-3, 3)),
            prefix=[Fraction(rng.randint(-3, 3)) for _ in range(rng.randint(0, 3))],
        )
        fam = add(coord_abs(center), sterm("y", -1))
        p = Point.primal(
            [Fraction(rng.randint(-3, 3)) for _ in range(rng.randint(0, 4))],
            {"y": Fraction(rng.randint(-2, 2))},
        )
        k0 = max(stabilization_index(fam), len(p.prefix)) + 1
        vals = [eval_member(fam, p, k) for k in range(k0, k0 + 10)]
        assert all(v == vals[0] for v in vals)
        assert evaluate(limsup(fam), p) == vals[0]
        prefix_vals = [eval_member(fam, p, k) for k in range(1, k0)]
        expected_sup = max(prefix_vals + [vals[0]])
        assert evaluate(sup(fam), p) == expected_sup


def _random_scalar_expr(rng, depth=2):
    if depth == 0:
        atom = rng.choice(["y", "z", "const", "x1"])
        if atom == "const":
            return rconst_like(rng)
        if atom == "x1":
            return at_index(1, coord_lin(Pattern.constant(Fraction(rng.randint(-2, 2)))))
        return sterm(atom, Fraction(rng.randint(-2, 2)))
    op = rng.choice(["add", "max", "scale", "pos", "series", "sup"])
    if op == "add":
        return add(*[_random_scalar_expr(rng, depth - 1) for _ in range(2)])
    if op == "max":
        return smax(*[_random_scalar_expr(rng, depth - 1) for _ in range(2)])
    if op == "scale":
        return scale(Fraction(rng.randint(0, 3), 2), _random_scalar_expr(rng, depth - 1))
    if op == "pos":
        return pos(_random_scalar_expr(rng, depth - 1))
    fam = add(
        coord_abs(Pattern.constant(Fraction(rng.randint(-2, 2)))),
        sterm("y", Fraction(rng.randint(-2, 2))),
    )
    return series(Pattern.half_powers(), fam) if op == "series" else sup(fam)


def rconst_like(rng):
    from relaxlab.expr import rconst

    return rconst(Fraction(rng.randint(-3, 3)))


def _random_point(rng):
    return Point.primal(
        [Fraction(rng.randint(-4, 4), 2) for _ in range(rng.randint(0, 3))],
        {"y": Fraction(rng.randint(-4, 4), 2), "z": Fraction(rng.randint(-4, 4), 2)},
    )


def test_convexity_property():
    rng = random.Random(11)
    ts = [Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
    for _ in range(60):
        e = _random_scalar_expr(rng)
        p, q = _random_point(rng), _random_point(rng)
        for t in ts:
            mid = evaluate(e, mix_points(p, q, t))
            vp, vq = evaluate(e, p), evaluate(e, q)
            bound = vp.scale(t) + vq.scale(1 - t)
            assert mid <= bound


def test_monotone_series_matches_partial_sup():
    # with nonnegative weights and a nonnegative term the upper sum is the
    # supremum of the partial sums
    rng = random.Random(5)
    for _ in range(20):
        fam = pos(
            add(
                coord_abs(Pattern.constant(Fraction(rng.randint(-2, 2)))),
                sterm("y", Fraction(rng.randint(-2, 0))),
            )
        )
        w = Pattern.half_powers()
        p = _random_point(rng)
        total = evaluate(series(w, fam), p)
        partials = []
        acc = Fraction(0)
        for k in range(1, 50):
            acc += w.value(k) * eval_member(fam, p, k).as_rat()
            partials.append(acc)
        assert all(ExtReal(v) <= total for v in partials)
        assert total - ExtReal(partials[-1]) <= ExtReal(Fraction(1, 2**40))
