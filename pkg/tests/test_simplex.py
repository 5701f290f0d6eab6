import random
from fractions import Fraction

from relaxlab.simplex import LPStatus, solve_lp

F = Fraction


def test_simple_minimum():
    # min x + y  s.t.  -x <= 0, -y <= 0, -x - y <= -1
    res = solve_lp(
        [F(1), F(1)],
        [([F(-1), F(0)], F(0)), ([F(0), F(-1)], F(0)), ([F(-1), F(-1)], F(-1))],
    )
    assert res.status is LPStatus.OPTIMAL
    assert res.value == 1


def test_infeasible():
    res = solve_lp([F(1)], [([F(1)], F(0)), ([F(-1)], F(-1))])  # x <= 0, x >= 1
    assert res.status is LPStatus.INFEASIBLE


def test_unbounded_returns_feasible_point():
    res = solve_lp([F(1)], [([F(1)], F(5))])  # min x s.t. x <= 5
    assert res.status is LPStatus.UNBOUNDED
    assert res.x is not None and res.x[0] <= 5


def test_free_variable_negative_optimum():
    # min x s.t. -x <= 3  -> x >= -3
    res = solve_lp([F(1)], [([F(-1)], F(3))])
    assert res.status is LPStatus.OPTIMAL
    assert res.value == -3 and res.x == [F(-3)]


def test_duals_satisfy_kkt():
    rng = random.Random(42)
    solved = 0
    while solved < 30:
        n = rng.randint(1, 3)
        m = rng.randint(1, 5)
        rows = []
        for _ in range(m):
            a = [F(rng.randint(-3, 3)) for _ in range(n)]
            rows.append((a, F(rng.randint(-4, 4))))
        # box rows keep it bounded
        for j in range(n):
            e = [F(0)] * n
            e[j] = F(1)
            rows.append((list(e), F(10)))
            e2 = [F(0)] * n
            e2[j] = F(-1)
            rows.append((e2, F(10)))
        c = [F(rng.randint(-3, 3)) for _ in range(n)]
        res = solve_lp(c, rows)
        if res.status is not LPStatus.OPTIMAL:
            continue
        solved += 1
        mu = res.duals
        assert all(u >= 0 for u in mu)
        # stationarity: c + A^T mu = 0
        for j in range(n):
            assert c[j] + sum(mu[i] * rows[i][0][j] for i in range(len(rows))) == 0
        # strong duality: value = -mu . b
        assert res.value == -sum(mu[i] * rows[i][1] for i in range(len(rows)))
        # complementary slackness
        for i, (a, b) in enumerate(rows):
            slack = b - sum(a[j] * res.x[j] for j in range(n))
            assert slack >= 0
            assert mu[i] * slack == 0


def test_degenerate_cycling_guard():
    # classic degeneracy: many redundant rows through the optimum
    rows = [
        ([F(1), F(1)], F(0)),
        ([F(2), F(2)], F(0)),
        ([F(1), F(0)], F(0)),
        ([F(0), F(1)], F(0)),
        ([F(-1), F(0)], F(0)),
        ([F(0), F(-1)], F(0)),
    ]
    res = solve_lp([F(-1), F(-1)], rows)
    assert res.status is LPStatus.OPTIMAL
    assert res.value == 0


def test_deterministic_argmin():
    rows = [([F(1), F(1)], F(2)), ([F(-1), F(0)], F(0)), ([F(0), F(-1)], F(0))]
    a = solve_lp([F(-1), F(-1)], rows)
    b = solve_lp([F(-1), F(-1)], rows)
    assert a.x == b.x and a.value == b.value == -2


def test_equality_via_two_rows():
    # x = 7 encoded as x <= 7 and -x <= -7
    res = solve_lp([F(3)], [([F(1)], F(7)), ([F(-1)], F(-7))])
    assert res.status is LPStatus.OPTIMAL and res.value == 21
