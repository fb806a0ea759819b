import numpy as np
import pytest
from scipy.optimize import linprog

from mqrank.solvers.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, linprog_dense


def highs(c, A_ub, b_ub, A_eq=None, b_eq=None):
    return linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")


class TestSmall:
    def test_textbook(self):
        # max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        res = linprog_dense([-3, -5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
        assert res.status == OPTIMAL
        np.testing.assert_allclose(res.x, [2, 6], atol=1e-12)
        assert abs(res.fun + 36) < 1e-12

    def test_equality_and_negative_rhs(self):
        # min x + y s.t. x + y = 1, -x <= -0.25
        res = linprog_dense([1, 2], [[-1, 0]], [-0.25], [[1, 1]], [1])
        assert res.status == OPTIMAL
        np.testing.assert_allclose(res.x, [1, 0], atol=1e-12)

    def test_infeasible(self):
        assert linprog_dense([1], [[1]], [-1]).status == INFEASIBLE
        assert linprog_dense([1, 1], None, None, [[1, 1], [1, 1]], [1, 2]).status == INFEASIBLE

    def test_unbounded(self):
        assert linprog_dense([-1, 0], [[0, 1]], [1]).status == UNBOUNDED

    def test_redundant_equalities(self):
        res = linprog_dense([1, 2], None, None, [[1, 1], [2, 2]], [1, 2])
        assert res.status == OPTIMAL
        np.testing.assert_allclose(res.x, [1, 0], atol=1e-12)

    def test_bad_rule(self):
        with pytest.raises(ValueError):
            linprog_dense([1], rule="steepest")


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_matches_highs_on_random_lps(rule):
    rng = np.random.default_rng(4)
    for _ in range(150):
        m, n = rng.integers(2, 12, size=2)
        A = rng.normal(size=(m, n))
        x0 = rng.random(n)
        b = A @ x0 + rng.random(m) * rng.integers(0, 2)
        c = rng.normal(size=n)
        A_eq = np.ones((1, n)) if rng.random() < 0.5 else None
        b_eq = [x0.sum()] if A_eq is not None else None
        ref = highs(c, A, b, A_eq, b_eq)
        res = linprog_dense(c, A, b, A_eq, b_eq, rule=rule)
        if ref.status == 0:
            assert res.status == OPTIMAL
            assert abs(res.fun - ref.fun) <= 1e-7 * max(1, abs(ref.fun))
            assert (A @ res.x <= b + 1e-7).all()
        else:
            # x0 is feasible by construction, so any other outcome is unboundedness
            # (HiGHS presolve sometimes labels such problems infeasible)
            assert res.status == UNBOUNDED


def test_degenerate_big_m_relaxations():
    """Heavily degenerate systems of the shape used by branch and bound."""
    rng = np.random.default_rng(5)
    for _ in range(60):
        J, F = 2 + int(rng.integers(0, 2)), int(rng.integers(3, 15))
        rows = []
        for f in range(F):
            for _ in range(int(rng.integers(1, 4))):
                coef = np.round(rng.normal(size=J), 1)
                row = np.zeros(J + F)
                row[:J] = coef
                row[J + f] = -max(np.abs(coef).max(), 0.1)
                rows.append(row)
        A = np.array(rows)
        A /= np.abs(A).max(axis=1, keepdims=True)
        c = np.concatenate([np.zeros(J), np.ones(F)])
        A_eq = np.concatenate([np.ones(J), np.zeros(F)])[None, :]
        ref = highs(c, A, np.zeros(A.shape[0]), A_eq, [1])
        res = linprog_dense(c, A, np.zeros(A.shape[0]), A_eq, [1])
        assert res.status == OPTIMAL
        assert abs(res.fun - ref.fun) < 1e-7
