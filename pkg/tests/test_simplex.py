import numpy as np
import pytest
from scipy.optimize import linprog

from weakctx.errors import LPError
from weakctx.simplex import linprog_max


class TestSmallProblems:
    def test_textbook(self):
        # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        r = linprog_max([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
        assert r.objective == pytest.approx(36.0)
        np.testing.assert_allclose(r.x, [2.0, 6.0], atol=1e-12)

    def test_beale_cycling_example(self):
        # cycles under the largest-coefficient rule; Bland's rule must terminate
        c = [0.75, -20.0, 0.5, -6.0]
        A = [[0.25, -8.0, -1.0, 9.0], [0.5, -12.0, -0.5, 3.0], [0.0, 0.0, 1.0, 0.0]]
        r = linprog_max(c, A, [0.0, 0.0, 1.0])
        assert r.objective == pytest.approx(1.25)

    def test_equality_and_negative_rhs(self):
        # x + y = 1, x >= 0.3 written as -x <= -0.3; max y
        r = linprog_max([0, 1], [[-1, 0]], [-0.3], [[1, 1]], [1])
        assert r.objective == pytest.approx(0.7)

    def test_redundant_equalities(self):
        r = linprog_max([1, 1], A_eq=[[1, 1], [2, 2]], b_eq=[1, 2])
        assert r.objective == pytest.approx(1.0)

    def test_infeasible(self):
        with pytest.raises(LPError, match="infeasible"):
            linprog_max([1, 0], A_eq=[[1, 1]], b_eq=[-1])

    def test_unbounded(self):
        with pytest.raises(LPError, match="unbounded"):
            linprog_max([1, 1], [[1, -1]], [1])

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        A = rng.random((6, 9))
        c = rng.normal(size=9)
        r1 = linprog_max(c, A, np.ones(6))
        r2 = linprog_max(c, A, np.ones(6))
        assert r1.iterations == r2.iterations
        np.testing.assert_array_equal(r1.x, r2.x)


def test_random_against_highs():
    """HiGHS (via scipy) is the independent oracle."""
    rng = np.random.default_rng(2024)
    solved = 0
    for _ in range(300):
        n = int(rng.integers(2, 12))
        m_ub = int(rng.integers(1, 10))
        m_eq = int(rng.integers(0, 3))
        A = np.vstack([rng.normal(size=(m_ub, n)), np.ones((1, n))])
        b = np.append(rng.normal(size=m_ub) + 1.0, 10.0)
        A_eq = rng.normal(size=(m_eq, n))
        b_eq = A_eq @ rng.random(n)
        c = rng.normal(size=n)
        ref = linprog(-c, A, b, A_eq if m_eq else None, b_eq if m_eq else None, method="highs")
        if ref.status == 2:
            with pytest.raises(LPError):
                linprog_max(c, A, b, A_eq if m_eq else None, b_eq if m_eq else None)
            continue
        assert ref.status == 0
        r = linprog_max(c, A, b, A_eq if m_eq else None, b_eq if m_eq else None)
        assert r.objective == pytest.approx(-ref.fun, abs=1e-7)
        assert np.all(r.x >= -1e-9)
        assert np.all(A @ r.x <= b + 1e-8)
        solved += 1
    assert solved > 100
