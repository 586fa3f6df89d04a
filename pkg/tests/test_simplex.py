import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mmiboost.errors import DataError, LPIterationLimitError
from mmiboost.simplex import (INFEASIBLE, OPTIMAL, UNBOUNDED, LinearProgram, make_lp,
                              solve_lp)
from oracles import lp_oracle, random_lp


def _check_feasible(lp, x, tol=1e-9):
    assert np.all(x >= -1e-12)
    ax = lp.A @ x
    for val, rel, b in zip(ax, lp.relations, lp.rhs):
        if rel == ">=":
            assert val >= b - tol
        elif rel == "<=":
            assert val <= b + tol
        else:
            assert abs(val - b) <= tol


def test_vertex_example():
    sol = solve_lp(make_lp([1, 0], [[1, 1]], ["="], [1]))
    assert sol.status == OPTIMAL
    np.testing.assert_allclose(sol.x, [1, 0])
    assert sol.objective_value == pytest.approx(1.0)


def test_infeasible_example():
    sol = solve_lp(make_lp([1, 0], [[1, 0], [1, 1]], [">=", "="], [2, 1]))
    assert sol.status == INFEASIBLE and sol.x is None


def test_unbounded_example():
    sol = solve_lp(make_lp([1, 1], [[1, -1]], ["<="], [1]))
    assert sol.status == UNBOUNDED


def test_textbook_example():
    # max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18: optimum (2, 6) value 36
    sol = solve_lp(make_lp([3, 5], [[1, 0], [0, 2], [3, 2]], ["<="] * 3, [4, 12, 18]))
    np.testing.assert_allclose(sol.x, [2, 6], atol=1e-12)
    assert sol.objective_value == pytest.approx(36.0)


def test_negative_rhs_and_ge_rows():
    # min x + y (as max of the negation) st x + 2y >= 4, -x + y <= -1
    lp = make_lp([-1, -1], [[1, 2], [-1, 1]], [">=", "<="], [4, -1])
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert sol.objective_value == pytest.approx(lp_oracle(lp.objective, lp.A, lp.relations,
                                                          lp.rhs)[1])
    _check_feasible(lp, sol.x)


def test_beale_cycling_example_terminates():
    # a classic program on which the largest-coefficient rule cycles
    c = [0.75, -20, 0.5, -6]
    A = [[0.25, -8, -1, 9], [0.5, -12, -0.5, 3], [0, 0, 1, 0]]
    sol = solve_lp(make_lp(c, A, ["<="] * 3, [0, 0, 1]))
    assert sol.status == OPTIMAL
    assert sol.objective_value == pytest.approx(1.25)


def test_redundant_equalities():
    lp = make_lp([1, 2, 0], [[1, 1, 1], [2, 2, 2], [1, 0, 0]], ["=", "=", "<="], [1, 2, 0.5])
    sol = solve_lp(lp)
    assert sol.status == OPTIMAL
    assert sol.objective_value == pytest.approx(2.0)
    _check_feasible(lp, sol.x)


@given(st.integers(0, 2 ** 32 - 1))
def test_matches_vertex_enumeration(seed):
    c, A, rel, b = random_lp(np.random.default_rng(seed))
    lp = make_lp(c, A, rel, b)
    sol = solve_lp(lp)
    status, value = lp_oracle(c, A, rel, b)
    assert sol.status == status
    if status == OPTIMAL:
        assert sol.objective_value == pytest.approx(value, abs=1e-9)
        _check_feasible(lp, sol.x)


def test_matches_vertex_enumeration_fixed_batch():
    statuses = set()
    for seed in range(300):
        c, A, rel, b = random_lp(np.random.default_rng(10_000 + seed))
        sol = solve_lp(make_lp(c, A, rel, b))
        status, value = lp_oracle(c, A, rel, b)
        assert sol.status == status, seed
        if status == OPTIMAL:
            assert sol.objective_value == pytest.approx(value, abs=1e-9), seed
        statuses.add(status)
    assert statuses == {OPTIMAL, INFEASIBLE, UNBOUNDED}


def test_iteration_cap_is_distinct_from_unbounded():
    lp = make_lp([3, 5], [[1, 0], [0, 2], [3, 2]], ["<="] * 3, [4, 12, 18])
    with pytest.raises(LPIterationLimitError):
        solve_lp(lp, max_iter=1)


def test_relation_aliases_and_validation():
    lp = make_lp([1], [[1]], ["≤"], [2])
    assert lp.relations == ("<=",)
    assert make_lp([1], [[1]], ["=="], [2]).relations == ("=",)
    with pytest.raises(DataError):
        make_lp([1], [[1]], ["<"], [2])
    with pytest.raises(DataError):
        make_lp([1, 2], [[1]], ["<="], [2])
    with pytest.raises(DataError):
        make_lp([1], [[np.inf]], ["<="], [2])


def test_dump_format():
    lp = LinearProgram(np.array([0.0, 1.0]), np.array([[1.0, -1.0], [1.0, 1.0]]),
                       (">=", "="), np.array([0.5, 1.0]))
    assert lp.dump() == "2 2\n0.0 1.0\n1.0 -1.0 >= 0.5\n1.0 1.0 = 1.0\n"
