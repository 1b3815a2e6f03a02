"""Branch-and-bound binary solver against exhaustive enumeration."""

import itertools

import numpy as np
import pytest

from setdecode.ilp import IlpProblem, NodeLimitError, solve_binary


def brute_force(problem):
    """Best objective over all feasible binary points, or None."""
    best = None
    for bits in itertools.product((0, 1), repeat=problem.n_vars):
        x = np.array(bits, dtype=np.float64)
        if any(x[j] != v for j, v in problem.fixed.items()):
            continue
        if any(np.dot(coef, x[idx]) > bound + 1e-9
               for idx, coef, bound in problem.rows):
            continue
        val = float(problem.objective @ x)
        if best is None or val > best:
            best = val
    return best


def random_problem(rng):
    n = int(rng.integers(1, 13))
    m = int(rng.integers(0, 10))
    rows = []
    for _ in range(m):
        k = int(rng.integers(1, n + 1))
        idx = rng.choice(n, size=k, replace=False)
        coef = rng.integers(-3, 4, size=k).astype(float)
        bound = float(rng.integers(-2, 5))
        rows.append((np.sort(idx), coef[np.argsort(idx)], bound))
    c = rng.integers(-5, 6, size=n).astype(float)
    fixed = {}
    if rng.random() < 0.3 and n > 1:
        fixed[int(rng.integers(0, n))] = int(rng.integers(0, 2))
    return IlpProblem(n, c, rows, fixed)


def test_matches_enumeration_randomized():
    rng = np.random.default_rng(1)
    for trial in range(300):
        prob = random_problem(rng)
        best = brute_force(prob)
        sol = solve_binary(prob)
        if best is None:
            assert sol.status == "infeasible", f"trial {trial}"
        else:
            assert sol.status == "optimal", f"trial {trial}"
            assert abs(sol.value - best) < 1e-9, f"trial {trial}"
            # reported assignment actually attains the value
            x = sol.assignment
            assert set(np.unique(x)) <= {0.0, 1.0}
            assert abs(float(prob.objective @ x) - best) < 1e-9
            for idx, coef, bound in prob.rows:
                assert np.dot(coef, x[idx]) <= bound + 1e-7


def test_lazy_rows_reach_the_same_optimum():
    rng = np.random.default_rng(2)
    for _ in range(60):
        prob = random_problem(rng)
        full = solve_binary(prob)
        if not prob.rows:
            continue
        lazy_mask = rng.random(len(prob.rows)) < 0.7
        lazy = solve_binary(prob, lazy_rows=lazy_mask)
        assert lazy.status == full.status
        if full.status == "optimal":
            assert abs(lazy.value - full.value) < 1e-9


def test_warm_assignment_is_speed_only():
    prob = IlpProblem(3, np.array([1.0, 2.0, 3.0]),
                      [(np.array([0, 1, 2]), np.ones(3), 2.0)])
    warm = np.array([1.0, 1.0, 0.0])
    sol = solve_binary(prob, warm_assignment=warm)
    assert sol.status == "optimal" and abs(sol.value - 5.0) < 1e-12
    # an infeasible warm start must be rejected, not silently used
    with pytest.raises(ValueError):
        solve_binary(prob, warm_assignment=np.ones(3))


def test_fixed_variable_conflicts_are_infeasible():
    prob = IlpProblem(2, np.array([1.0, 1.0]),
                      [(np.array([0]), np.array([1.0]), 0.0)],
                      fixed={0: 1})
    assert solve_binary(prob).status == "infeasible"


def test_node_limit_raises():
    rng = np.random.default_rng(3)
    n = 16
    c = rng.integers(3, 9, size=n).astype(float)
    w = rng.integers(2, 7, size=n).astype(float)
    prob = IlpProblem(n, c, [(np.arange(n), w, float(w.sum()) / 2)])
    # a zero budget admits not even the root node
    with pytest.raises(NodeLimitError):
        solve_binary(prob, node_limit=0)


def test_problem_validation():
    with pytest.raises(ValueError):
        IlpProblem(2, np.ones(3), [])
    with pytest.raises(ValueError):
        IlpProblem(2, np.ones(2), [(np.array([5]), np.array([1.0]), 0.0)])
    with pytest.raises(ValueError):
        IlpProblem(2, np.ones(2), [], fixed={0: 2})


def test_dump_round_readable():
    prob = IlpProblem(2, np.array([1.0, -1.0]),
                      [(np.array([0, 1]), np.array([1.0, 1.0]), 1.0)],
                      fixed={1: 0})
    text = prob.dump()
    assert "max" in text and "<= 1" in text and "fix x1 = 0" in text
