"""Bounded-variable simplex against an established LP solver."""

import numpy as np
import pytest
from scipy.optimize import linprog

from setdecode.lp import LpError, solve_lp


def test_unconstrained_box_maximum():
    res = solve_lp(np.zeros((0, 3)), np.zeros(0), np.array([1.0, -2.0, 0.0]),
                   np.zeros(3), np.ones(3))
    assert res.status == "optimal"
    assert abs(res.value - 1.0) < 1e-12
    assert res.x[0] == 1.0 and res.x[1] == 0.0


def test_single_row_geometry():
    # max x + y subject to x + y <= 0.5 inside the unit box
    res = solve_lp(np.array([[1.0, 1.0]]), np.array([0.5]),
                   np.array([1.0, 1.0]), np.zeros(2), np.ones(2))
    assert abs(res.value - 0.5) < 1e-12


def test_infeasible_detected():
    res = solve_lp(np.array([[1.0]]), np.array([-2.0]),
                   np.array([1.0]), np.zeros(1), np.ones(1))
    assert res.status == "infeasible"


def test_fixed_variables_respected():
    res = solve_lp(np.zeros((0, 2)), np.zeros(0), np.array([3.0, 5.0]),
                   np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    assert res.status == "optimal" and abs(res.value - 3.0) < 1e-12


def test_crossed_bounds_are_infeasible():
    res = solve_lp(np.zeros((0, 1)), np.zeros(0), np.array([1.0]),
                   np.array([1.0]), np.array([0.0]))
    assert res.status == "infeasible"


def test_iteration_limit_raises():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(8, 6))
    b = rng.normal(size=8) + 2
    with pytest.raises(LpError, match="iteration limit"):
        solve_lp(A, b, rng.normal(size=6), np.zeros(6), np.ones(6),
                 max_iter=1)


def test_matches_reference_solver_randomized():
    rng = np.random.default_rng(0)
    for trial in range(400):
        m = rng.integers(0, 12)
        n = rng.integers(1, 10)
        A = np.round(rng.normal(size=(m, n)) * 2)
        b = np.round(rng.normal(size=m) * 2 + 1)
        c = np.round(rng.normal(size=n) * 3)
        lo = np.zeros(n)
        hi = np.ones(n)
        for j in range(n):
            r = rng.random()
            if r < 0.15:
                lo[j] = hi[j] = 1.0
            elif r < 0.3:
                lo[j] = hi[j] = 0.0
            elif r < 0.4:
                hi[j] = 0.5
        res = solve_lp(A, b, c, lo, hi)
        ref = linprog(-c, A_ub=A if m else None, b_ub=b if m else None,
                      bounds=list(zip(lo, hi)), method="highs")
        if res.status == "infeasible":
            assert not ref.success, f"trial {trial}: reference found a point"
        else:
            assert ref.success, f"trial {trial}: reference infeasible"
            assert abs(res.value - (-ref.fun)) < 1e-7, f"trial {trial}"
            if m:
                assert (A @ res.x <= b + 1e-7).all(), f"trial {trial}"
            assert (res.x >= lo - 1e-9).all() and (res.x <= hi + 1e-9).all()
