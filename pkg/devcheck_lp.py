"""Dev scratch: cross-check solve_lp against scipy.optimize.linprog."""
import numpy as np
from scipy.optimize import linprog

from setdecode.lp import solve_lp

rng = np.random.default_rng(0)
bad = 0
for trial in range(400):
    m = rng.integers(0, 12)
    n = rng.integers(1, 10)
    A = np.round(rng.normal(size=(m, n)) * 2)
    b = np.round(rng.normal(size=m) * 2 + 1)
    c = np.round(rng.normal(size=n) * 3)
    lo = np.zeros(n)
    hi = np.ones(n)
    # random fixes
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
        ok = not ref.success
    else:
        ok = ref.success and abs(res.value - (-ref.fun)) < 1e-7
        if ok:
            # feasibility of our x
            if m and (A @ res.x > b + 1e-7).any():
                ok = False
            if (res.x < lo - 1e-9).any() or (res.x > hi + 1e-9).any():
                ok = False
    if not ok:
        bad += 1
        print("MISMATCH trial", trial, res.status, res.value,
              "ref", ref.success, (-ref.fun if ref.success else None))
        if bad > 5:
            break
print("done, mismatches:", bad)
