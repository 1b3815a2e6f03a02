"""Dev scratch: solve_binary vs brute force on random problems."""
import itertools

import numpy as np

from setdecode.ilp import IlpProblem, solve_binary

rng = np.random.default_rng(1)
bad = 0
for trial in range(300):
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
    prob = IlpProblem(n, c, rows, fixed)

    # brute force
    best = None
    for bits in itertools.product((0, 1), repeat=n):
        x = np.array(bits)
        if any(x[j] != v for j, v in fixed.items()):
            continue
        ok = all(np.dot(coef, x[idx]) <= bound + 1e-9
                 for idx, coef, bound in rows)
        if not ok:
            continue
        val = float(c @ x)
        if best is None or val > best:
            best = val

    sol = solve_binary(prob)
    if best is None:
        ok = sol.status == "infeasible"
    else:
        ok = (sol.status == "optimal" and abs(sol.value - best) < 1e-9)
    if not ok:
        bad += 1
        print("MISMATCH", trial, sol.status, sol.value, "brute", best)
        if bad > 3:
            break
print("done, mismatches:", bad)
