"""Cross-check map_ilp against brute-force enumeration over AH states."""
import itertools
import math

import numpy as np

from setdecode import model
from setdecode.ilp import solve_binary
from setdecode.map_ilp import (build_ilp, shrink, solve_map,
                               solve_map_sequential, trim)
from setdecode.model import ModelParams
from setdecode.system import build_system

rng = np.random.default_rng(20250819)


def enumerate_best(system, x, params):
    best_v, best_zs = -np.inf, []
    for bits in itertools.product((0, 1), repeat=system.n_wholes):
        z = np.array(bits, dtype=np.uint8)
        if not model.satisfies_ah(z, system):
            continue
        a = model.induced_activities(z, system)
        v = model.linear_objective_value(z, a, x, params)
        if v > best_v + 1e-12:
            best_v, best_zs = v, [z]
        elif v > best_v - 1e-12:
            best_zs.append(z)
    return best_v, best_zs


def random_system(rng):
    n_parts = int(rng.integers(3, 11))
    n_wholes = int(rng.integers(2, 8))
    raw = {}
    for w in range(n_wholes):
        size = int(rng.integers(1, n_parts + 1))
        mem = rng.choice(n_parts, size=size, replace=False)
        raw[f"w{w}"] = [f"p{m}" for m in mem]
    return build_system(raw)


# --- S3 anchors ---
s3 = build_system({"w1": ["p1", "p2"], "w2": ["p2", "p3"],
                        "w3": ["p1", "p2", "p3"]})
params = ModelParams(alpha=0.1, gamma=0.9, pi=0.25)
x = np.array([1, 1, 0], dtype=np.uint8)

prob = build_ilp(s3, x, params)
assert prob.n_vars == 6
assert len(prob.rows) == 7 + 3 + 3, len(prob.rows)

sh = shrink(s3, np.zeros(3, dtype=np.uint8), params)
assert sh.system is None and len(sh.fixed_whole_ids) == 3 \
    and len(sh.fixed_part_ids) == 3

sh = shrink(s3, x, params)
assert sh.system is not None and sh.rounds == 0 \
    and not sh.fixed_whole_ids, "expected no shrinkage"

est = solve_map(s3, x, params)
assert est.z_hat.tolist() == [1, 0, 0], est.z_hat
assert est.coverage == 2 and est.mis_coverage == 0
assert abs(est.objective_value - math.log(27)) < 1e-9
assert est.active_wholes == ["w1"]
for combo in itertools.product([True, False], repeat=3):
    e2 = solve_map(s3, x, params, use_shrinking=combo[0],
                   collapse_parts=combo[1], lazy=combo[2])
    assert abs(e2.objective_value - est.objective_value) < 1e-9, combo
seq = solve_map_sequential(s3, x, params, n_start=2)
assert abs(seq.objective_value - est.objective_value) < 1e-9
assert seq.z_hat.tolist() == [1, 0, 0]

try:
    shrink(s3, x, ModelParams(alpha=0.1, gamma=0.9, pi=0.6))
    raise SystemExit("expected ValueError for pi >= 1/2")
except ValueError:
    pass

# trim: active parent+child, child unreported
s_tr = build_system({"big": ["a", "b", "c", "d"], "small": ["c", "d"]})
x_tr = np.array([1, 1, 0, 0], dtype=np.uint8)
z_tr = np.array([1, 1], dtype=np.uint8)
fake = solve_map(s_tr, x_tr, ModelParams(0.1, 0.9, 0.25))
fake.z_hat = z_tr
fake.active_wholes = ["big", "small"]
assert trim(fake, s_tr, x_tr) == ["big"]

# --- randomized cross-check ---
mismatch = 0
for it in range(400):
    system = random_system(rng)
    x = rng.integers(0, 2, size=system.n_parts).astype(np.uint8)
    alpha = float(rng.uniform(0.02, 0.4))
    gamma = float(rng.uniform(alpha + 0.1, 0.98))
    pi = float(rng.uniform(0.03, 0.47))
    params = ModelParams(alpha=alpha, gamma=gamma, pi=pi)

    best_v, best_zs = enumerate_best(system, x, params)

    for shrink_on, collapse, lazy in itertools.product([True, False],
                                                       repeat=3):
        est = solve_map(system, x, params, use_shrinking=shrink_on,
                        collapse_parts=collapse, lazy=lazy)
        if abs(est.objective_value - best_v) > 1e-7:
            mismatch += 1
            print(f"[{it}] solve_map shrink={shrink_on} collapse={collapse} "
                  f"lazy={lazy}: {est.objective_value} vs {best_v}")
        if len(best_zs) == 1 and not np.array_equal(est.z_hat, best_zs[0]):
            mismatch += 1
            print(f"[{it}] unique argmax disagrees: {est.z_hat} "
                  f"vs {best_zs[0]}")

    sizes = sorted(set(system.deg_wholes.tolist()))
    starts = {sizes[0], sizes[len(sizes) // 2], sizes[-1]}
    for ns in starts:
        seq = solve_map_sequential(system, x, params, n_start=ns)
        if abs(seq.objective_value - best_v) > 1e-7:
            mismatch += 1
            print(f"[{it}] sequential n_start={ns}: "
                  f"{seq.objective_value} vs {best_v}")
        assert model.satisfies_ah(seq.z_hat, system)

    # raw unshrunk full-variable problem solved directly
    if it % 10 == 0:
        prob = build_ilp(system, x, params)
        sol = solve_binary(prob)
        zf = sol.assignment[:system.n_wholes].astype(np.uint8)
        af = sol.assignment[system.n_wholes:].astype(np.uint8)
        assert model.satisfies_ah(zf, system)
        assert np.array_equal(af, model.induced_activities(zf, system))
        if abs(sol.value - best_v) > 1e-7:
            mismatch += 1
            print(f"[{it}] raw build_ilp: {sol.value} vs {best_v}")

print("done, mismatches:", mismatch)
