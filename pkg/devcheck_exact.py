"""Cross-check exact.py against independent brute-force references."""
import itertools
import math

import numpy as np

from setdecode import model
from setdecode.exact import (ah_prior_probability, conjecture_gap,
                             enumerate_posterior, expected_violations,
                             violation_grid)
from setdecode.model import ModelParams
from setdecode.system import build_system

rng = np.random.default_rng(31)

s3 = build_system({"w1": ["p1", "p2"], "w2": ["p2", "p3"],
                   "w3": ["p1", "p2", "p3"]})
params = ModelParams(alpha=0.1, gamma=0.9, pi=0.25)
x = np.array([1, 1, 0], dtype=np.uint8)

# S3 anchors
post = enumerate_posterior(s3, x, params, constrained=True)
assert post.codes.size == 4
assert np.allclose(post.marginals, [82 / 86, 2 / 86, 1 / 86], atol=1e-12)
assert post.map_z.tolist() == [1, 0, 0]
w = np.exp(post.log_weights - post.log_weights.max())
ratios = sorted(w / w.min())
assert np.allclose(ratios, [1, 1, 3, 81]), ratios

ah = ah_prior_probability(s3, 0.5)
assert abs(ah.probability - 0.5) < 1e-15 and abs(ah.rho - 2.0) < 1e-12
mc = ah_prior_probability(s3, 0.5, method="monte_carlo", n=100_000, seed=3)
assert abs(mc.probability - 0.5) <= 3 * mc.se + 1e-12

ev = expected_violations(s3, 0.5, method="exact_per_whole")
assert abs(ev.total - 0.625) < 1e-15, ev.total
assert np.allclose(ev.per_whole, [0.25, 0.25, 0.125], atol=1e-15)
ev2 = expected_violations(s3, 0.5, method="enumerate")
assert abs(ev2.total - 0.625) < 1e-15
evm = expected_violations(s3, 0.5, method="monte_carlo", n=200_000, seed=9)
assert abs(evm.total - 0.625) <= 3 * evm.se_total

# disjoint wholes: P(AH)=1, expected violations 0
sd = build_system({"a": ["p1", "p2"], "b": ["p3"], "c": ["p4", "p5"]})
assert ah_prior_probability(sd, 0.3).probability == 1.0
assert expected_violations(sd, 0.3).total == 0.0
assert expected_violations(sd, 0.3, method="enumerate").total == 0.0

# single-whole unconstrained closed form
s1 = build_system({"w1": ["p1"]})
p1 = enumerate_posterior(s1, [1], params, constrained=False)
closed = params.pi * params.gamma / (
    params.pi * params.gamma + (1 - params.pi) * params.alpha)
assert abs(p1.marginals[0] - closed) < 1e-12

# cap refusal
try:
    big = build_system({f"w{i}": [f"p{i}"] for i in range(21)})
    enumerate_posterior(big, np.zeros(21, dtype=np.uint8), params)
    raise SystemExit("expected cap refusal")
except ValueError:
    pass

print("anchors ok")


def brute_posterior(system, xx, pp, constrained):
    rows = []
    for bits in itertools.product((0, 1), repeat=system.n_wholes):
        z = np.array(bits, dtype=np.uint8)
        if constrained and not model.satisfies_ah(z, system):
            continue
        a = model.induced_activities(z, system)
        rows.append((z, model.log_posterior(z, a, xx, pp)))
    logw = np.array([r[1] for r in rows])
    states = np.array([r[0] for r in rows])
    wgt = np.exp(logw - logw.max())
    marg = (states * wgt[:, None]).sum(axis=0) / wgt.sum()
    return states, logw, marg


def brute_expected_viol(system, pi):
    total = 0.0
    per = np.zeros(system.n_wholes)
    for bits in itertools.product((0, 1), repeat=system.n_wholes):
        z = np.array(bits, dtype=np.uint8)
        pr = (pi ** z.sum()) * ((1 - pi) ** (system.n_wholes - z.sum()))
        v = model.violations(z, system)
        per += pr * v
        total += pr * v.sum()
    return total, per


mismatch = 0
for it in range(150):
    n_parts = int(rng.integers(2, 10))
    n_wholes = int(rng.integers(1, 9))
    raw = {f"w{w}": [f"p{m}" for m in rng.choice(
        n_parts, size=int(rng.integers(1, n_parts + 1)), replace=False)]
        for w in range(n_wholes)}
    system = build_system(raw)
    xx = rng.integers(0, 2, size=system.n_parts).astype(np.uint8)
    alpha = float(rng.uniform(0.02, 0.4))
    gamma = float(rng.uniform(alpha + 0.1, 0.98))
    pi = float(rng.uniform(0.05, 0.9))
    pp = ModelParams(alpha=alpha, gamma=gamma, pi=pi)

    for constrained in (True, False):
        post = enumerate_posterior(system, xx, pp, constrained=constrained)
        states, logw, marg = brute_posterior(system, xx, pp, constrained)
        if not np.allclose(post.marginals, marg, atol=1e-10):
            mismatch += 1
            print(f"[{it}] marginals {constrained}: {post.marginals} "
                  f"vs {marg}")
        best = logw.max()
        got_best = post.log_weights.max()
        if abs(best - got_best) > 1e-9:
            mismatch += 1
            print(f"[{it}] map value: {got_best} vs {best}")

    # constrained = filtered unconstrained
    pu = enumerate_posterior(system, xx, pp, constrained=False)
    pc = enumerate_posterior(system, xx, pp, constrained=True)
    x0 = np.zeros(system.n_parts, dtype=np.uint8)
    from setdecode.exact import _state_tables
    nviol, _, _ = _state_tables(system, x0)
    keep = nviol[pu.codes] == 0
    wgt = np.exp(pu.log_weights[keep] - pu.log_weights[keep].max())
    marg_f = np.zeros(system.n_wholes)
    for w in range(system.n_wholes):
        sel = ((pu.codes[keep] >> w) & 1) == 1
        marg_f[w] = wgt[sel].sum() / wgt.sum()
    assert np.allclose(marg_f, pc.marginals, atol=1e-10)

    bt, bper = brute_expected_viol(system, pi)
    for meth in ("exact_per_whole", "enumerate"):
        ev = expected_violations(system, pi, method=meth)
        if abs(ev.total - bt) > 1e-9 or not np.allclose(
                ev.per_whole, bper, atol=1e-9):
            mismatch += 1
            print(f"[{it}] {meth}: {ev.total} vs {bt}")

    ahx = ah_prior_probability(system, pi)
    brute_ah = 0.0
    for bits in itertools.product((0, 1), repeat=system.n_wholes):
        z = np.array(bits, dtype=np.uint8)
        if model.satisfies_ah(z, system):
            brute_ah += (pi ** z.sum()) * (
                (1 - pi) ** (system.n_wholes - z.sum()))
    if abs(ahx.probability - brute_ah) > 1e-12:
        mismatch += 1
        print(f"[{it}] ah prior: {ahx.probability} vs {brute_ah}")
    assert ahx.rho >= 1.0 - 1e-12

print("randomized cross-checks done, mismatches:", mismatch)

# neighbor-cap fallback flags mixed methods and stays near exact
raw = {f"w{i}": [f"p{(i + j) % 32}" for j in range(30)] for i in range(6)}
crowd = build_system(raw)
# every whole overlaps the other 5; force fallback with neighbor_cap=3
ev_exact = expected_violations(crowd, 0.3, neighbor_cap=25)
ev_mix = expected_violations(crowd, 0.3, neighbor_cap=3, n=400_000, seed=2)
assert not ev_exact.mixed and set(ev_exact.per_whole_method) == {"exact"}
assert set(ev_mix.per_whole_method) == {"monte_carlo"}
assert abs(ev_mix.total - ev_exact.total) <= 3 * ev_mix.se_total + 1e-9

g = conjecture_gap(s3, 0.5)
assert abs(g["neg_log_ah_prob"] - math.log(2)) < 1e-12
assert abs(g["expected_violations"] - 0.625) < 1e-12

rows = violation_grid([("s3", s3)], [0.1, 0.3, 0.5])
assert [r["pi"] for r in rows] == [0.1, 0.3, 0.5]
assert rows[-1]["expected_violations"] == 0.625

print("done, all exact checks passed")
