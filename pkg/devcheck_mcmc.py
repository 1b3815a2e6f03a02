"""Cross-check mcmc against replay references and enumeration."""
import itertools
import math
import os
import subprocess
import sys

import numpy as np

from setdecode import model
from setdecode.mcmc import (AUDIT_INTERVAL, ChainState, audit_state,
                            propose_and_apply_swap, run_chain)
from setdecode.model import ModelParams, objective_coefficients
from setdecode.system import build_system

rng = np.random.default_rng(7)

s3 = build_system({"w1": ["p1", "p2"], "w2": ["p2", "p3"],
                   "w3": ["p1", "p2", "p3"]})
params = ModelParams(alpha=0.1, gamma=0.9, pi=0.25, lam=5.0)
x = np.array([1, 1, 0], dtype=np.uint8)
c = objective_coefficients(params)

# anchor: all-zero, flip w1 on
st = ChainState.from_scratch(s3, x)
ok, st = propose_and_apply_swap(st, 0, x, params)
assert ok
assert abs(st.last_delta - math.log(27)) < 1e-12, st.last_delta
audit_state(st)

# anchor: z=(1,1,0) flip w3 on removes the violation: delta = c1 + lam
st = ChainState.from_scratch(s3, x, z=[1, 1, 0])
assert st.violation_count == 1
ok, st = propose_and_apply_swap(st, 2, x, params)
assert ok and st.violation_count == 0
assert abs(st.last_delta - (c.c1 + 5.0)) < 1e-12, st.last_delta
audit_state(st)

# involution: forced accept then forced accept restores exactly
def snapshot(s):
    return (s.z.copy(), s.a.copy(), s.n_active_wholes_per_part.copy(),
            s.n_active_parts_per_whole.copy(), s.violation_count, s.sum_z,
            s.listed_active, s.unlisted_active, s.listed_inactive,
            s.unlisted_inactive)

for trial in range(200):
    n_parts = int(rng.integers(2, 9))
    n_wholes = int(rng.integers(2, 7))
    raw = {f"w{w}": [f"p{m}" for m in rng.choice(
        n_parts, size=int(rng.integers(1, n_parts + 1)), replace=False)]
        for w in range(n_wholes)}
    system = build_system(raw)
    xx = rng.integers(0, 2, size=system.n_parts).astype(np.uint8)
    z0 = rng.integers(0, 2, size=system.n_wholes).astype(np.uint8)
    state = ChainState.from_scratch(system, xx, z=z0)
    before = snapshot(state)
    w = int(rng.integers(system.n_wholes))
    propose_and_apply_swap(state, w, xx, params)
    d1 = state.last_delta
    audit_state(state)
    propose_and_apply_swap(state, w, xx, params)
    after = snapshot(state)
    assert abs(d1 + state.last_delta) < 1e-12
    for bb, aa in zip(before, after):
        assert np.array_equal(bb, aa)
    # rejected proposal leaves the state untouched
    propose_and_apply_swap(state, w, xx, params, u=1.0 - 1e-12)
    if state.last_delta < 0:
        for bb, aa in zip(before, snapshot(state)):
            assert np.array_equal(bb, aa)

print("swap anchors and involution ok")

# kernel vs replay through propose_and_apply_swap, identical uniforms
def replay(system, xx, params, sweeps, burn_in, seed, mode):
    lam = params.lam if mode == "constrained" else 0.0
    W = system.n_wholes
    gen = np.random.default_rng(seed)
    state = ChainState.from_scratch(system, xx)
    kept = 0
    acc = np.zeros(W, dtype=np.int64)
    n_acc = 0
    done = 0
    while done < sweeps:
        m = min(AUDIT_INTERVAL, sweeps - done)
        u = gen.random((m, 2))
        for i in range(m):
            w = min(int(u[i, 0] * W), W - 1)
            ok, state = propose_and_apply_swap(state, w, xx, params,
                                               u=u[i, 1], lam=lam)
            n_acc += ok
            sweep = done + i + 1
            if sweep > burn_in and (mode == "unconstrained"
                                    or state.violation_count == 0):
                kept += 1
                acc += state.z
        done += m
    return state, acc, kept, n_acc

for trial in range(12):
    n_parts = int(rng.integers(3, 10))
    n_wholes = int(rng.integers(2, 9))
    raw = {f"w{w}": [f"p{m}" for m in rng.choice(
        n_parts, size=int(rng.integers(1, n_parts + 1)), replace=False)]
        for w in range(n_wholes)}
    system = build_system(raw)
    xx = rng.integers(0, 2, size=system.n_parts).astype(np.uint8)
    mode = "constrained" if trial % 2 == 0 else "unconstrained"
    sweeps, burn_in, seed = 30_000, 5_000, 1000 + trial
    summ = run_chain(system, xx, params, sweeps, burn_in, seed, mode=mode)
    state, acc, kept, n_acc = replay(system, xx, params, sweeps, burn_in,
                                     seed, mode)
    assert kept == summ.kept_count, (kept, summ.kept_count)
    assert abs(n_acc / sweeps - summ.acceptance_rate) < 1e-15
    ref = acc / kept
    assert np.max(np.abs(ref - summ.marginals)) < 1e-15, \
        (ref, summ.marginals)
print("kernel matches replay reference")

# enumeration agreement on S3 and the single-whole closed form
def enum_marginals(system, xx, params, constrained):
    logw = []
    states = []
    for bits in itertools.product((0, 1), repeat=system.n_wholes):
        z = np.array(bits, dtype=np.uint8)
        if constrained and not model.satisfies_ah(z, system):
            continue
        a = model.induced_activities(z, system)
        logw.append(model.log_posterior(z, a, xx, params))
        states.append(z)
    logw = np.array(logw)
    wgt = np.exp(logw - logw.max())
    wgt /= wgt.sum()
    return np.sum(np.array(states) * wgt[:, None], axis=0)

summ = run_chain(s3, x, params, 1_000_000, 100_000, 123)
exact = enum_marginals(s3, x, params, True)
assert np.allclose(exact, [82 / 86, 2 / 86, 1 / 86], atol=1e-12)
assert np.max(np.abs(summ.marginals - exact)) < 0.01, summ.marginals
assert 0 < summ.kept_fraction <= 1

s1 = build_system({"w1": ["p1"]})
x1 = np.array([1], dtype=np.uint8)
closed = params.pi * params.gamma / (
    params.pi * params.gamma + (1 - params.pi) * params.alpha)
for mode in ("constrained", "unconstrained"):
    summ1 = run_chain(s1, x1, params, 1_000_000, 100_000, 5, mode=mode)
    assert abs(summ1.marginals[0] - closed) < 0.01, (mode, summ1.marginals)

# weighted proposal keeps the stationary law
summw = run_chain(s3, x, params, 1_000_000, 100_000, 42,
                  proposal_weights=[2.0, 1.0, 1.0])
assert np.max(np.abs(summw.marginals - exact)) < 0.01, summw.marginals

# unconstrained mode targets the unpenalized law
summu = run_chain(s3, x, params, 1_000_000, 100_000, 77,
                  mode="unconstrained")
exact_u = enum_marginals(s3, x, params, False)
assert np.max(np.abs(summu.marginals - exact_u)) < 0.01

# seed determinism
a1 = run_chain(s3, x, params, 200_000, 10_000, 99)
a2 = run_chain(s3, x, params, 200_000, 10_000, 99)
assert np.array_equal(a1.marginals, a2.marginals)
assert a1.lag1_autocorr == a2.lag1_autocorr
print("stationary-law checks ok")

# backend bit-identity via subprocess on the numpy path
code = """
import numpy as np
from setdecode.mcmc import run_chain
from setdecode.model import ModelParams
from setdecode.system import build_system
s3 = build_system({"w1": ["p1", "p2"], "w2": ["p2", "p3"],
                   "w3": ["p1", "p2", "p3"]})
x = np.array([1, 1, 0], dtype=np.uint8)
p = ModelParams(alpha=0.1, gamma=0.9, pi=0.25, lam=5.0)
s = run_chain(s3, x, p, 150_000, 10_000, 424242)
print(repr(s.marginals.tolist()), s.kept_count, s.acceptance_rate)
"""
outs = []
for flag in ("1", "0"):
    env = dict(os.environ, SETDECODE_NUMBA=flag)
    r = subprocess.run([sys.executable, "-c", code], env=env,
                       capture_output=True, text=True, cwd="/root/pkg")
    assert r.returncode == 0, r.stderr
    outs.append(r.stdout)
assert outs[0] == outs[1], outs
print("backends bit-identical")
print("done, all mcmc checks passed")
