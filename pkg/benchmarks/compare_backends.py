"""Time the compiled kernels against the pure-numpy fallback.

The backend is chosen at import time from the SETDECODE_NUMBA
environment variable, so each timing runs in a fresh subprocess.

Usage: python3 benchmarks/compare_backends.py [--heavy] [--repeats N]

--heavy adds a high-overlap MAP solve (tens of seconds per backend).
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, os, sys, time
import numpy as np

import setdecode as sd
from setdecode._backend import BACKEND

t_import = time.time()
results = {"backend": BACKEND}

def bench(name, fn, repeats):
    fn()  # warm-up: first call pays any compilation cost
    best = min(_timed(fn) for _ in range(repeats))
    results[name] = best

def _timed(fn):
    t0 = time.time()
    fn()
    return time.time() - t0

heavy, repeats = json.loads(sys.argv[1])

system = sd.build_experiment1(7)
params = sd.ModelParams(alpha=0.1, gamma=0.9, pi=0.073, lam=5.0)
z = sd.sample_truth(system, 0.073, seed=11)
obs = sd.sample_gene_list(system, z, 0.1, 0.9, seed=12)

bench("mcmc_1e6_sweeps",
      lambda: sd.run_chain(system, obs, params, sweeps=1_000_000,
                           burn_in=100_000, seed=3), repeats)
bench("map_low_overlap", lambda: sd.solve_map(system, obs, params), repeats)

rng = np.random.default_rng(5)
raw = {f"w{i}": [f"p{j}" for j in rng.choice(60, size=12, replace=False)]
       for i in range(16)}
small = sd.build_system(raw)
xs = rng.integers(0, 2, size=small.n_parts).astype(np.uint8)
bench("enumerate_16_wholes",
      lambda: sd.enumerate_posterior(small, xs,
                                     sd.ModelParams(0.1, 0.9, 0.2)), repeats)

if heavy:
    s2 = sd.build_experiment2(7)
    p2 = sd.ModelParams(alpha=0.1, gamma=0.9, pi=10/105, lam=5.0)
    z2 = sd.sample_truth(s2, 10/105, seed=21, scheme="per_block",
                         block_ranges=sd.EXP2_PARENT_RANGES)
    o2 = sd.sample_gene_list(s2, z2, 0.1, 0.9, seed=22)
    bench("map_high_overlap", lambda: sd.solve_map(s2, o2, p2), 1)

print(json.dumps(results))
"""


def run_backend(numba_on: bool, heavy: bool, repeats: int) -> dict:
    env = dict(os.environ, SETDECODE_NUMBA="1" if numba_on else "0")
    out = subprocess.run(
        [sys.executable, "-c", CHILD, json.dumps([heavy, repeats])],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--heavy", action="store_true")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    rows = [run_backend(True, args.heavy, args.repeats),
            run_backend(False, args.heavy, args.repeats)]
    tasks = [k for k in rows[0] if k != "backend"]
    width = max(len(t) for t in tasks)
    print(f"{'task'.ljust(width)}  {rows[0]['backend']:>10} "
          f"{rows[1]['backend']:>10}  speedup")
    for t in tasks:
        a, b = rows[0][t], rows[1][t]
        print(f"{t.ljust(width)}  {a:>9.3f}s {b:>9.3f}s  {b / a:>6.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
