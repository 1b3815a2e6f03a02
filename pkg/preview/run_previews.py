"""Acceptance-preview benchmark runs, saved as JSON."""
import dataclasses
import json
import time

from setdecode.simulate import BenchmarkConfig, run_benchmark

for exp in (1, 2):
    t0 = time.time()
    cfg = BenchmarkConfig(experiment=exp, replicates=100, master_seed=20260819)
    rep = run_benchmark(cfg)
    out = dataclasses.asdict(rep)
    with open(f"/root/pkg/preview/exp{exp}_r100.json", "w") as fh:
        json.dump(out, fh, indent=1)
    print(f"exp{exp}: {time.time() - t0:.0f}s total", flush=True)
    for name, m in rep.methods.items():
        print(f"  {name}: {m}", flush=True)
