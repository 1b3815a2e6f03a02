"""Structure and determinism checks for the simulation module."""
import numpy as np

from setdecode import model
from setdecode.simulate import (EXP2_CHILDREN, EXP2_PARENT_RANGES,
                                BenchmarkConfig, build_experiment1,
                                build_experiment2, evaluate, run_benchmark,
                                sample_gene_list, sample_truth)
from setdecode.system import build_system

# layout 1 structure
s1 = build_experiment1(7)
assert s1.n_wholes == 100 and s1.n_parts <= 300
assert all(s1.deg_wholes[:50] == 5) and all(s1.deg_wholes[50:] == 10)
assert build_experiment1(7).wholes == s1.wholes
assert np.array_equal(build_experiment1(7).wp_indices, s1.wp_indices)
assert not np.array_equal(build_experiment1(8).wp_indices, s1.wp_indices)

# layout 2 structure
s2 = build_experiment2(11)
assert s2.n_wholes == 105 and s2.n_parts <= 300
cores = []
for b, ((lo, hi), ch) in enumerate(zip(EXP2_PARENT_RANGES, EXP2_CHILDREN)):
    parents = [set(s2.members(w).tolist()) for w in range(lo, hi)]
    core = set.intersection(*parents)
    assert len(core) == 15, len(core)
    child = set(s2.members(ch).tolist())
    assert len(child) == 10 and child <= core
    assert all(len(p) == 20 for p in parents)
    cores.append(core)
for i in range(5):
    for j in range(i + 1, 5):
        assert not (cores[i] & cores[j])
assert np.array_equal(build_experiment2(11).wp_indices, s2.wp_indices)

# truth sampling
z = sample_truth(s2, 0.0, seed=3, scheme="per_block",
                 block_ranges=EXP2_PARENT_RANGES)
assert model.satisfies_ah(z, s2)
for (lo, hi), ch in zip(EXP2_PARENT_RANGES, EXP2_CHILDREN):
    assert z[lo:hi].sum() >= 1
    assert z[ch] == 1  # child parts sit inside the chosen parent
assert sample_truth(s1, 0.0, seed=5).sum() == 0
z1 = sample_truth(s1, 0.073, seed=5)
assert model.satisfies_ah(z1, s1)
assert np.array_equal(z1, sample_truth(s1, 0.073, seed=5))

# noiseless report equals induced activity
obs = sample_gene_list(s2, z, 0.0, 1.0, seed=1)
assert np.array_equal(obs.x, model.induced_activities(z, s2))

# listing-rate sanity on a large flat system
big = build_system({"w": [f"p{i}" for i in range(100_000)]})
z0 = np.zeros(1, dtype=np.uint8)
xx = sample_gene_list(big, z0, 0.1, 0.9, seed=2).x
rate = xx.mean()
se = np.sqrt(0.1 * 0.9 / 100_000)
assert abs(rate - 0.1) < 3 * se, rate

# evaluate anchors
t = np.array([1, 1, 0, 0], dtype=np.uint8)
assert evaluate(t, t) == (1.0, 1.0, 1.0, 2)
r = evaluate(np.zeros(4, dtype=np.uint8), t)
assert r == (0.0, 1.0, 1.0, 0)
r = evaluate(1 - t, t)
assert r.sensitivity == 0.0 and r.specificity == 0.0

print("structure checks ok")

# small benchmark smoke + determinism
cfg = BenchmarkConfig(experiment=1, replicates=3, master_seed=42,
                      mcmc_sweeps=50_000, mcmc_burn_in=5_000)
rep_a = run_benchmark(cfg)
rep_b = run_benchmark(cfg)
assert rep_a.methods == rep_b.methods
assert rep_a.replicates == rep_b.replicates
assert rep_a.roc == rep_b.roc
assert set(rep_a.methods) == {"map_ilp", "mcmc_constrained@0.5",
                              "mcmc_unconstrained@0.5", "fisher@0.05",
                              "fisher@0.1"}
for pts in rep_a.roc.values():
    tprs = [p["tpr"] for p in pts]
    fprs = [p["fpr"] for p in pts]
    assert all(0 <= v <= 1 for v in tprs + fprs)
print("smoke benchmark ok")

cfg2 = BenchmarkConfig(experiment=2, replicates=2, master_seed=42,
                       mcmc_sweeps=50_000, mcmc_burn_in=5_000)
rep2 = run_benchmark(cfg2)
assert rep2.config["pi"] == 10.0 / 105.0
print("experiment-2 smoke ok")
