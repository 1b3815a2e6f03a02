"""Benchmark layouts, truth sampling, and report determinism."""

import numpy as np

from setdecode import model
from setdecode.simulate import (EXP2_CHILDREN, EXP2_PARENT_RANGES,
                                BenchmarkConfig, build_experiment1,
                                build_experiment2, evaluate, run_benchmark,
                                sample_gene_list, sample_truth)
from setdecode.system import build_system


def test_low_overlap_layout():
    system = build_experiment1(7)
    assert system.n_wholes == 100 and system.n_parts <= 300
    assert all(system.deg_wholes[:50] == 5)
    assert all(system.deg_wholes[50:] == 10)
    assert build_experiment1(7).wholes == system.wholes
    assert np.array_equal(build_experiment1(7).wp_indices,
                          system.wp_indices)
    assert not np.array_equal(build_experiment1(8).wp_indices,
                              system.wp_indices)


def test_block_layout():
    system = build_experiment2(11)
    assert system.n_wholes == 105 and system.n_parts <= 300
    cores = []
    for (lo, hi), child_w in zip(EXP2_PARENT_RANGES, EXP2_CHILDREN):
        parents = [set(system.members(w).tolist()) for w in range(lo, hi)]
        core = set.intersection(*parents)
        assert len(core) == 15
        assert all(len(p) == 20 for p in parents)
        child = set(system.members(child_w).tolist())
        assert len(child) == 10 and child <= core
        cores.append(core)
    for i in range(5):
        for j in range(i + 1, 5):
            assert not (cores[i] & cores[j])
    assert np.array_equal(build_experiment2(11).wp_indices,
                          system.wp_indices)


def test_truth_sampling():
    s2 = build_experiment2(11)
    z = sample_truth(s2, 0.0, seed=3, scheme="per_block",
                     block_ranges=EXP2_PARENT_RANGES)
    assert model.satisfies_ah(z, s2)
    for (lo, hi), child_w in zip(EXP2_PARENT_RANGES, EXP2_CHILDREN):
        assert z[lo:hi].sum() >= 1
        assert z[child_w] == 1  # child parts sit inside the chosen parent

    s1 = build_experiment1(7)
    assert sample_truth(s1, 0.0, seed=5).sum() == 0
    z1 = sample_truth(s1, 0.073, seed=5)
    assert model.satisfies_ah(z1, s1)
    assert np.array_equal(z1, sample_truth(s1, 0.073, seed=5))


def test_noiseless_report_equals_induced_activity():
    s2 = build_experiment2(11)
    z = sample_truth(s2, 0.0, seed=3, scheme="per_block",
                     block_ranges=EXP2_PARENT_RANGES)
    obs = sample_gene_list(s2, z, 0.0, 1.0, seed=1)
    assert np.array_equal(obs.x, model.induced_activities(z, s2))


def test_listing_rate_of_inactive_parts():
    big = build_system({"w": [f"p{i}" for i in range(100_000)]})
    z0 = np.zeros(1, dtype=np.uint8)
    x = sample_gene_list(big, z0, 0.1, 0.9, seed=2).x
    se = np.sqrt(0.1 * 0.9 / 100_000)
    assert abs(x.mean() - 0.1) < 3 * se


def test_evaluate_anchors():
    truth = np.array([1, 1, 0, 0], dtype=np.uint8)
    assert evaluate(truth, truth) == (1.0, 1.0, 1.0, 2)
    none_called = evaluate(np.zeros(4, dtype=np.uint8), truth)
    assert none_called == (0.0, 1.0, 1.0, 0)
    flipped = evaluate(1 - truth, truth)
    assert flipped.sensitivity == 0.0 and flipped.specificity == 0.0
    assert flipped.precision == 0.0


def test_benchmark_is_deterministic():
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
    for points in rep_a.roc.values():
        for p in points:
            assert 0.0 <= p["tpr"] <= 1.0 and 0.0 <= p["fpr"] <= 1.0
    for stats in rep_a.methods.values():
        assert stats["replicates"] == 3
        assert 0.0 <= stats["sensitivity"] <= 1.0


def test_block_benchmark_smoke():
    cfg = BenchmarkConfig(experiment=2, replicates=1, master_seed=42,
                          mcmc_sweeps=50_000, mcmc_burn_in=5_000)
    rep = run_benchmark(cfg)
    assert rep.config["pi"] == 10.0 / 105.0
    assert set(rep.methods) == {"map_ilp", "mcmc_constrained@0.5",
                                "mcmc_unconstrained@0.5", "fisher@0.05",
                                "fisher@0.1"}
