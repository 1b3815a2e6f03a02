"""Swap-kernel bookkeeping, stationary laws, and chain reproducibility."""

import math

import numpy as np
import pytest

from setdecode.mcmc import (AUDIT_INTERVAL, TELEPORT_MAX_WHOLES,
                            TELEPORT_RATE, ChainState, audit_state,
                            merge_summaries, propose_and_apply_swap,
                            propose_and_apply_teleport, run_chain,
                            subset_from_uniform, teleport_inclusion_rate)
from setdecode.model import ModelParams, objective_coefficients
from setdecode.system import build_system

import oracles


def test_flip_on_delta_anchor(s3, params25, x110):
    state = ChainState.from_scratch(s3, x110)
    ok, state = propose_and_apply_swap(state, 0, x110, params25)
    assert ok
    assert abs(state.last_delta - math.log(27)) < 1e-12
    audit_state(state)


def test_flip_removing_violation_gains_penalty(s3, params25, x110):
    state = ChainState.from_scratch(s3, x110, z=[1, 1, 0])
    assert state.violation_count == 1
    c = objective_coefficients(params25)
    ok, state = propose_and_apply_swap(state, 2, x110, params25)
    assert ok and state.violation_count == 0
    assert abs(state.last_delta - (c.c1 + params25.lam)) < 1e-12
    audit_state(state)


def test_teleport_delta_matches_penalized_gap(s3, params25, x110):
    state = ChainState.from_scratch(s3, x110)
    ok, state = propose_and_apply_teleport(state, [0, 1], x110, params25)
    assert ok
    mem = oracles.member_sets_of(s3)
    args = (list(x110), mem, 3, params25.alpha, params25.gamma, params25.pi)
    gap = (oracles.log_posterior((1, 1, 0), *args)
           - oracles.log_posterior((0, 0, 0), *args))
    viols = sum(oracles.violation_flags((1, 1, 0), mem, 3))
    assert viols == 1
    assert abs(state.last_delta - (gap - params25.lam * viols)) < 1e-12
    audit_state(state)


def test_empty_teleport_is_accepted_noop(s3, params25, x110):
    state = ChainState.from_scratch(s3, x110, z=[1, 0, 0])
    before = snapshot(state)
    ok, state = propose_and_apply_teleport(state, [], x110, params25,
                                           u=1.0 - 1e-12)
    assert ok and state.last_delta == 0.0
    for lhs, rhs in zip(before, snapshot(state)):
        assert np.array_equal(lhs, rhs)


def snapshot(s):
    return (s.z.copy(), s.a.copy(), s.n_active_wholes_per_part.copy(),
            s.n_active_parts_per_whole.copy(), s.violation_count, s.sum_z,
            s.listed_active, s.unlisted_active, s.listed_inactive,
            s.unlisted_inactive)


def test_double_flip_is_involution_randomized(params25):
    rng = np.random.default_rng(7)
    for _ in range(80):
        system = build_system(oracles.random_raw_sets(rng, max_parts=8,
                                                      max_wholes=6))
        x = rng.integers(0, 2, size=system.n_parts).astype(np.uint8)
        z0 = rng.integers(0, 2, size=system.n_wholes).astype(np.uint8)
        state = ChainState.from_scratch(system, x, z=z0)
        before = snapshot(state)
        w = int(rng.integers(system.n_wholes))
        propose_and_apply_swap(state, w, x, params25)
        d1 = state.last_delta
        audit_state(state)
        propose_and_apply_swap(state, w, x, params25)
        assert abs(d1 + state.last_delta) < 1e-12
        for lhs, rhs in zip(before, snapshot(state)):
            assert np.array_equal(lhs, rhs)
        # a rejected proposal leaves the state untouched
        propose_and_apply_swap(state, w, x, params25, u=1.0 - 1e-12)
        if state.last_delta < 0:
            for lhs, rhs in zip(before, snapshot(state)):
                assert np.array_equal(lhs, rhs)


def test_teleport_involution_randomized(params25):
    rng = np.random.default_rng(11)
    for _ in range(60):
        system = build_system(oracles.random_raw_sets(rng, max_parts=8,
                                                      max_wholes=7))
        x = rng.integers(0, 2, size=system.n_parts).astype(np.uint8)
        z0 = rng.integers(0, 2, size=system.n_wholes).astype(np.uint8)
        state = ChainState.from_scratch(system, x, z=z0)
        before = snapshot(state)
        size = int(rng.integers(0, system.n_wholes + 1))
        subset = rng.choice(system.n_wholes, size=size, replace=False)
        propose_and_apply_teleport(state, subset, x, params25)
        d1 = state.last_delta
        audit_state(state)
        propose_and_apply_teleport(state, subset, x, params25)
        assert abs(d1 + state.last_delta) < 1e-12
        for lhs, rhs in zip(before, snapshot(state)):
            assert np.array_equal(lhs, rhs)
        # a rejected teleport leaves the state untouched
        propose_and_apply_teleport(state, subset, x, params25,
                                   u=1.0 - 1e-12)
        if state.last_delta < 0:
            for lhs, rhs in zip(before, snapshot(state)):
                assert np.array_equal(lhs, rhs)


def replay(system, x, params, sweeps, burn_in, seed, mode):
    """Drive the single-step API with the exact uniforms of run_chain."""
    lam = params.lam if mode == "constrained" else 0.0
    n_wholes = system.n_wholes
    q_tele = TELEPORT_RATE if n_wholes <= TELEPORT_MAX_WHOLES else 0.0
    theta = teleport_inclusion_rate(params.pi)
    gen = np.random.default_rng(seed)
    state = ChainState.from_scratch(system, x)
    kept = 0
    acc = np.zeros(n_wholes, dtype=np.int64)
    n_acc = 0
    done = 0
    while done < sweeps:
        m = min(AUDIT_INTERVAL, sweeps - done)
        u = gen.random((m, 3))
        for i in range(m):
            if u[i, 0] < q_tele:
                rate = None if u[i, 0] < q_tele * 0.5 else theta
                subset = subset_from_uniform(u[i, 1], n_wholes, rate)
                ok, state = propose_and_apply_teleport(state, subset, x,
                                                       params, u=u[i, 2],
                                                       lam=lam)
            else:
                w = min(int(u[i, 1] * n_wholes), n_wholes - 1)
                ok, state = propose_and_apply_swap(state, w, x, params,
                                                   u=u[i, 2], lam=lam)
            n_acc += ok
            sweep = done + i + 1
            if sweep > burn_in and (mode == "unconstrained"
                                    or state.violation_count == 0):
                kept += 1
                acc += state.z
        done += m
    return acc, kept, n_acc


def test_kernel_matches_single_step_replay(params25):
    rng = np.random.default_rng(8)
    for trial in range(6):
        system = build_system(oracles.random_raw_sets(rng, max_parts=9,
                                                      max_wholes=8))
        x = rng.integers(0, 2, size=system.n_parts).astype(np.uint8)
        mode = "constrained" if trial % 2 == 0 else "unconstrained"
        sweeps, burn_in, seed = 20_000, 4_000, 1000 + trial
        summary = run_chain(system, x, params25, sweeps, burn_in, seed,
                            mode=mode)
        acc, kept, n_acc = replay(system, x, params25, sweeps, burn_in,
                                  seed, mode)
        assert kept == summary.kept_count
        assert abs(n_acc / sweeps - summary.acceptance_rate) < 1e-15
        assert np.max(np.abs(acc / kept - summary.marginals)) < 1e-15


def test_s3_constrained_marginals(s3, params25, x110):
    summary = run_chain(s3, x110, params25, 1_000_000, 100_000, 123)
    target = np.array([82 / 86, 2 / 86, 1 / 86])
    assert np.max(np.abs(summary.marginals - target)) < 0.01
    assert 0 < summary.kept_fraction <= 1
    assert summary.mode == "constrained" and summary.lam == 5.0


def test_single_whole_closed_form(params25):
    system = build_system({"w1": ["p1"]})
    x = np.array([1], dtype=np.uint8)
    p = params25
    closed = p.pi * p.gamma / (p.pi * p.gamma + (1 - p.pi) * p.alpha)
    for mode in ("constrained", "unconstrained"):
        summary = run_chain(system, x, p, 1_000_000, 100_000, 5, mode=mode)
        assert abs(summary.marginals[0] - closed) < 0.01, mode


def test_unconstrained_targets_unpenalized_law(s3, params25, x110):
    mem = oracles.member_sets_of(s3)
    want, _ = oracles.posterior_marginals(list(x110), mem, 3, params25.alpha,
                                          params25.gamma, params25.pi,
                                          constrained=False)
    summary = run_chain(s3, x110, params25, 1_000_000, 100_000, 77,
                        mode="unconstrained")
    assert np.max(np.abs(summary.marginals - np.array(want))) < 0.01
    assert summary.lam == 0.0


def test_weighted_proposal_keeps_stationary_law(s3, params25, x110):
    summary = run_chain(s3, x110, params25, 1_000_000, 100_000, 42,
                        proposal_weights=[2.0, 1.0, 1.0])
    target = np.array([82 / 86, 2 / 86, 1 / 86])
    assert np.max(np.abs(summary.marginals - target)) < 0.01


def test_seed_determinism(s3, params25, x110):
    a1 = run_chain(s3, x110, params25, 200_000, 10_000, 99)
    a2 = run_chain(s3, x110, params25, 200_000, 10_000, 99)
    assert np.array_equal(a1.marginals, a2.marginals)
    assert a1.lag1_autocorr == a2.lag1_autocorr
    assert a1.kept_count == a2.kept_count


def test_trace_file(tmp_path, s3, params25, x110):
    path = tmp_path / "trace.tsv"
    run_chain(s3, x110, params25, 50_000, 0, 1, trace_path=path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "sweep\tactive_wholes\tviolations\ttarget"
    assert len(lines) >= 5
    first = lines[1].split("\t")
    assert len(first) == 4 and int(first[0]) > 0


def test_argument_validation(s3, params25, x110):
    with pytest.raises(ValueError):
        run_chain(s3, x110, params25, 100, burn_in=100, seed=0)
    with pytest.raises(ValueError):
        run_chain(s3, x110, params25, 100, seed=0, mode="other")
    with pytest.raises(ValueError):
        run_chain(s3, x110, params25, 100, seed=0,
                  proposal_weights=[1.0, -1.0, 1.0])
    with pytest.raises(ValueError):
        run_chain(s3, x110, params25, 100, seed=0,
                  proposal_weights=[1.0, 1.0])
    with pytest.raises(ValueError):
        run_chain(s3, x110, params25, 100, seed=0, teleport_rate=-0.1)
    with pytest.raises(ValueError):
        run_chain(s3, x110, params25, 100, seed=0, teleport_rate=1.5)


def test_teleports_disabled_beyond_code_width(params25):
    wide = build_system({f"w{i}": [f"p{i}"]
                         for i in range(TELEPORT_MAX_WHOLES + 1)})
    x = np.zeros(wide.n_parts, dtype=np.uint8)
    with pytest.raises(ValueError, match="teleport"):
        run_chain(wide, x, params25, 100, seed=0, teleport_rate=0.5)
    summary = run_chain(wide, x, params25, 1000, seed=0)
    assert summary.teleport_rate == 0.0
    assert summary.teleport_attempts == 0


def test_subset_decoder_laws():
    rng = np.random.default_rng(17)
    draws = rng.random(20_000)
    # uniform mode: all 2^3 subsets near-equally likely
    counts = np.zeros(8)
    for u in draws:
        code = sum(1 << b for b in subset_from_uniform(u, 3))
        counts[code] += 1
    assert np.max(np.abs(counts / len(draws) - 0.125)) < 0.01
    # sparse mode: per-whole inclusion tracks the requested rate
    hits = np.zeros(6)
    for u in draws:
        for b in subset_from_uniform(u, 6, 0.15):
            hits[b] += 1
    assert np.max(np.abs(hits / len(draws) - 0.15)) < 0.01
    assert teleport_inclusion_rate(0.02) == 0.1
    assert teleport_inclusion_rate(0.2) == 0.4
    assert teleport_inclusion_rate(0.45) == 0.5


def test_teleport_counters(s3, params25, x110):
    summary = run_chain(s3, x110, params25, 50_000, 5_000, 3)
    assert summary.teleport_rate == TELEPORT_RATE
    # attempts concentrate near rate * sweeps
    assert abs(summary.teleport_attempts / 50_000 - TELEPORT_RATE) < 0.02
    assert 0 <= summary.teleport_accepts <= summary.teleport_attempts
    off = run_chain(s3, x110, params25, 10_000, 1_000, 3, teleport_rate=0.0)
    assert off.teleport_attempts == 0 and off.teleport_accepts == 0


def test_merge_summaries(s3, params25, x110):
    chains = [run_chain(s3, x110, params25, 100_000, 10_000, seed)
              for seed in (1, 2, 3)]
    merged = merge_summaries(chains)
    assert merged.kept_count == sum(c.kept_count for c in chains)
    manual = sum(c.marginals * c.kept_count for c in chains) \
        / sum(c.kept_count for c in chains)
    assert np.allclose(merged.marginals, manual, atol=1e-12)
    with pytest.raises(ValueError):
        merge_summaries([])
