"""Exhaustive and Monte Carlo reference computations.

Small systems admit exact answers by walking all 2^W whole assignments
in Gray-code order, so each step is a single incremental flip with the
same neighbor-count bookkeeping the sampler uses.  One walk produces,
per state: the violation count, the number of active parts, and the
number of active listed parts; every downstream quantity (posterior
tables, marginals, AH prior mass, expected violations) is a vectorized
reduction over those tables.

Expected violation counts additionally come in a per-whole exact
flavor that enumerates only the 2^k activation patterns of the k
wholes overlapping w, which scales to large systems as long as
neighborhoods stay small; crowded wholes fall back to Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import jit_kernel
from . import model
from .model import ModelParams
from .system import IncidenceSystem

ENUM_CAP = 20  # hard bound on wholes for 2^W enumeration
NEIGHBOR_CAP = 25  # per-whole exact coverage bound
_CHUNK = 1 << 20


def _enum_tables_core(wp_indptr, wp_indices, pw_indptr, pw_indices, deg, x,
                      W, P):
    n_states = 1 << W
    nviol = np.zeros(n_states, dtype=np.uint8)
    n_active = np.zeros(n_states, dtype=np.int32)
    n_listed_active = np.zeros(n_states, dtype=np.int32)
    z = np.zeros(W, dtype=np.uint8)
    n_p = np.zeros(P, dtype=np.int64)
    n_w = np.zeros(W, dtype=np.int64)
    viol = 0
    act = 0
    listed = 0
    for i in range(1, n_states):
        ii = i
        w = 0
        while ii & 1 == 0:
            ii >>= 1
            w += 1
        if z[w] == 0:
            if n_w[w] == deg[w]:
                viol -= 1
            z[w] = 1
            for j in range(wp_indptr[w], wp_indptr[w + 1]):
                p = wp_indices[j]
                n_p[p] += 1
                if n_p[p] == 1:
                    act += 1
                    listed += x[p]
                    for k in range(pw_indptr[p], pw_indptr[p + 1]):
                        w2 = pw_indices[k]
                        n_w[w2] += 1
                        if z[w2] == 0 and n_w[w2] == deg[w2]:
                            viol += 1
        else:
            for j in range(wp_indptr[w], wp_indptr[w + 1]):
                p = wp_indices[j]
                n_p[p] -= 1
                if n_p[p] == 0:
                    act -= 1
                    listed -= x[p]
                    for k in range(pw_indptr[p], pw_indptr[p + 1]):
                        w2 = pw_indices[k]
                        if z[w2] == 0 and n_w[w2] == deg[w2]:
                            viol -= 1
                        n_w[w2] -= 1
            z[w] = 0
            if n_w[w] == deg[w]:
                viol += 1
        g = i ^ (i >> 1)
        nviol[g] = viol
        n_active[g] = act
        n_listed_active[g] = listed
    return nviol, n_active, n_listed_active


_enum_tables = jit_kernel(_enum_tables_core)


def _state_tables(system: IncidenceSystem, x: np.ndarray):
    if system.n_wholes > ENUM_CAP:
        raise ValueError(
            f"enumeration over 2^{system.n_wholes} states refused; "
            f"the cap is {ENUM_CAP} wholes")
    return _enum_tables(
        system.wp_indptr.astype(np.int64),
        system.wp_indices.astype(np.int64),
        system.pw_indptr.astype(np.int64),
        system.pw_indices.astype(np.int64),
        system.deg_wholes.astype(np.int64),
        x.astype(np.int64), system.n_wholes, system.n_parts)


@dataclass
class ExactPosterior:
    """Per-state posterior table over whole assignments."""

    whole_ids: list[str]
    constrained: bool
    codes: np.ndarray  # state encodings, z_w = bit w
    log_weights: np.ndarray  # joint log probability per state
    marginals: np.ndarray
    map_codes: np.ndarray  # all states attaining the maximum
    map_z: np.ndarray  # first MAP state as a vector
    log_normalizer: float  # log sum of the table weights
    prior_normalizer: float  # AH prior mass (1.0 when unconstrained)

    def state_vector(self, code: int) -> np.ndarray:
        W = len(self.whole_ids)
        return ((int(code) >> np.arange(W)) & 1).astype(np.uint8)


def enumerate_posterior(system: IncidenceSystem, x, params: ModelParams,
                        constrained: bool = True) -> ExactPosterior:
    """Exact posterior over all (or all AH-feasible) whole states."""
    x = model.as_part_vector(x, system)
    nviol, n_active, n_listed_active = _state_tables(system, x)
    W, P = system.n_wholes, system.n_parts
    K = int(x.sum())
    codes = np.arange(1 << W, dtype=np.int64)
    if constrained:
        keep = nviol == 0
        codes = codes[keep]
        n_active = n_active[keep]
        n_listed_active = n_listed_active[keep]
    nz = np.bitwise_count(codes).astype(np.int64)
    la = n_listed_active.astype(np.int64)
    ua = n_active.astype(np.int64) - la
    li = K - la
    ui = (P - n_active.astype(np.int64)) - li
    p = params
    logw = (nz * math.log(p.pi) + (W - nz) * math.log1p(-p.pi)
            + la * math.log(p.gamma) + ua * math.log1p(-p.gamma)
            + li * math.log(p.alpha) + ui * math.log1p(-p.alpha))

    m = logw.max()
    wgt = np.exp(logw - m)
    total = wgt.sum()
    marginals = np.empty(W)
    for w in range(W):
        sel = (codes >> w) & 1
        marginals[w] = float(wgt[sel == 1].sum() / total)

    is_map = logw >= m - 1e-12
    map_codes = codes[is_map]

    if constrained:
        prior_w = np.exp(nz * math.log(p.pi) + (W - nz) * math.log1p(-p.pi))
        prior_normalizer = float(prior_w.sum())
    else:
        prior_normalizer = 1.0

    post = ExactPosterior(
        whole_ids=list(system.wholes),
        constrained=constrained,
        codes=codes,
        log_weights=logw,
        marginals=marginals,
        map_codes=map_codes,
        map_z=((int(map_codes[0]) >> np.arange(W)) & 1).astype(np.uint8),
        log_normalizer=float(m + math.log(total)),
        prior_normalizer=prior_normalizer,
    )
    return post


@dataclass
class AhPriorResult:
    probability: float
    rho: float  # 1 / P(AH): efficiency cost of ignoring the constraint
    method: str
    se: float  # 0 for exact
    n: int  # samples used (0 for exact)
    pi: float


def ah_prior_probability(system: IncidenceSystem, pi: float,
                         method: str = "exact", n: int = 100_000,
                         seed: int = 0) -> AhPriorResult:
    """Prior mass of the activation-consistent states under iid Z."""
    if not 0.0 < pi < 1.0:
        raise ValueError("pi must lie strictly inside (0, 1)")
    if method == "exact":
        x = np.zeros(system.n_parts, dtype=np.uint8)
        nviol, _, _ = _state_tables(system, x)
        codes = np.flatnonzero(nviol == 0).astype(np.int64)
        nz = np.bitwise_count(codes).astype(np.int64)
        W = system.n_wholes
        prob = float(np.exp(nz * math.log(pi)
                            + (W - nz) * math.log1p(-pi)).sum())
        return AhPriorResult(prob, 1.0 / prob, "exact", 0.0, 0, pi)
    if method == "monte_carlo":
        hits = 0
        rng = np.random.default_rng(seed)
        done = 0
        while done < n:
            m = min(n - done, 65536)
            viol = _sampled_violations(system, pi, rng, m)
            hits += int((viol.sum(axis=1) == 0).sum())
            done += m
        prob = hits / n
        se = math.sqrt(max(prob * (1 - prob), 0.0) / n)
        rho = math.inf if prob == 0 else 1.0 / prob
        return AhPriorResult(prob, rho, "monte_carlo", se, n, pi)
    raise ValueError(f"unknown method: {method!r}")


def _sampled_violations(system: IncidenceSystem, pi: float, rng,
                        m: int) -> np.ndarray:
    """m prior draws of z -> per-draw violation indicators (m, W)."""
    z = (rng.random((m, system.n_wholes)) < pi).astype(np.uint8)
    n_p = np.add.reduceat(z[:, system.pw_indices], system.pw_indptr[:-1],
                          axis=1)
    a = (n_p > 0).astype(np.uint8)
    n_w = np.add.reduceat(a[:, system.wp_indices], system.wp_indptr[:-1],
                          axis=1)
    return ((z == 0) & (n_w == system.deg_wholes)).astype(np.uint8)


@dataclass
class ViolationExpectation:
    total: float
    per_whole: np.ndarray
    method: str
    per_whole_method: list[str] = field(default_factory=list)
    mixed: bool = False
    se_total: float = 0.0
    se_per_whole: np.ndarray | None = None
    n: int = 0
    seed: int = 0
    pi: float = 0.0


def expected_violations(system: IncidenceSystem, pi: float,
                        method: str = "exact_per_whole", n: int = 100_000,
                        seed: int = 0,
                        neighbor_cap: int = NEIGHBOR_CAP
                        ) -> ViolationExpectation:
    """Expected violated-whole count under the iid prior.

    Methods: ``exact_per_whole`` enumerates, for each whole, the
    activation patterns of its overlapping wholes (falling back to
    Monte Carlo where more than ``neighbor_cap`` overlap); ``monte_carlo``
    draws full prior samples; ``enumerate`` sums over all 2^W states
    (small systems only).
    """
    if not 0.0 < pi < 1.0:
        raise ValueError("pi must lie strictly inside (0, 1)")
    W = system.n_wholes

    if method == "enumerate":
        x = np.zeros(system.n_parts, dtype=np.uint8)
        nviol, _, _ = _state_tables(system, x)
        codes = np.arange(1 << W, dtype=np.int64)
        nz = np.bitwise_count(codes).astype(np.int64)
        prior = np.exp(nz * math.log(pi) + (W - nz) * math.log1p(-pi))
        per = np.empty(W)
        for w in range(W):
            vw_mask = _per_whole_violation_table(system, w, codes)
            per[w] = float(prior[vw_mask].sum())
        total = float((prior * nviol).sum())
        assert abs(total - per.sum()) < 1e-9
        return ViolationExpectation(total, per, "enumerate",
                                    ["enumerate"] * W, False, 0.0, None,
                                    0, seed, pi)

    if method == "monte_carlo":
        rng = np.random.default_rng(seed)
        per_sum = np.zeros(W, dtype=np.int64)
        tot_sum = 0
        tot_sq = 0
        done = 0
        while done < n:
            m = min(n - done, 65536)
            viol = _sampled_violations(system, pi, rng, m)
            per_sum += viol.sum(axis=0, dtype=np.int64)
            t = viol.sum(axis=1, dtype=np.int64)
            tot_sum += int(t.sum())
            tot_sq += int((t * t).sum())
            done += m
        per = per_sum / n
        total = tot_sum / n
        var_total = max(tot_sq / n - total * total, 0.0)
        se_total = math.sqrt(var_total / n)
        se_per = np.sqrt(np.maximum(per * (1 - per), 0.0) / n)
        return ViolationExpectation(float(total), per, "monte_carlo",
                                    ["monte_carlo"] * W, False, se_total,
                                    se_per, n, seed, pi)

    if method != "exact_per_whole":
        raise ValueError(f"unknown method: {method!r}")

    rng = np.random.default_rng(seed)
    per = np.empty(W)
    se_per = np.zeros(W)
    per_method = []
    for w in range(W):
        cov, se_cov, how = _coverage_probability(system, w, pi, rng, n,
                                                 neighbor_cap)
        per[w] = (1.0 - pi) * cov
        se_per[w] = (1.0 - pi) * se_cov
        per_method.append(how)
    mixed = len(set(per_method)) > 1
    se_total = float(math.sqrt((se_per ** 2).sum()))
    return ViolationExpectation(float(per.sum()), per, "exact_per_whole",
                                per_method, mixed, se_total, se_per, n,
                                seed, pi)


def _per_whole_violation_table(system, w, codes):
    """Boolean mask over all state codes: is whole w violated."""
    members = system.members(w)
    z_w = (codes >> w) & 1
    covered = np.ones(codes.size, dtype=bool)
    for p in members:
        cov_p = np.zeros(codes.size, dtype=bool)
        for w2 in system.containers(p):
            if w2 != w:
                cov_p |= ((codes >> int(w2)) & 1) == 1
        covered &= cov_p
    return (z_w == 0) & covered


def _neighbor_masks(system, w):
    """Bit masks over the wholes overlapping w, one mask per part."""
    members = system.members(w)
    nb = system.neighbors_of_whole(w)
    col = {int(v): i for i, v in enumerate(nb)}
    masks = np.zeros(members.size, dtype=np.int64)
    for i, p in enumerate(members):
        m = 0
        for w2 in system.containers(p):
            if w2 != w:
                m |= 1 << col[int(w2)]
        masks[i] = m
    return nb, masks


def _coverage_probability(system, w, pi, rng, n, neighbor_cap):
    """P(every part of w lies in some other active whole), its SE, method."""
    nb, masks = _neighbor_masks(system, w)
    if (masks == 0).any():
        return 0.0, 0.0, "exact"  # some part belongs only to w
    masks = np.unique(masks)
    k = nb.size
    if k <= neighbor_cap:
        counts = np.zeros(k + 1, dtype=np.int64)
        for lo in range(0, 1 << k, _CHUNK):
            hi = min(lo + _CHUNK, 1 << k)
            pats = np.arange(lo, hi, dtype=np.int64)
            ok = np.ones(pats.size, dtype=bool)
            for m in masks:
                ok &= (pats & m) != 0
            counts += np.bincount(np.bitwise_count(pats[ok]).astype(np.int64),
                                  minlength=k + 1)
        j = np.arange(k + 1)
        logterm = j * math.log(pi) + (k - j) * math.log1p(-pi)
        prob = float(np.sum(np.where(counts > 0,
                                     counts * np.exp(logterm), 0.0)))
        return min(prob, 1.0), 0.0, "exact"
    # Monte Carlo over the neighbor activations only
    hits = 0
    done = 0
    while done < n:
        m = min(n - done, 65536)
        samp = rng.random((m, k)) < pi
        ok = np.ones(m, dtype=bool)
        for mask in masks:
            idx = np.flatnonzero((mask >> np.arange(k)) & 1)
            ok &= samp[:, idx].any(axis=1)
        hits += int(ok.sum())
        done += m
    prob = hits / n
    se = math.sqrt(max(prob * (1 - prob), 0.0) / n)
    return prob, se, "monte_carlo"


def conjecture_gap(system: IncidenceSystem, pi: float, n: int = 100_000,
                   seed: int = 0) -> dict:
    """Diagnostic comparison of -log P(AH) against E[sum V]; never asserted.

    Uses exact computations when the system is small enough, Monte
    Carlo otherwise.
    """
    small = system.n_wholes <= ENUM_CAP
    ah = ah_prior_probability(system, pi,
                              method="exact" if small else "monte_carlo",
                              n=n, seed=seed)
    ev = expected_violations(system, pi, method="exact_per_whole", n=n,
                             seed=seed)
    neg_log = math.inf if ah.probability == 0 else -math.log(ah.probability)
    return {
        "pi": pi,
        "neg_log_ah_prob": neg_log,
        "expected_violations": ev.total,
        "gap": neg_log - ev.total if math.isfinite(neg_log) else math.inf,
        "ah_method": ah.method,
        "violations_mixed": ev.mixed,
    }


def violation_grid(systems: list[tuple[str, IncidenceSystem]],
                   pis, method: str = "exact_per_whole", n: int = 100_000,
                   seed: int = 0) -> list[dict]:
    """Rows of (label, pi, expected violations, method, SE) for plotting."""
    rows = []
    for label, system in systems:
        for pi in pis:
            ev = expected_violations(system, float(pi), method=method, n=n,
                                     seed=seed)
            rows.append({
                "label": label,
                "pi": float(pi),
                "expected_violations": ev.total,
                "method": ev.method + ("+monte_carlo" if ev.mixed else ""),
                "se": ev.se_total,
            })
    return rows
