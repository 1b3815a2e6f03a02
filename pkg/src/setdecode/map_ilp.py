"""MAP decoding of whole activities by integer linear programming.

The joint log posterior is linear in the whole indicators Z and part
indicators A once the activation rule ("a whole is active iff every
part of it is active") is written as linear inequalities:

1. Z_w <= A_p for every incidence (p in w);
2. A_p <= sum of Z_w over containing wholes;
3. per whole, sum_{p in w} (Z_w - 2 A_p + 2) >= 1, normalized here to
   the <= form  2*sum_{p in w} A_p - deg(w)*Z_w <= 2*deg(w) - 1.

Constraints 1-2 force A to equal the induced activities of Z in every
feasible point, so parts sharing the same container set and the same
report bit always carry equal A values; ``solve_map`` exploits that by
collapsing such parts into one weighted variable before solving, which
is exact and keeps node LPs small on annotation-scale systems.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .ilp import IlpProblem, IlpSolution, solve_binary
from .model import ModelParams, objective_coefficients
from .system import IncidenceSystem


@dataclass
class MapEstimate:
    z_hat: np.ndarray
    a_hat: np.ndarray
    objective_value: float  # up-to-constant linear form
    log_posterior_value: float  # full joint value
    active_wholes: list[str]
    coverage: int
    mis_coverage: int
    fixed_wholes: int  # fixed to zero by shrinking
    fixed_parts: int
    alt_optima: bool
    node_count: int
    runtime: float


@dataclass
class ShrinkResult:
    """Reduced system plus identifier bookkeeping for the fixed zeros."""

    system: IncidenceSystem | None  # None when everything was fixed to 0
    kept_wholes: np.ndarray  # original whole indices
    kept_parts: np.ndarray  # original part indices
    fixed_whole_ids: list[str]
    fixed_part_ids: list[str]
    rounds: int


def build_ilp(system: IncidenceSystem, x, params: ModelParams) -> IlpProblem:
    """Raw MAP problem: variables are all Z_w then all A_p.

    Row order: the Z_w <= A_p rows (whole-major), then one coverage row
    per part, then one closure row per whole.
    """
    x = model.as_part_vector(x, system)
    c = objective_coefficients(params)
    W, P = system.n_wholes, system.n_parts
    objective = np.empty(W + P)
    objective[:W] = c.c1
    objective[W:] = np.where(x == 1, c.c3, c.c2)

    rows = []
    for w in range(W):
        for p in system.members(w):
            rows.append((np.array([w, W + p]), np.array([1.0, -1.0]), 0.0))
    for p in range(P):
        cont = system.containers(p)
        idx = np.concatenate(([W + p], cont))
        coef = np.concatenate(([1.0], -np.ones(cont.size)))
        order = np.argsort(idx)
        rows.append((idx[order], coef[order], 0.0))
    for w in range(W):
        mem = system.members(w)
        d = float(mem.size)
        idx = np.concatenate(([w], W + mem))
        coef = np.concatenate(([-d], 2.0 * np.ones(mem.size)))
        rows.append((idx, coef, 2.0 * d - 1.0))
    return IlpProblem(W + P, objective, rows)


def shrink(system: IncidenceSystem, x, params: ModelParams) -> ShrinkResult:
    """Provably fix hopeless wholes (and their private parts) to zero.

    A whole is hopeless when even full credit for its listed parts
    cannot pay its activation cost: c1 + c3 * #listed(w) < 0.  Such a
    whole can be removed once one of its parts lies only in hopeless
    wholes; that part is fixed inactive too.  Removal can expose new
    removable parts, so this iterates to a fixed point.  Requires
    pi < 1/2 (activation must be a priori disfavored for the argument
    to hold).
    """
    if params.pi >= 0.5:
        raise ValueError(
            "shrinking requires pi < 1/2: fixing wholes to zero is only "
            "valid when activation is a priori disfavored")
    x = model.as_part_vector(x, system)
    c = objective_coefficients(params)

    cur = system
    cur_x = x
    kept_w = np.arange(system.n_wholes)
    kept_p = np.arange(system.n_parts)
    fixed_whole_ids: list[str] = []
    fixed_part_ids: list[str] = []
    rounds = 0

    while True:
        listed = np.add.reduceat(
            cur_x[cur.wp_indices].astype(np.int64), cur.wp_indptr[:-1])
        hopeless = c.c1 + c.c3 * listed < 0.0
        # part removable: every container hopeless
        part_rm = np.minimum.reduceat(
            hopeless[cur.pw_indices].astype(np.uint8), cur.pw_indptr[:-1]) == 1
        whole_rm = hopeless & (np.maximum.reduceat(
            part_rm[cur.wp_indices].astype(np.uint8), cur.wp_indptr[:-1]) == 1)
        if not whole_rm.any():
            break
        rounds += 1
        fixed_whole_ids.extend(cur.wholes[i] for i in np.flatnonzero(whole_rm))
        fixed_part_ids.extend(cur.parts[i] for i in np.flatnonzero(part_rm))
        keep_idx = np.flatnonzero(~whole_rm)
        if keep_idx.size == 0:
            # everything fixed; any surviving part would be uncovered
            fixed_part_ids.extend(
                cur.parts[i] for i in np.flatnonzero(~part_rm))
            return ShrinkResult(None, np.empty(0, np.int64),
                                np.empty(0, np.int64), fixed_whole_ids,
                                fixed_part_ids, rounds)
        sub, sub_parts = cur.subsystem(keep_idx)
        # every removable part's containers are all removed, so none survive
        assert not part_rm[sub_parts].any()
        kept_w = kept_w[keep_idx]
        kept_p = kept_p[sub_parts]
        cur_x = cur_x[sub_parts]
        cur = sub

    return ShrinkResult(cur, kept_w, kept_p, fixed_whole_ids,
                        fixed_part_ids, rounds)


def _collapse_groups(system: IncidenceSystem, x: np.ndarray):
    """Group parts by (container set, report bit).

    Feasible assignments give equal A values to all parts of a group,
    so one weighted variable per group is exact.  Returns
    (group_containers, group_x, group_weight, group_of_part).
    """
    key_to_gid: dict = {}
    group_of_part = np.empty(system.n_parts, dtype=np.int64)
    containers = []
    gx = []
    weight = []
    for p in range(system.n_parts):
        cont = system.containers(p)
        key = (cont.tobytes(), int(x[p]))
        gid = key_to_gid.get(key)
        if gid is None:
            gid = len(containers)
            key_to_gid[key] = gid
            containers.append(cont)
            gx.append(int(x[p]))
            weight.append(0)
        group_of_part[p] = gid
        weight[gid] += 1
    return (containers, np.array(gx, dtype=np.uint8),
            np.array(weight, dtype=np.int64), group_of_part)


GREEDY_WHOLE_CAP = 1500  # skip the warm start on very wide systems

# staged solves certify their answer with one full-system solve when
# the full problem is small enough for the dense-tableau solver; above
# this many variables (wholes + parts) the staged result stands
CERTIFY_VAR_CAP = 5000


def _greedy_warm(W, groups_of_whole, containers, coef_g, c1):
    """Closure-respecting 1-opt hill climb; returns a feasible z.

    Walks single whole flips, re-closing after each one (a whole whose
    groups all become covered is forced active), accepting the best
    exact improvement until none remains.  The result seeds the
    branch-and-bound incumbent; optimality is not required, only
    feasibility and determinism.
    """
    n_groups = np.array([len(g) for g in groups_of_whole], dtype=np.int64)
    zb = np.zeros(W, dtype=bool)
    cov = np.zeros(len(containers), dtype=np.int64)
    ncov = np.zeros(W, dtype=np.int64)
    val = 0.0

    def flip(w, up):
        nonlocal val
        zb[w] = up
        step = 1 if up else -1
        val += c1 * step
        for g in groups_of_whole[w]:
            cov[g] += step
            if cov[g] == (1 if up else 0):
                val += coef_g[g] * step
                for v in containers[g]:
                    ncov[v] += step

    def close():
        while True:
            forced = np.flatnonzero(~zb & (ncov == n_groups))
            if forced.size == 0:
                return
            for w in forced:
                flip(int(w), True)

    close()
    for _ in range(2 * W + 16):
        best_gain = 1e-12
        best_w = -1
        snap_z = zb.copy()
        snap_cov = cov.copy()
        snap_ncov = ncov.copy()
        snap_val = val
        for w in range(W):
            flip(w, not zb[w])
            close()
            gain = val - snap_val
            if gain > best_gain:
                best_gain = gain
                best_w = w
            zb[:] = snap_z
            cov[:] = snap_cov
            ncov[:] = snap_ncov
            val = snap_val
        if best_w < 0:
            break
        flip(best_w, not zb[best_w])
        close()
    return zb


def _solve_core(system: IncidenceSystem, x: np.ndarray, params: ModelParams,
                node_limit: int, collapse_parts: bool, lazy: bool,
                warm_z: np.ndarray | None = None
                ) -> tuple[np.ndarray, IlpSolution]:
    """Solve the MAP ILP on (system, x); returns (z_hat, solver output).

    Groups held by a single whole satisfy A_g = Z_w identically, so
    their objective mass folds into the whole's coefficient and they
    drop out of the variable set entirely; this makes fractional
    activations pay for their private unlisted parts and tightens the
    relaxation.  The coverage rows of the remaining groups are handed
    to the solver as disjunction candidates, and the hill-climb warm
    start supplies the initial incumbent.
    """
    c = objective_coefficients(params)
    W = system.n_wholes

    if collapse_parts:
        containers, gx, gweight, _ = _collapse_groups(system, x)
    else:
        containers = [system.containers(p) for p in range(system.n_parts)]
        gx = x.astype(np.uint8)
        gweight = np.ones(system.n_parts, dtype=np.int64)
    G = len(containers)
    coef_g = np.where(gx == 1, c.c3, c.c2) * gweight

    groups_of_whole: list[list[int]] = [[] for _ in range(W)]
    for g, cont in enumerate(containers):
        for w in cont:
            groups_of_whole[w].append(g)

    single = np.array([cont.size == 1 for cont in containers], dtype=bool)
    keep = np.flatnonzero(~single)
    new_gid = np.full(G, -1, dtype=np.int64)
    new_gid[keep] = np.arange(keep.size)
    Gk = keep.size

    obj_z = np.full(W, c.c1)
    priv_weight = np.zeros(W)
    for g in np.flatnonzero(single):
        w = int(containers[g][0])
        obj_z[w] += coef_g[g]
        priv_weight[w] += gweight[g]
    objective = np.concatenate((obj_z, coef_g[keep]))

    kept_of_whole = [
        [int(new_gid[g]) for g in groups_of_whole[w] if not single[g]]
        for w in range(W)]

    rows = []
    lazy_mask = []
    for w in range(W):
        for i in kept_of_whole[w]:
            rows.append((np.array([w, W + i]), np.array([1.0, -1.0]), 0.0))
            lazy_mask.append(True)
    covering = []
    for i, g in enumerate(keep):
        cont = containers[g]
        idx = np.concatenate(([W + i], cont))
        coef = np.concatenate(([1.0], -np.ones(cont.size)))
        order = np.argsort(idx)
        rows.append((idx[order], coef[order], 0.0))
        lazy_mask.append(False)
        covering.append((W + i, cont.astype(np.int64)))
    for w in range(W):
        gs = np.array(kept_of_whole[w], dtype=np.int64)
        d = float(system.deg_wholes[w])
        idx = np.concatenate(([w], W + gs))
        coef = np.concatenate(([-d + 2.0 * priv_weight[w]],
                               2.0 * gweight[keep[gs]].astype(np.float64)))
        order = np.argsort(idx)
        rows.append((idx[order], coef[order], 2.0 * d - 1.0))
        lazy_mask.append(True)

    def assignment_from_z(zb):
        full = np.zeros(W + Gk)
        full[:W] = zb
        for i, g in enumerate(keep):
            full[W + i] = 1.0 if zb[containers[g]].any() else 0.0
        return full

    warm = None
    if warm_z is not None:
        if len(warm_z) != W:
            raise ValueError(
                f"warm_z has length {len(warm_z)}, expected {W}")
        warm = assignment_from_z(np.asarray(warm_z, dtype=np.uint8))
    if W <= GREEDY_WHOLE_CAP:
        zb = _greedy_warm(W, groups_of_whole, containers, coef_g, c.c1)
        cand = assignment_from_z(zb)
        if warm is None or objective @ cand > objective @ warm:
            warm = cand

    problem = IlpProblem(W + Gk, objective, rows)
    sol = solve_binary(
        problem, node_limit=node_limit,
        lazy_rows=np.array(lazy_mask) if lazy else None,
        warm_assignment=warm, covering=covering,
        prefer_vars=np.arange(W))
    if sol.status != "optimal":  # cannot happen: all-zero is feasible
        raise RuntimeError("MAP subproblem reported infeasible")
    return sol.assignment[:W].astype(np.uint8), sol


def _estimate_from_z(system, x, params, z, fixed_w, fixed_p, alt, nodes,
                     runtime) -> MapEstimate:
    a = model.induced_activities(z, system)
    if not model.satisfies_ah(z, system):
        raise RuntimeError("solver returned a state violating the "
                           "activation rule")
    cov = int((a & x).sum())
    mis = int(a.sum()) - cov
    return MapEstimate(
        z_hat=z,
        a_hat=a,
        objective_value=model.linear_objective_value(z, a, x, params),
        log_posterior_value=model.log_posterior(z, a, x, params),
        active_wholes=[system.wholes[w] for w in np.flatnonzero(z)],
        coverage=cov,
        mis_coverage=mis,
        fixed_wholes=fixed_w,
        fixed_parts=fixed_p,
        alt_optima=alt,
        node_count=nodes,
        runtime=runtime,
    )


def solve_map(system: IncidenceSystem, x, params: ModelParams,
              use_shrinking: bool = True, node_limit: int = 200_000,
              collapse_parts: bool = True, lazy: bool = True,
              warm_z: np.ndarray | None = None) -> MapEstimate:
    """Globally optimal whole assignment under the activation rule.

    ``warm_z`` optionally seeds the search with a known activation-rule
    state (it only affects speed, never the optimum).
    """
    x = model.as_part_vector(x, system)
    if warm_z is not None and len(warm_z) != system.n_wholes:
        raise ValueError(f"warm_z has length {len(warm_z)}, "
                         f"expected {system.n_wholes}")
    fixed_w = fixed_p = 0
    work = system
    work_x = x
    kept_w = np.arange(system.n_wholes)

    if use_shrinking:
        sh = shrink(system, x, params)
        fixed_w = len(sh.fixed_whole_ids)
        fixed_p = len(sh.fixed_part_ids)
        if sh.system is None:
            z = np.zeros(system.n_wholes, dtype=np.uint8)
            return _estimate_from_z(system, x, params, z, fixed_w, fixed_p,
                                    False, 0, 0.0)
        work = sh.system
        work_x = x[sh.kept_parts]
        kept_w = sh.kept_wholes
        if warm_z is not None:
            # restricting an activation-rule state to a sub-collection
            # of wholes keeps it valid: active wholes cover their own
            # parts, and dropped activations only shrink the coverage
            warm_z = np.asarray(warm_z)[kept_w]

    z_sub, sol = _solve_core(work, work_x, params, node_limit,
                             collapse_parts, lazy, warm_z=warm_z)
    z = np.zeros(system.n_wholes, dtype=np.uint8)
    z[kept_w] = z_sub
    return _estimate_from_z(system, x, params, z, fixed_w, fixed_p,
                            sol.alt_optima, sol.node_count, sol.runtime)


def solve_map_sequential(system: IncidenceSystem, x, params: ModelParams,
                         n_start: int | None = None,
                         use_shrinking: bool = True,
                         node_limit: int = 200_000) -> MapEstimate:
    """Size-staged MAP solve for systems with strong small-in-large nesting.

    Stage one solves the sub-system of wholes with at most ``n_start``
    parts.  Each later stage adds the wholes of the next size s and
    re-solves over a candidate set: the currently active wholes, the new
    size-s wholes, plus previously inactive wholes that (D) are subsets
    of a new whole, (E) could pay for activation against some new whole
    w1 - the test is c1 + c2*#unlisted(w2 \\ w1) + c3*#listed(w2 \\ w1) > 0,
    crediting every part of w2 outside w1 as if it were active - or (F)
    are subsets of a member of E.  Wholes outside the candidate set stay
    at their previous value (active ones are always candidates).

    A closure pass then re-solves with any fully covered inactive
    wholes added until the activation rule holds globally, and a full
    solve seeded with the staged state certifies optimality (the stage
    candidates alone can miss replacements for earlier picks).  On
    systems past ``CERTIFY_VAR_CAP`` variables the certification solve
    is skipped and the staged result stands.
    """
    x = model.as_part_vector(x, system)
    sizes = system.deg_wholes
    min_size = int(sizes.min())
    if n_start is None:
        n_start = min_size
    if n_start < min_size:
        raise ValueError(
            f"n_start={n_start} is below the smallest whole size {min_size}")

    c = objective_coefficients(params)
    indptr = system.wp_indptr
    listed_inc = (x[system.wp_indices] == 1)
    n_listed = np.add.reduceat(listed_inc.astype(np.int64), indptr[:-1])
    n_unlisted = sizes - n_listed

    total_nodes = 0
    last_alt = False
    last_spanned = False
    z = np.zeros(system.n_wholes, dtype=np.uint8)

    def solve_candidates(cand_idx: np.ndarray):
        nonlocal total_nodes, last_alt, last_spanned
        sub, sub_parts = system.subsystem(cand_idx)
        est = solve_map(sub, x[sub_parts], params,
                        use_shrinking=use_shrinking,
                        node_limit=node_limit)
        total_nodes += est.node_count
        last_alt = est.alt_optima
        last_spanned = cand_idx.size == system.n_wholes
        z[cand_idx] = est.z_hat

    def overlap_counts(w1: int):
        """Per-whole sizes of the listed/total intersections with w1."""
        mask = np.zeros(system.n_parts, dtype=bool)
        mask[system.members(w1)] = True
        inc = mask[system.wp_indices]
        both = np.add.reduceat((inc & listed_inc).astype(np.int64),
                               indptr[:-1])
        tot = np.add.reduceat(inc.astype(np.int64), indptr[:-1])
        return both, tot

    processed = sizes <= n_start
    if not processed.any():
        raise ValueError("no whole is as small as n_start")
    solve_candidates(np.flatnonzero(processed))

    for s in np.unique(sizes[sizes > n_start]):
        new = np.flatnonzero(sizes == s)
        prev_inactive = processed & (z == 0)

        in_cand = processed & (z == 1)
        in_cand[new] = True
        in_e = np.zeros(system.n_wholes, dtype=bool)
        for w1 in new:
            inside_listed, inside_tot = overlap_counts(w1)
            # D: previously inactive subset of the new whole
            in_cand |= prev_inactive & (inside_tot == sizes)
            # E: could pay for activation on the parts outside the new
            # whole, crediting every such part as active
            gain = (c.c1
                    + c.c2 * (n_unlisted - (inside_tot - inside_listed))
                    + c.c3 * (n_listed - inside_listed))
            in_e |= prev_inactive & (gain > 0.0)
        in_cand |= in_e
        # F: previously inactive subset of a member of E
        for w1 in np.flatnonzero(in_e):
            _, inside_tot = overlap_counts(w1)
            in_cand |= prev_inactive & (inside_tot == sizes)

        solve_candidates(np.flatnonzero(in_cand))
        processed |= sizes == s

    # closure pass: the staged candidates can miss wholes whose parts
    # became covered by unions of active wholes
    for _ in range(64):
        viol = model.violations(z, system)
        if not viol.any():
            break
        cand_idx = np.unique(np.concatenate(
            [np.flatnonzero(z == 1), np.flatnonzero(viol == 1)]))
        solve_candidates(cand_idx)
    else:
        raise RuntimeError("sequential closure pass did not converge")

    # the stage candidate conditions are necessary, not sufficient: a
    # whole can enter the optimum only as a replacement for an earlier
    # pick once a larger whole penalizes the staged state, and no
    # marginal test against single new wholes detects that.  A full
    # solve seeded with the staged state settles it; the seed usually
    # is the optimum, leaving only the proof.  Past the size cap the
    # staged result stands uncertified.
    if not last_spanned \
            and system.n_wholes + system.n_parts <= CERTIFY_VAR_CAP:
        est = solve_map(system, x, params, use_shrinking=use_shrinking,
                        node_limit=node_limit, warm_z=z)
        total_nodes += est.node_count
        last_alt = est.alt_optima
        z = est.z_hat

    return _estimate_from_z(system, x, params, z, 0, 0, last_alt,
                            total_nodes, 0.0)


def trim(estimate: MapEstimate, system: IncidenceSystem, x) -> list[str]:
    """Active wholes minus redundant unreported subsets.

    Suppresses an active whole that is contained in another active
    whole and has no listed part; presentation only, the estimate is
    untouched.
    """
    x = model.as_part_vector(x, system)
    active = np.flatnonzero(estimate.z_hat)
    keep = []
    member_sets = {w: frozenset(system.members(w).tolist()) for w in active}
    for w in active:
        listed = int(x[system.members(w)].sum())
        contained = any(
            w2 != w and member_sets[w] <= member_sets[w2] for w2 in active)
        if contained and listed == 0:
            continue
        keep.append(system.wholes[w])
    return keep
