"""Penalized Metropolis sampler over whole-activity vectors.

States violating the activation rule are allowed during the walk but
penalized in the target (log posterior minus ``lam`` per violated
whole); the conditional marginals are estimated from the visited states
with zero violations.  Flips are O(degree) thanks to neighbor counts:
n(p) active containers per part, n(w) active member parts per whole,
with a_p = 1 iff n(p) > 0 and a violation at w iff z_w = 0 and
n(w) = deg(w).

Each move is either a single-whole flip or, with probability
``teleport_rate``, a teleport that flips several wholes at once.
Teleports come in three kinds (``TELEPORT_SPLIT``): a uniform random
subset, a sparse subset including each whole with rate
clip(2 pi, 0.1, 0.5), and an exchange that swaps one active whole for
one inactive whole chosen uniformly.  Each kind is a symmetric
proposal (fixed subset laws trivially; the exchange because forward
and reverse pick from the same count of (active, inactive) pairs), so
every move shares one acceptance rule.  Subset teleports jump between
activity patterns separated by several low-probability single flips;
exchanges relabel which of several overlapping wholes explains the
same parts without paying the prior cost of changing the active count.

All running summaries are integer counts, so incremental updates are
exact and the periodic from-scratch audit can demand equality.  The
sweep kernel is one code path compiled by numba or executed as plain
Python (see _backend); both consume the same pre-drawn uniforms and use
libm scalar math, so chains are bit-identical across backends.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._backend import BACKEND, jit_kernel
from . import model
from .model import ModelParams, objective_coefficients
from .system import IncidenceSystem

AUDIT_INTERVAL = 100_000  # sweeps between from-scratch state checks
TRACE_INTERVAL = 10_000  # sweeps between trace lines
GENERATOR_ID = "numpy.random.Generator(PCG64)"
TELEPORT_RATE = 0.5  # default teleport share of proposed moves
TELEPORT_SPLIT = (0.25, 0.25, 0.5)  # uniform / sparse / exchange shares
TELEPORT_MAX_WHOLES = 53  # the subset code must fit one uniform's mantissa


def teleport_inclusion_rate(pi: float) -> float:
    """Per-whole inclusion rate of the sparse teleport subset."""
    return min(0.5, max(0.1, 2.0 * pi))


def exchange_pair(z, u1: float):
    """Decode one uniform into the (active, inactive) swap a teleport
    flips, ascending; empty when the state admits no swap.

    The sweep kernel inlines the same arithmetic, so replaying a chain
    through this function is bit-identical.
    """
    W = len(z)
    k = int(np.sum(z))
    if k == 0 or k == W:
        return []
    idx = int(u1 * (k * (W - k)))
    cap = k * (W - k) - 1
    if idx > cap:
        idx = cap
    ai = idx // (W - k)
    bi = idx - ai * (W - k)
    wa = wb = -1
    na = nb = -1
    for w in range(W):
        if z[w] == 1:
            na += 1
            if na == ai:
                wa = w
        else:
            nb += 1
            if nb == bi:
                wb = w
    return [wa, wb] if wa < wb else [wb, wa]


def subset_from_uniform(u1: float, n_wholes: int, rate: float | None = None):
    """Decode one uniform into the whole subset a teleport flips.

    ``rate=None`` reads ``n_wholes`` mantissa bits, giving a uniform
    subset; otherwise bits come out of an arithmetic decoder with
    inclusion probability ``rate`` per whole.  The sweep kernel inlines
    the same arithmetic, so replaying a chain through this function is
    bit-identical.
    """
    if rate is None:
        code = int(u1 * 2.0 ** n_wholes)
        cap = (1 << n_wholes) - 1
        if code > cap:
            code = cap
        return [b for b in range(n_wholes) if (code >> b) & 1]
    out = []
    r = u1
    for b in range(n_wholes):
        if r < rate:
            out.append(b)
            r = r / rate
        else:
            r = (r - rate) / (1.0 - rate)
    return out

# slots of the int64 counter vector shared with the sweep kernel
_VIOL = 0
_SUM_Z = 1
_LISTED_ACT = 2
_UNLISTED_ACT = 3
_LISTED_INACT = 4
_UNLISTED_INACT = 5
_T_KEPT = 6
_ACCEPTED = 7
_SUM_Y = 8
_SUM_Y2 = 9
_SUM_YY = 10
_Y_PREV = 11
_Y_FIRST = 12
_AH_COUNT = 13
_TELE_ATT = 14
_TELE_ACC = 15
_N_COUNTERS = 16


class ZeroKeptError(RuntimeError):
    """No post-burn-in state satisfied the activation rule."""


@dataclass
class ChainState:
    """Sampler state with all incremental bookkeeping."""

    system: IncidenceSystem
    x: np.ndarray
    z: np.ndarray
    a: np.ndarray
    n_active_wholes_per_part: np.ndarray
    n_active_parts_per_whole: np.ndarray
    violation_count: int
    sum_z: int
    listed_active: int
    unlisted_active: int
    listed_inactive: int
    unlisted_inactive: int
    last_delta: float = 0.0

    @classmethod
    def from_scratch(cls, system: IncidenceSystem, x,
                     z=None) -> "ChainState":
        x = model.as_part_vector(x, system)
        if z is None:
            z = np.zeros(system.n_wholes, dtype=np.uint8)
        else:
            z = np.asarray(z, dtype=np.uint8).copy()
        a = model.induced_activities(z, system)
        n_p = np.add.reduceat(
            z[system.pw_indices].astype(np.int64), system.pw_indptr[:-1])
        n_w = np.add.reduceat(
            a[system.wp_indices].astype(np.int64), system.wp_indptr[:-1])
        viol = int(((z == 0) & (n_w == system.deg_wholes)).sum())
        la = int((a & (x == 1)).sum())
        ua = int((a & (x == 0)).sum())
        return cls(
            system=system, x=x, z=z, a=a,
            n_active_wholes_per_part=n_p,
            n_active_parts_per_whole=n_w,
            violation_count=viol,
            sum_z=int(z.sum()),
            listed_active=la,
            unlisted_active=ua,
            listed_inactive=int(x.sum()) - la,
            unlisted_inactive=int((x == 0).sum()) - ua,
        )

    def penalized_log_posterior(self, params: ModelParams,
                                lam: float | None = None) -> float:
        """Full-constant target value from the integer summaries."""
        if lam is None:
            lam = params.lam
        p = params
        W = self.system.n_wholes
        return (self.sum_z * math.log(p.pi)
                + (W - self.sum_z) * math.log1p(-p.pi)
                + self.listed_active * math.log(p.gamma)
                + self.unlisted_active * math.log1p(-p.gamma)
                + self.listed_inactive * math.log(p.alpha)
                + self.unlisted_inactive * math.log1p(-p.alpha)
                - lam * self.violation_count)


def audit_state(state: ChainState) -> None:
    """Compare every incremental summary against recomputation."""
    ref = ChainState.from_scratch(state.system, state.x, state.z)
    exact = (
        np.array_equal(ref.a, state.a)
        and np.array_equal(ref.n_active_wholes_per_part,
                           state.n_active_wholes_per_part)
        and np.array_equal(ref.n_active_parts_per_whole,
                           state.n_active_parts_per_whole)
        and ref.violation_count == state.violation_count
        and ref.sum_z == state.sum_z
        and ref.listed_active == state.listed_active
        and ref.unlisted_active == state.unlisted_active
        and ref.listed_inactive == state.listed_inactive
        and ref.unlisted_inactive == state.unlisted_inactive)
    if not exact:
        raise RuntimeError(
            "incremental chain state diverged from recomputation: "
            f"violations {state.violation_count} vs {ref.violation_count}, "
            f"sum_z {state.sum_z} vs {ref.sum_z}")


def _flip(state: ChainState, w: int, c) -> tuple[float, int]:
    """Toggle whole w in place; returns (linear delta, violation delta).

    Applying the same flip again restores every count exactly, which is
    how rejected proposals are rolled back.
    """
    sys_ = state.system
    x = state.x
    z = state.z
    n_p = state.n_active_wholes_per_part
    n_w = state.n_active_parts_per_whole
    deg = sys_.deg_wholes
    members = sys_.members(w)
    lin = 0.0
    viol_delta = 0

    if z[w] == 0:
        lin += c.c1
        if n_w[w] == deg[w]:
            viol_delta -= 1
        z[w] = 1
        for p in members:
            n_p[p] += 1
            if n_p[p] == 1:
                state.a[p] = 1
                if x[p] == 1:
                    lin += c.c3
                    state.listed_active += 1
                    state.listed_inactive -= 1
                else:
                    lin += c.c2
                    state.unlisted_active += 1
                    state.unlisted_inactive -= 1
                for w2 in sys_.containers(p):
                    n_w[w2] += 1
                    if z[w2] == 0 and n_w[w2] == deg[w2]:
                        viol_delta += 1
        state.sum_z += 1
    else:
        lin -= c.c1
        for p in members:
            n_p[p] -= 1
            if n_p[p] == 0:
                state.a[p] = 0
                if x[p] == 1:
                    lin -= c.c3
                    state.listed_active -= 1
                    state.listed_inactive += 1
                else:
                    lin -= c.c2
                    state.unlisted_active -= 1
                    state.unlisted_inactive += 1
                for w2 in sys_.containers(p):
                    if z[w2] == 0 and n_w[w2] == deg[w2]:
                        viol_delta -= 1
                    n_w[w2] -= 1
        z[w] = 0
        if n_w[w] == deg[w]:
            viol_delta += 1
        state.sum_z -= 1

    state.violation_count += viol_delta
    return lin, viol_delta


def propose_and_apply_swap(state: ChainState, w: int, x, params: ModelParams,
                           u: float = 0.0,
                           lam: float | None = None) -> tuple[bool,
                                                              ChainState]:
    """Metropolis step flipping whole w; mutates ``state`` in place.

    ``u`` is the acceptance uniform; the default 0.0 always accepts.
    ``lam`` overrides the penalty weight (0 gives the unpenalized walk).
    The proposed move's target delta lands in ``state.last_delta``
    whether or not it was accepted.
    """
    del x  # the report is frozen into the state at construction
    if lam is None:
        lam = params.lam
    c = objective_coefficients(params)
    lin, viol_delta = _flip(state, w, c)
    delta = lin - lam * viol_delta
    state.last_delta = delta
    accepted = u <= 0.0 or math.log(u) < delta
    if not accepted:
        _flip(state, w, c)
    return accepted, state


def propose_and_apply_teleport(state: ChainState, wholes, x,
                               params: ModelParams, u: float = 0.0,
                               lam: float | None = None) -> tuple[bool,
                                                                  ChainState]:
    """Metropolis step flipping a whole subset; mutates ``state`` in place.

    ``wholes`` holds the indices to flip; they are applied in ascending
    order, matching the sweep kernel's bit order, so replayed deltas are
    bit-identical.  A uniform random subset is a symmetric proposal, so
    the single-flip acceptance rule applies unchanged.  An empty subset
    is a no-op that always accepts.
    """
    del x  # the report is frozen into the state at construction
    if lam is None:
        lam = params.lam
    c = objective_coefficients(params)
    order = sorted({int(w) for w in wholes})
    lin = 0.0
    viol_delta = 0
    for w in order:
        l, v = _flip(state, w, c)
        lin += l
        viol_delta += v
    delta = lin - lam * viol_delta
    state.last_delta = delta
    accepted = u <= 0.0 or math.log(u) < delta
    if not accepted:
        for w in order:
            _flip(state, w, c)
    return accepted, state


def _flip_step_core(w, z, n_p, n_w, x, wp_indptr, wp_indices, pw_indptr,
                    pw_indices, deg, c1, c2, c3, st):
    """Toggle whole w in place; returns (linear delta, violation delta).

    Applying the same flip again restores every count exactly, which is
    how rejected proposals are rolled back.
    """
    lin = 0.0
    viol_delta = 0
    if z[w] == 0:
        lin += c1
        if n_w[w] == deg[w]:
            viol_delta -= 1
        z[w] = 1
        for j in range(wp_indptr[w], wp_indptr[w + 1]):
            p = wp_indices[j]
            n_p[p] += 1
            if n_p[p] == 1:
                if x[p] == 1:
                    lin += c3
                    st[_LISTED_ACT] += 1
                    st[_LISTED_INACT] -= 1
                else:
                    lin += c2
                    st[_UNLISTED_ACT] += 1
                    st[_UNLISTED_INACT] -= 1
                for k in range(pw_indptr[p], pw_indptr[p + 1]):
                    w2 = pw_indices[k]
                    n_w[w2] += 1
                    if z[w2] == 0 and n_w[w2] == deg[w2]:
                        viol_delta += 1
        st[_SUM_Z] += 1
    else:
        lin -= c1
        for j in range(wp_indptr[w], wp_indptr[w + 1]):
            p = wp_indices[j]
            n_p[p] -= 1
            if n_p[p] == 0:
                if x[p] == 1:
                    lin -= c3
                    st[_LISTED_ACT] -= 1
                    st[_LISTED_INACT] += 1
                else:
                    lin -= c2
                    st[_UNLISTED_ACT] -= 1
                    st[_UNLISTED_INACT] += 1
                for k in range(pw_indptr[p], pw_indptr[p + 1]):
                    w2 = pw_indices[k]
                    if z[w2] == 0 and n_w[w2] == deg[w2]:
                        viol_delta -= 1
                    n_w[w2] -= 1
        z[w] = 0
        if n_w[w] == deg[w]:
            viol_delta += 1
        st[_SUM_Z] -= 1
    st[_VIOL] += viol_delta
    return lin, viol_delta


_flip_step = jit_kernel(_flip_step_core)


def _sweep_chunk_core(z, n_p, n_w, x, wp_indptr, wp_indices, pw_indptr,
                      pw_indices, deg, u, cumw, use_weights, q_tele, theta,
                      two_pow, c1, c2, c3, lam, log_pi, log1m_pi, log_gamma,
                      log1m_gamma, log_alpha, log1m_alpha, sweep0, burn_in,
                      constrained, st, acc, mark, trace):
    n = u.shape[0]
    W = z.shape[0]
    q_half = q_tele * 0.5
    n_trace = 0
    for i in range(n):
        u2 = u[i, 2]
        if u[i, 0] < q_tele:
            # subset teleport: u[i, 1] encodes which wholes to flip,
            # either as n_wholes mantissa bits (uniform subset, exact
            # for W <= 53) or through an arithmetic decoder with
            # inclusion rate theta (sparse subset)
            st[_TELE_ATT] += 1
            if u[i, 0] < q_half:
                code = int(u[i, 1] * two_pow)
                cap = (1 << W) - 1
                if code > cap:
                    code = cap
            else:
                code = 0
                r = u[i, 1]
                for b in range(W):
                    if r < theta:
                        code |= 1 << b
                        r = r / theta
                    else:
                        r = (r - theta) / (1.0 - theta)
            lin = 0.0
            viol_delta = 0
            for b in range(W):
                if (code >> b) & 1:
                    l, v = _flip_step(b, z, n_p, n_w, x, wp_indptr,
                                      wp_indices, pw_indptr, pw_indices,
                                      deg, c1, c2, c3, st)
                    lin += l
                    viol_delta += v
            delta = lin - lam * viol_delta
            accepted = u2 <= 0.0 or math.log(u2) < delta
            if accepted:
                st[_ACCEPTED] += 1
                st[_TELE_ACC] += 1
                for b in range(W):
                    if (code >> b) & 1:
                        if z[b] == 0:
                            acc[b] += st[_T_KEPT] - mark[b]
                        mark[b] = st[_T_KEPT]
            else:
                for b in range(W):
                    if (code >> b) & 1:
                        _flip_step(b, z, n_p, n_w, x, wp_indptr, wp_indices,
                                   pw_indptr, pw_indices, deg, c1, c2, c3,
                                   st)
        else:
            if use_weights:
                lo = 0
                hi = W - 1
                target = u[i, 1]
                while lo < hi:
                    mid = (lo + hi) // 2
                    if target < cumw[mid]:
                        hi = mid
                    else:
                        lo = mid + 1
                w = lo
            else:
                w = int(u[i, 1] * W)
                if w >= W:
                    w = W - 1
            z_old = z[w]
            lin, viol_delta = _flip_step(w, z, n_p, n_w, x, wp_indptr,
                                         wp_indices, pw_indptr, pw_indices,
                                         deg, c1, c2, c3, st)
            delta = lin - lam * viol_delta
            accepted = u2 <= 0.0 or math.log(u2) < delta
            if accepted:
                st[_ACCEPTED] += 1
                acc[w] += z_old * (st[_T_KEPT] - mark[w])
                mark[w] = st[_T_KEPT]
            else:
                _flip_step(w, z, n_p, n_w, x, wp_indptr, wp_indices,
                           pw_indptr, pw_indices, deg, c1, c2, c3, st)

        sweep = sweep0 + i + 1
        if sweep > burn_in and (constrained == 0 or st[_VIOL] == 0):
            st[_T_KEPT] += 1
            y = st[_SUM_Z]
            if st[_T_KEPT] == 1:
                st[_Y_FIRST] = y
            else:
                st[_SUM_YY] += y * st[_Y_PREV]
            st[_SUM_Y] += y
            st[_SUM_Y2] += y * y
            st[_Y_PREV] = y
        if sweep > burn_in and st[_VIOL] == 0:
            st[_AH_COUNT] += 1

        if sweep % TRACE_INTERVAL == 0:
            ltilde = (st[_SUM_Z] * log_pi
                      + (W - st[_SUM_Z]) * log1m_pi
                      + st[_LISTED_ACT] * log_gamma
                      + st[_UNLISTED_ACT] * log1m_gamma
                      + st[_LISTED_INACT] * log_alpha
                      + st[_UNLISTED_INACT] * log1m_alpha
                      - lam * st[_VIOL])
            trace[n_trace, 0] = sweep
            trace[n_trace, 1] = st[_SUM_Z]
            trace[n_trace, 2] = st[_VIOL]
            trace[n_trace, 3] = ltilde
            n_trace += 1
    return n_trace


_sweep_chunk = jit_kernel(_sweep_chunk_core)


@dataclass
class PosteriorSummary:
    """Marginal estimates plus chain diagnostics."""

    whole_ids: list[str]
    marginals: np.ndarray
    acceptance_rate: float
    kept_fraction: float  # fraction of post-burn-in sweeps averaged
    ah_fraction: float  # fraction of post-burn-in sweeps satisfying AH
    kept_count: int
    sweeps: int
    burn_in: int
    lam: float
    seed: object
    mode: str
    lag1_autocorr: float
    teleport_rate: float = 0.0
    teleport_attempts: int = 0
    teleport_accepts: int = 0
    generator: str = GENERATOR_ID
    backend: str = BACKEND


def run_chain(system: IncidenceSystem, x, params: ModelParams, sweeps: int,
              burn_in: int = 0, seed: int = 0, mode: str = "constrained",
              trace_path=None, proposal_weights=None,
              teleport_rate: float | None = None) -> PosteriorSummary:
    """Sample whole marginals by Metropolis random walk.

    One sweep is one proposed move: with probability ``teleport_rate``
    a subset teleport flipping a random subset of wholes (half uniform,
    half sparse at inclusion rate ``teleport_inclusion_rate(pi)``), else
    a single-whole flip.  Teleports need n_wholes <= 53 so the subset
    code fits one uniform; the default rate is ``TELEPORT_RATE`` for
    systems within that bound and 0.0 above it, where single flips are
    the only move.  ``constrained`` mode penalizes violations by
    ``params.lam`` and averages only the violation-free post-burn-in
    states; ``unconstrained`` mode drops the penalty and averages every
    post-burn-in state.  ``proposal_weights`` optionally biases which
    whole a single flip proposes (the acceptance rule needs no
    correction because the proposal does not depend on the state).
    """
    if mode not in ("constrained", "unconstrained"):
        raise ValueError(f"unknown mode: {mode!r}")
    if burn_in < 0 or sweeps <= burn_in:
        raise ValueError("need sweeps > burn_in >= 0")
    x = model.as_part_vector(x, system)
    lam = float(params.lam) if mode == "constrained" else 0.0
    constrained = 1 if mode == "constrained" else 0
    c = objective_coefficients(params)
    W = system.n_wholes

    if teleport_rate is None:
        q_tele = TELEPORT_RATE if W <= TELEPORT_MAX_WHOLES else 0.0
    else:
        q_tele = float(teleport_rate)
        if not 0.0 <= q_tele <= 1.0:
            raise ValueError("teleport_rate must be in [0, 1]")
        if q_tele > 0.0 and W > TELEPORT_MAX_WHOLES:
            raise ValueError(
                "subset teleports encode the flipped subset in one "
                f"uniform, which needs n_wholes <= {TELEPORT_MAX_WHOLES}; "
                f"got {W}")
    two_pow = 2.0 ** W if W <= TELEPORT_MAX_WHOLES else 0.0
    theta = teleport_inclusion_rate(params.pi)

    use_weights = proposal_weights is not None
    if use_weights:
        wts = np.asarray(proposal_weights, dtype=np.float64)
        if wts.shape != (W,) or (wts < 0).any() or wts.sum() <= 0:
            raise ValueError("proposal_weights must be nonnegative, "
                             "nonzero, one per whole")
        cumw = np.cumsum(wts) / wts.sum()
        cumw[-1] = 1.0
    else:
        cumw = np.ones(1)

    z = np.zeros(W, dtype=np.uint8)
    n_p = np.zeros(system.n_parts, dtype=np.int64)
    n_w = np.zeros(W, dtype=np.int64)
    st = np.zeros(_N_COUNTERS, dtype=np.int64)
    st[_LISTED_INACT] = int(x.sum())
    st[_UNLISTED_INACT] = int((x == 0).sum())
    acc = np.zeros(W, dtype=np.int64)
    mark = np.zeros(W, dtype=np.int64)

    wp_indptr = system.wp_indptr.astype(np.int64)
    wp_indices = system.wp_indices.astype(np.int64)
    pw_indptr = system.pw_indptr.astype(np.int64)
    pw_indices = system.pw_indices.astype(np.int64)
    deg = system.deg_wholes.astype(np.int64)
    x64 = x.astype(np.int64)

    rng = np.random.default_rng(seed)
    trace_file = open(trace_path, "w") if trace_path is not None else None
    if trace_file:
        trace_file.write("sweep\tactive_wholes\tviolations\ttarget\n")

    p = params
    done = 0
    try:
        while done < sweeps:
            m = min(AUDIT_INTERVAL, sweeps - done)
            u = rng.random((m, 3))
            trace_buf = np.empty((m // TRACE_INTERVAL + 2, 4))
            n_trace = _sweep_chunk(
                z, n_p, n_w, x64, wp_indptr, wp_indices, pw_indptr,
                pw_indices, deg, u, cumw, use_weights, q_tele, theta,
                two_pow, c.c1, c.c2, c.c3, lam,
                math.log(p.pi), math.log1p(-p.pi), math.log(p.gamma),
                math.log1p(-p.gamma), math.log(p.alpha), math.log1p(-p.alpha),
                done, burn_in, constrained, st, acc, mark, trace_buf)
            done += m
            if trace_file:
                for r in range(n_trace):
                    trace_file.write(
                        f"{int(trace_buf[r, 0])}\t{int(trace_buf[r, 1])}\t"
                        f"{int(trace_buf[r, 2])}\t{trace_buf[r, 3]:.6f}\n")
            _audit_arrays(system, x, z, n_p, n_w, st)
    finally:
        if trace_file:
            trace_file.close()

    kept = int(st[_T_KEPT])
    n_samples = sweeps - burn_in
    if kept == 0:
        raise ZeroKeptError(
            "no post-burn-in state satisfied the activation rule; "
            "increase the penalty weight lam or run more sweeps")
    acc_final = acc + z.astype(np.int64) * (kept - mark)
    marginals = acc_final / kept

    ah_fraction = st[_AH_COUNT] / n_samples
    if mode == "constrained" and params.lam == 0 and ah_fraction < 0.05:
        warnings.warn(
            "lam=0 keeps few violation-free states "
            f"({ah_fraction:.3f}); consider a positive penalty",
            stacklevel=2)

    lag1 = math.nan
    T = kept
    if T >= 3:
        ybar = st[_SUM_Y] / T
        den = st[_SUM_Y2] - T * ybar * ybar
        num = (st[_SUM_YY]
               - ybar * (2 * st[_SUM_Y] - st[_Y_FIRST] - st[_Y_PREV])
               + (T - 1) * ybar * ybar)
        if den > 1e-12:
            lag1 = num / den

    return PosteriorSummary(
        whole_ids=list(system.wholes),
        marginals=marginals,
        acceptance_rate=st[_ACCEPTED] / sweeps,
        kept_fraction=kept / n_samples,
        ah_fraction=ah_fraction,
        kept_count=kept,
        sweeps=sweeps,
        burn_in=burn_in,
        lam=lam,
        seed=seed,
        mode=mode,
        lag1_autocorr=lag1,
        teleport_rate=q_tele,
        teleport_attempts=int(st[_TELE_ATT]),
        teleport_accepts=int(st[_TELE_ACC]),
    )


def _audit_arrays(system, x, z, n_p, n_w, st) -> None:
    """From-scratch recomputation of the kernel state; exact or error."""
    a = model.induced_activities(z, system)
    n_p_ref = np.add.reduceat(
        z[system.pw_indices].astype(np.int64), system.pw_indptr[:-1])
    n_w_ref = np.add.reduceat(
        a[system.wp_indices].astype(np.int64), system.wp_indptr[:-1])
    viol_ref = int(((z == 0) & (n_w_ref == system.deg_wholes)).sum())
    la = int((a & (x == 1)).sum())
    ua = int((a & (x == 0)).sum())
    ok = (np.array_equal(n_p_ref, n_p)
          and np.array_equal(n_w_ref, n_w)
          and viol_ref == st[_VIOL]
          and int(z.sum()) == st[_SUM_Z]
          and la == st[_LISTED_ACT]
          and ua == st[_UNLISTED_ACT]
          and int(x.sum()) - la == st[_LISTED_INACT]
          and int((x == 0).sum()) - ua == st[_UNLISTED_INACT])
    if not ok:
        raise RuntimeError(
            "incremental chain state diverged from recomputation "
            f"(violations {int(st[_VIOL])} vs {viol_ref})")


def merge_summaries(summaries: list[PosteriorSummary]) -> PosteriorSummary:
    """Combine independent chains by kept-count weighted averaging."""
    if not summaries:
        raise ValueError("nothing to merge")
    first = summaries[0]
    for s in summaries[1:]:
        if s.mode != first.mode or s.whole_ids != first.whole_ids:
            raise ValueError("chains disagree on mode or system")
    kept = np.array([s.kept_count for s in summaries], dtype=np.float64)
    total_sweeps = sum(s.sweeps for s in summaries)
    n_samples = sum(s.sweeps - s.burn_in for s in summaries)
    marg = np.zeros_like(first.marginals)
    for s, k in zip(summaries, kept):
        marg += s.marginals * k
    marg /= kept.sum()
    return PosteriorSummary(
        whole_ids=first.whole_ids,
        marginals=marg,
        acceptance_rate=sum(s.acceptance_rate * s.sweeps
                            for s in summaries) / total_sweeps,
        kept_fraction=kept.sum() / n_samples,
        ah_fraction=sum(s.ah_fraction * (s.sweeps - s.burn_in)
                        for s in summaries) / n_samples,
        kept_count=int(kept.sum()),
        sweeps=total_sweeps,
        burn_in=sum(s.burn_in for s in summaries),
        lam=first.lam,
        seed=tuple(s.seed for s in summaries),
        mode=first.mode,
        lag1_autocorr=float(sum(s.lag1_autocorr * k
                                for s, k in zip(summaries, kept))
                            / kept.sum()),
        teleport_rate=sum(s.teleport_rate * s.sweeps
                          for s in summaries) / total_sweeps,
        teleport_attempts=sum(s.teleport_attempts for s in summaries),
        teleport_accepts=sum(s.teleport_accepts for s in summaries),
    )
