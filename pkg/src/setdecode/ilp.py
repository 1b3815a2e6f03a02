"""Exact 0/1 integer linear programming by branch and bound.

Maximizes c.x over binary x subject to sparse <=-rows, with optional
pre-fixed variables.  Bounding uses the dense simplex in :mod:`lp`.
Search is best-first on the LP bound with depth-first tie-breaking.
Branching is single-variable (most fractional, ties to the lowest
index) unless the caller hands over covering structure, in which case
spread covering rows are branched as two-sided disjunctions (see
``solve_binary``).  Everything is deterministic for identical input.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import LpError, LpResult, solve_lp

INT_TOL = 1e-6
VALUE_TOL = 1e-9
ROW_TOL = 1e-7
# covering-row disjunction: minimum indicator-vs-best-member gap
SPREAD_MIN = 0.25
# consecutive slack node optima before an activated lazy row is parked;
# parking proved counterproductive (re-activation thrash), so effectively off
AGE_LIMIT = 1 << 30


class NodeLimitError(RuntimeError):
    """Node cap reached before optimality was proven."""


@dataclass
class IlpProblem:
    """maximize objective . x, x binary, subject to rows coeffs.x <= bound.

    ``rows`` holds sparse constraints as (indices, coeffs, bound).
    ``fixed`` maps variable index -> forced binary value.
    """

    n_vars: int
    objective: np.ndarray
    rows: list[tuple[np.ndarray, np.ndarray, float]]
    fixed: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=np.float64)
        if self.objective.shape != (self.n_vars,):
            raise ValueError("objective length != n_vars")
        norm_rows = []
        for idx, coef, bound in self.rows:
            idx = np.asarray(idx, dtype=np.int64)
            coef = np.asarray(coef, dtype=np.float64)
            if idx.shape != coef.shape:
                raise ValueError("row indices/coefficients length mismatch")
            if idx.size and (idx.min() < 0 or idx.max() >= self.n_vars):
                raise ValueError("constraint references invalid variable")
            norm_rows.append((idx, coef, float(bound)))
        self.rows = norm_rows
        for j, v in self.fixed.items():
            if not 0 <= j < self.n_vars:
                raise ValueError("fixed variable out of range")
            if v not in (0, 1):
                raise ValueError("fixed value must be 0 or 1")
        self._dense = None

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """(A, b) as dense arrays; cached."""
        if self._dense is None:
            A = np.zeros((len(self.rows), self.n_vars))
            b = np.empty(len(self.rows))
            for i, (idx, coef, bound) in enumerate(self.rows):
                A[i, idx] = coef
                b[i] = bound
            self._dense = (A, b)
        return self._dense

    def dump(self) -> str:
        """Line-oriented text dump: objective row, then one row per line."""
        out = ["max " + " ".join(f"{v:+g}" for v in self.objective)]
        for idx, coef, bound in self.rows:
            terms = " ".join(f"{c:+g}*x{j}" for j, c in zip(idx, coef))
            out.append(f"{terms} <= {bound:g}")
        for j, v in sorted(self.fixed.items()):
            out.append(f"fix x{j} = {v}")
        return "\n".join(out) + "\n"


@dataclass
class IlpSolution:
    assignment: np.ndarray | None
    value: float | None
    status: str  # "optimal" | "infeasible"
    node_count: int
    runtime: float
    alt_optima: bool
    lp_iterations: int


def solve_lp_relaxation(problem: IlpProblem, bounds=None) -> LpResult:
    """LP relaxation of ``problem`` under per-variable [lo, hi] in [0,1]."""
    A, b = problem.dense()
    if bounds is None:
        lo = np.zeros(problem.n_vars)
        hi = np.ones(problem.n_vars)
    else:
        lo, hi = bounds
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if (lo < -1e-12).any() or (hi > 1 + 1e-12).any():
            raise ValueError("bounds must lie within [0,1]")
    if problem.fixed:
        lo = lo.copy()
        hi = hi.copy()
        for j, v in problem.fixed.items():
            lo[j] = hi[j] = float(v)
    return solve_lp(A, b, problem.objective, lo, hi)


def _row_violations(A, b, x, tol=1e-7):
    if A.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    slack = b - A @ x
    return np.flatnonzero(slack < -tol)


def solve_binary(problem: IlpProblem, node_limit: int = 200_000,
                 instrument: list | None = None,
                 lazy_rows: np.ndarray | None = None,
                 warm_assignment: np.ndarray | None = None,
                 covering: list[tuple[int, np.ndarray]] | None = None,
                 prefer_vars: np.ndarray | None = None) -> IlpSolution:
    """Exact binary maximization.

    ``lazy_rows`` is an optional boolean mask marking rows that start
    deactivated.  Any deactivated row violated at a node LP optimum is
    activated for the whole tree and the node re-solved, so every value
    this routine reasons about already satisfies the full row set; the
    mechanism exists purely to keep node LPs small on problems with
    many rarely-binding rows.  Activated rows that stay slack for
    ``AGE_LIMIT`` consecutive node optima are parked again.

    ``warm_assignment`` seeds the incumbent with a known feasible
    binary point so pruning starts at the root.

    ``covering`` lists (indicator, members) variable-index pairs taken
    from rows of the form  x_indicator <= sum of x_members.  When a
    node LP covers such an indicator with many small member fractions,
    single-variable branching barely moves the bound; instead the
    search branches on the disjunction "every member of C1 is zero" /
    "members of C1 sum to at least one" for a deterministic subset C1
    of about half the members, which removes the fractional point from
    both children at once.

    ``prefer_vars`` restricts single-variable branching to the listed
    variables whenever one of them is fractional.

    Raises :class:`NodeLimitError` when the node budget is exhausted
    (never returns a silently suboptimal answer).
    """
    t0 = time.perf_counter()
    A_full, b_full = problem.dense()
    n = problem.n_vars
    m = len(problem.rows)
    c = problem.objective

    if lazy_rows is None:
        lazy = np.zeros(m, dtype=bool)
    else:
        lazy = np.asarray(lazy_rows, dtype=bool).copy()
        if lazy.shape != (m,):
            raise ValueError("lazy_rows length != row count")
    active = ~lazy
    age = np.zeros(m, dtype=np.int64)

    lo0 = np.zeros(n)
    hi0 = np.ones(n)
    for j, v in problem.fixed.items():
        lo0[j] = hi0[j] = float(v)

    best_val = -np.inf
    best_x = None
    alt = False
    if warm_assignment is not None:
        wa = np.asarray(warm_assignment, dtype=np.float64)
        if wa.shape != (n,):
            raise ValueError("warm assignment length != n_vars")
        if np.abs(wa - np.round(wa)).max() > INT_TOL:
            raise ValueError("warm assignment is not binary")
        if ((wa < lo0 - INT_TOL) | (wa > hi0 + INT_TOL)).any():
            raise ValueError("warm assignment breaks a fixed variable")
        if _row_violations(A_full, b_full, wa, tol=ROW_TOL).size:
            raise ValueError("warm assignment violates a constraint row")
        best_x = np.round(wa).astype(np.int8)
        best_val = float(np.dot(c, best_x))

    nodes = 0
    lp_iters = 0
    seq = 0

    def eval_node(lo, hi, extra, depth):
        """LP-evaluate one node; activates violated parked rows."""
        nonlocal nodes, lp_iters
        nodes += 1
        if nodes > node_limit:
            raise NodeLimitError(
                f"node limit {node_limit} exceeded "
                f"(n={n}, rows={int(active.sum())})")
        while True:
            if extra:
                Ae = np.zeros((len(extra), n))
                for r, ids in enumerate(extra):
                    Ae[r, ids] = -1.0
                A = np.vstack((A_full[active], Ae))
                b = np.concatenate((b_full[active],
                                    np.full(len(extra), -1.0)))
            else:
                A = A_full[active]
                b = b_full[active]
            res = solve_lp(A, b, c, lo, hi)
            lp_iters += res.iterations
            if res.status != "optimal":
                break
            parked = np.flatnonzero(~active)
            if parked.size:
                slack = b_full[parked] - A_full[parked] @ res.x
                viol = parked[slack < -ROW_TOL]
                if viol.size:
                    active[viol] = True
                    age[viol] = 0
                    continue
            pool = np.flatnonzero(active & lazy)
            if pool.size:
                loose = (b_full[pool] - A_full[pool] @ res.x) > ROW_TOL
                age[pool[~loose]] = 0
                age[pool[loose]] += 1
                drop = pool[age[pool] >= AGE_LIMIT]
                if drop.size:
                    active[drop] = False
                    age[drop] = 0
            break
        if instrument is not None:
            instrument.append({
                "lo": lo.copy(), "hi": hi.copy(), "depth": depth,
                "lp_value": res.value, "status": res.status,
                "rows_active": int(active.sum()),
            })
        return res

    heap = []
    root = eval_node(lo0, hi0, (), 0)
    if root.status == "optimal":
        if root.value > best_val + VALUE_TOL:
            seq += 1
            heapq.heappush(heap, (-root.value, 0, -seq, root.x, lo0, hi0,
                                  ()))
        elif root.value >= best_val - VALUE_TOL and best_x is not None:
            alt = True

    while heap:
        neg_bound, neg_depth, _, x_lp, lo, hi, extra = heapq.heappop(heap)
        bound = -neg_bound
        depth = -neg_depth
        if bound <= best_val + VALUE_TOL:
            if bound >= best_val - VALUE_TOL and best_x is not None:
                alt = True
            continue

        frac = np.abs(x_lp - np.round(x_lp))
        if frac.max() <= INT_TOL:
            x_int = np.round(x_lp).astype(np.int8)
            # guard against rounding off a tight row
            if _row_violations(A_full, b_full, x_int.astype(np.float64),
                               tol=ROW_TOL).size == 0:
                val = float(np.dot(c, x_int))
                if val > best_val + VALUE_TOL:
                    best_val = val
                    best_x = x_int
                    alt = False
                elif (val >= best_val - VALUE_TOL and best_x is not None
                      and not np.array_equal(x_int, best_x)):
                    alt = True
                continue

        children = _branch(x_lp, frac, lo, hi, extra, covering, prefer_vars)
        for clo, chi, cex in children:
            res = eval_node(clo, chi, cex, depth + 1)
            if res.status != "optimal":
                continue
            if res.value <= best_val + VALUE_TOL:
                if res.value >= best_val - VALUE_TOL and best_x is not None:
                    alt = True
                continue
            seq += 1
            heapq.heappush(
                heap, (-res.value, -(depth + 1), -seq, res.x, clo, chi, cex))

    runtime = time.perf_counter() - t0
    if best_x is None:
        return IlpSolution(None, None, "infeasible", nodes, runtime, False,
                           lp_iters)
    return IlpSolution(best_x, best_val, "optimal", nodes, runtime, alt,
                       lp_iters)


def _branch(x_lp, frac, lo, hi, extra, covering, prefer_vars):
    """Children of a fractional node as (lo, hi, extra) triples."""
    if covering:
        best_k = -1
        best_spread = SPREAD_MIN
        for k, (ind, mem) in enumerate(covering):
            if x_lp[ind] < 0.5:
                continue
            spread = x_lp[ind] - x_lp[mem].max()
            if spread > best_spread:
                best_spread = spread
                best_k = k
        if best_k >= 0:
            mem = covering[best_k][1]
            vals = x_lp[mem]
            order = np.argsort(-vals, kind="stable")
            c1 = []
            cum = 0.0
            for k in order:
                v = float(vals[k])
                if v <= 1e-9 or (c1 and cum + v >= 0.95):
                    break
                c1.append(int(mem[k]))
                cum += v
            if c1:
                c1a = np.array(c1, dtype=np.int64)
                hi_zero = hi.copy()
                hi_zero[c1a] = 0.0
                return [(lo, hi_zero, extra), (lo, hi, extra + (c1a,))]
    if prefer_vars is not None:
        pf = frac[prefer_vars]
        if pf.max() > INT_TOL:
            j = int(prefer_vars[int(np.argmax(np.minimum(pf, 1.0 - pf)))])
        else:
            j = int(np.argmax(np.minimum(frac, 1.0 - frac)))
    else:
        j = int(np.argmax(np.minimum(frac, 1.0 - frac)))
    children = []
    for v in (0.0, 1.0):
        clo = lo.copy()
        chi = hi.copy()
        clo[j] = chi[j] = v
        children.append((clo, chi, extra))
    return children
