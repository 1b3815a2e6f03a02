"""Dense simplex for box-constrained linear programs.

Solves  maximize c.x  subject to  A.x <= b,  lo <= x <= hi  with a
two-phase bounded-variable tableau simplex.  Rows that start infeasible
get one artificial column each; phase one drives the artificials to
zero, phase two optimizes the real objective.  Nonbasic variables sit
at a finite bound and may move to the opposite bound without a basis
change (bound flip).

Pricing is Dantzig (most positive rate of improvement) and switches to
Bland's smallest-index rule after a run of degenerate pivots, which
guarantees termination.  Tie-breaking is deterministic everywhere:
entering ties go to the lowest column index, leaving ties to the lowest
basic variable index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import jit_kernel

STATUS_OPTIMAL = 0
STATUS_INFEASIBLE = 1
STATUS_ITER_LIMIT = 2
STATUS_UNBOUNDED = 3
STATUS_SINGULAR = 4

_DJ_TOL = 1e-9
_PIV_TOL = 1e-9
_FEAS_TOL = 1e-9
_BLAND_AFTER = 60  # consecutive degenerate pivots before Bland pricing


class LpError(RuntimeError):
    """Numerical failure inside the simplex (diagnostics in message)."""


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None
    value: float | None
    iterations: int


def _simplex_core(A, b, c, lo, hi, max_iter):
    """Single-source simplex kernel (numba-compiled when enabled).

    Returns (status_code, x_structural, iterations).
    """
    m, n = A.shape
    babs = 0.0
    for i in range(m):
        if abs(b[i]) > babs:
            babs = abs(b[i])
    feas_tol = _FEAS_TOL * (1.0 + babs)

    x0 = lo.copy()
    s0 = b - np.dot(A, x0)
    art_rows = np.where(s0 < -feas_tol)[0]
    k = art_rows.size
    ncols = n + m + k

    Tab = np.zeros((m, ncols))
    art_of_row = np.full(m, -1, dtype=np.int64)
    for idx in range(k):
        art_of_row[art_rows[idx]] = idx

    lo_f = np.zeros(ncols)
    hi_f = np.full(ncols, np.inf)
    lo_f[:n] = lo
    hi_f[:n] = hi

    xval = np.zeros(ncols)
    xval[:n] = x0
    basis = np.empty(m, dtype=np.int64)
    in_basis = np.zeros(ncols, dtype=np.bool_)
    at_upper = np.zeros(ncols, dtype=np.bool_)

    for i in range(m):
        ai = art_of_row[i]
        if ai >= 0:
            # row starts violated: negate so the artificial has +1
            Tab[i, :n] = -A[i, :]
            Tab[i, n + i] = -1.0
            Tab[i, n + m + ai] = 1.0
            basis[i] = n + m + ai
            xval[n + m + ai] = -s0[i]
        else:
            Tab[i, :n] = A[i, :]
            Tab[i, n + i] = 1.0
            basis[i] = n + i
            xval[n + i] = s0[i]
        in_basis[basis[i]] = True

    phase = 1 if k > 0 else 2
    obj = np.zeros(ncols)
    if phase == 1:
        obj[n + m:] = -1.0
    else:
        obj[:n] = c
    zrow = obj - np.dot(obj[basis], Tab)

    niter = 0
    degen_run = 0
    use_bland = False
    while True:
        if niter >= max_iter:
            return STATUS_ITER_LIMIT, xval[:n].copy(), niter

        free = (~in_basis) & (hi_f > lo_f)
        score = np.where(at_upper, -zrow, zrow)
        score = np.where(free, score, -1.0)
        if use_bland:
            cand = score > _DJ_TOL
            any_cand = False
            q = 0
            for j in range(ncols):
                if cand[j]:
                    q = j
                    any_cand = True
                    break
            if not any_cand:
                entering = -1
            else:
                entering = q
        else:
            q = int(np.argmax(score))
            entering = q if score[q] > _DJ_TOL else -1

        if entering < 0:
            if phase == 1:
                infeas = 0.0
                for idx in range(k):
                    infeas += xval[n + m + idx]
                if infeas > feas_tol:
                    return STATUS_INFEASIBLE, xval[:n].copy(), niter
                for idx in range(k):
                    hi_f[n + m + idx] = 0.0
                    xval[n + m + idx] = 0.0
                phase = 2
                obj = np.zeros(ncols)
                obj[:n] = c
                zrow = obj - np.dot(obj[basis], Tab)
                use_bland = False
                degen_run = 0
                continue
            return STATUS_OPTIMAL, xval[:n].copy(), niter

        q = entering
        up = not at_upper[q]
        d = 1.0 if up else -1.0
        ycol = Tab[:, q].copy()
        rate = -d * ycol  # basic value change per unit step
        xb = xval[basis]
        lob = lo_f[basis]
        hib = hi_f[basis]
        pos = rate > _PIV_TOL
        neg = rate < -_PIV_TOL
        t_up = np.where(pos, (hib - xb) / np.where(pos, rate, 1.0), np.inf)
        t_dn = np.where(neg, (xb - lob) / np.where(neg, -rate, 1.0), np.inf)
        t_rows = np.minimum(t_up, t_dn)
        t_rows = np.maximum(t_rows, 0.0)
        tmin = np.inf
        for i in range(m):
            if t_rows[i] < tmin:
                tmin = t_rows[i]
        t_own = hi_f[q] - lo_f[q]

        if t_own <= tmin:
            if not np.isfinite(t_own):
                return STATUS_UNBOUNDED, xval[:n].copy(), niter
            xbn = xb + rate * t_own
            for i in range(m):
                xval[basis[i]] = xbn[i]
            xval[q] = hi_f[q] if up else lo_f[q]
            at_upper[q] = up
            niter += 1
            degen_run = 0
            continue

        # leaving row: smallest basic variable index among the blocking rows
        r = -1
        bv = ncols + 1
        for i in range(m):
            if t_rows[i] == tmin and basis[i] < bv:
                r = i
                bv = basis[i]
        piv = Tab[r, q]
        if abs(piv) < 1e-11:
            return STATUS_SINGULAR, xval[:n].copy(), niter

        leaving = basis[r]
        hit_upper = rate[r] > 0.0
        xbn = xb + rate * tmin
        for i in range(m):
            xval[basis[i]] = xbn[i]
        xval[leaving] = hib[r] if hit_upper else lob[r]
        xval[q] = xval[q] + d * tmin
        at_upper[leaving] = hit_upper

        prow = Tab[r, :] / piv
        colq = Tab[:, q].copy()
        colq[r] = 0.0
        Tab -= colq.reshape(m, 1) * prow.reshape(1, ncols)
        Tab[r, :] = prow
        zq = zrow[q]
        zrow = zrow - zq * prow
        Tab[:, q] = 0.0
        Tab[r, q] = 1.0
        zrow[q] = 0.0
        in_basis[q] = True
        in_basis[leaving] = False
        basis[r] = q

        niter += 1
        if tmin <= 1e-12:
            degen_run += 1
            if degen_run >= _BLAND_AFTER:
                use_bland = True
        else:
            degen_run = 0


_simplex = jit_kernel(_simplex_core)


def solve_lp(A, b, c, lo, hi, max_iter: int | None = None) -> LpResult:
    """Maximize ``c @ x`` over ``A @ x <= b``, ``lo <= x <= hi``.

    Raises
    ------
    LpError
        On iteration-limit or numerical failure (never silently).
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    c = np.ascontiguousarray(c, dtype=np.float64)
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    m, n = A.shape
    if (lo > hi + 1e-12).any():
        return LpResult("infeasible", None, None, 0)
    if m == 0:
        x = np.where(c > 0, hi, lo)
        return LpResult("optimal", x, float(np.dot(c, x)), 0)
    if max_iter is None:
        max_iter = 200 * (m + n) + 2000
    code, x, niter = _simplex(A, b, c, lo, hi, max_iter)
    if code == STATUS_OPTIMAL:
        return LpResult("optimal", x, float(np.dot(c, x)), niter)
    if code == STATUS_INFEASIBLE:
        return LpResult("infeasible", None, None, niter)
    names = {
        STATUS_ITER_LIMIT: "iteration limit exceeded",
        STATUS_UNBOUNDED: "unbounded direction (should not occur with box bounds)",
        STATUS_SINGULAR: "singular pivot",
    }
    raise LpError(
        f"simplex failed: {names.get(code, code)} "
        f"(m={m}, n={n}, iterations={niter})")
