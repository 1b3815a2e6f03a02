"""Probability model tying whole activity to part-level reports.

A whole is either active (z=1) or not.  A part is active exactly when
some containing whole is active; an active part is reported with
probability ``gamma``, an inactive one with probability ``alpha``
(0 < alpha < gamma < 1).  Wholes are a priori independent Bernoulli(pi).

The activation hypothesis (AH) is the closure condition: a whole must be
active whenever every one of its parts is active.  States violating it
get one violation flag per offending whole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .system import IncidenceSystem


@dataclass(frozen=True)
class ModelParams:
    """Model parameters; ``lam`` is the violation penalty weight."""

    alpha: float
    gamma: float
    pi: float
    lam: float = 5.0

    def __post_init__(self):
        if not (0.0 < self.alpha < self.gamma < 1.0):
            raise ValueError("need 0 < alpha < gamma < 1")
        if not (0.0 < self.pi < 1.0):
            raise ValueError("need 0 < pi < 1")
        if self.lam < 0.0:
            raise ValueError("lam must be >= 0")


@dataclass(frozen=True)
class Observation:
    """Binary report over parts; x[p] = 1 when part p is listed."""

    x: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(np.asarray(self.x), dtype=np.uint8)
        if x.ndim != 1:
            raise ValueError("x must be one-dimensional")
        if x.size and x.max() > 1:
            raise ValueError("x must be binary")
        object.__setattr__(self, "x", x)

    @classmethod
    def from_ids(cls, system: IncidenceSystem, listed_ids) -> "Observation":
        x = np.zeros(system.n_parts, dtype=np.uint8)
        for name in listed_ids:
            p = system.part_index.get(name)
            if p is not None:
                x[p] = 1
        return cls(x)


@dataclass(frozen=True)
class ObjectiveCoefficients:
    """Per-variable weights of the posterior, up to an additive constant.

    c1 multiplies each active whole, c2 each active unlisted part,
    c3 each active listed part.
    """

    c1: float
    c2: float
    c3: float


def as_part_vector(x, system: IncidenceSystem) -> np.ndarray:
    """Coerce an Observation or array-like to a uint8 part vector."""
    if isinstance(x, Observation):
        arr = x.x
    else:
        arr = np.ascontiguousarray(np.asarray(x), dtype=np.uint8)
    if arr.shape != (system.n_parts,):
        raise ValueError(
            f"x has shape {arr.shape}, expected ({system.n_parts},)")
    return arr


def _as_whole_vector(z, system: IncidenceSystem) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(z), dtype=np.uint8)
    if arr.shape != (system.n_wholes,):
        raise ValueError(
            f"z has shape {arr.shape}, expected ({system.n_wholes},)")
    return arr


def induced_activities(z, system: IncidenceSystem) -> np.ndarray:
    """Part activities implied by whole states: a[p] = max z over containers."""
    z = _as_whole_vector(z, system)
    # Every part has >= 1 container, so reduceat segments are non-empty.
    return np.maximum.reduceat(z[system.pw_indices], system.pw_indptr[:-1])


def inverse_activities(a, system: IncidenceSystem) -> np.ndarray:
    """Whole states recovered from part activities: z[w] = min a over members."""
    a = np.ascontiguousarray(np.asarray(a), dtype=np.uint8)
    if a.shape != (system.n_parts,):
        raise ValueError(
            f"a has shape {a.shape}, expected ({system.n_parts},)")
    return np.minimum.reduceat(a[system.wp_indices], system.wp_indptr[:-1])


def project_to_ah(z, system: IncidenceSystem) -> np.ndarray:
    """Smallest AH state above ``z``: turn on every fully covered whole."""
    return inverse_activities(induced_activities(z, system), system)


def violations(z, system: IncidenceSystem) -> np.ndarray:
    """Per-whole violation flags: inactive wholes whose parts are all active."""
    z = _as_whole_vector(z, system)
    covered = project_to_ah(z, system)
    return (covered & (1 - z)).astype(np.uint8)


def satisfies_ah(z, system: IncidenceSystem, method: str = "roundtrip") -> bool:
    """Check the activation hypothesis for a whole-state vector.

    ``method="roundtrip"`` tests that recovering whole states from the
    induced part activities reproduces ``z``.  ``method="inequalities"``
    evaluates the three linear constraint families on ``(z, induced a)``:
    z_w <= a_p on every incidence, a_p <= sum of containing z, and per
    whole sum_{p in w} (z_w - 2 a_p + 2) >= 1.  Both give the same answer.
    """
    z = _as_whole_vector(z, system)
    if method == "roundtrip":
        a = induced_activities(z, system)
        return bool(np.array_equal(inverse_activities(a, system), z))
    if method == "inequalities":
        a = induced_activities(z, system).astype(np.int64)
        zi = z.astype(np.int64)
        deg = system.deg_wholes
        # z_w <= a_p for every (w, p) incidence
        per_edge = np.repeat(zi, deg) <= a[system.wp_indices]
        if not per_edge.all():
            return False
        # a_p <= sum of z over containers
        sums = np.add.reduceat(zi[system.pw_indices], system.pw_indptr[:-1])
        if not (a <= sums).all():
            return False
        # per whole: sum_p (z_w - 2 a_p + 2) >= 1
        asum = np.add.reduceat(a[system.wp_indices], system.wp_indptr[:-1])
        lhs = deg * (zi + 2) - 2 * asum
        return bool((lhs >= 1).all())
    raise ValueError(f"unknown method: {method!r}")


def log_posterior(z, a, x, params: ModelParams,
                  system: IncidenceSystem | None = None) -> float:
    """Joint log probability of whole states, part activities and report.

    ``a`` may be None, in which case it is induced from ``z`` (requires
    ``system``).  The value includes all constants.
    """
    z = np.asarray(z, dtype=np.uint8)
    if a is None:
        if system is None:
            raise ValueError("need system to induce activities")
        a = induced_activities(z, system)
    a = np.asarray(a, dtype=np.uint8)
    x = np.asarray(x if not isinstance(x, Observation) else x.x, dtype=np.uint8)
    nz = int(z.sum())
    n_active = int(a.sum())
    listed_active = int((a & x).sum())
    listed_inactive = int(x.sum()) - listed_active
    unlisted_active = n_active - listed_active
    unlisted_inactive = (a.size - n_active) - listed_inactive
    p = params
    return (
        nz * math.log(p.pi)
        + (z.size - nz) * math.log1p(-p.pi)
        + listed_active * math.log(p.gamma)
        + unlisted_active * math.log1p(-p.gamma)
        + listed_inactive * math.log(p.alpha)
        + unlisted_inactive * math.log1p(-p.alpha)
    )


def penalized_log_posterior(z, x, system: IncidenceSystem,
                            params: ModelParams) -> float:
    """Log posterior of ``z`` minus ``lam`` per violated whole."""
    z = _as_whole_vector(z, system)
    a = induced_activities(z, system)
    base = log_posterior(z, a, x, params)
    return base - params.lam * float(violations(z, system).sum())


def objective_coefficients(params: ModelParams) -> ObjectiveCoefficients:
    """Linear weights of the log posterior up to an additive constant."""
    p = params
    return ObjectiveCoefficients(
        c1=math.log(p.pi) - math.log1p(-p.pi),
        c2=math.log1p(-p.gamma) - math.log1p(-p.alpha),
        c3=math.log(p.gamma) - math.log(p.alpha),
    )


def linear_objective_value(z, a, x, params: ModelParams) -> float:
    """Evaluate the up-to-constant objective c1*sum(z) + sum_p c(a_p)."""
    z = np.asarray(z, dtype=np.int64)
    a = np.asarray(a, dtype=np.int64)
    x = np.asarray(x if not isinstance(x, Observation) else x.x, dtype=np.int64)
    c = objective_coefficients(params)
    listed_active = int((a & (x == 1)).sum())
    unlisted_active = int((a & (x == 0)).sum())
    return c.c1 * int(z.sum()) + c.c2 * unlisted_active + c.c3 * listed_active
