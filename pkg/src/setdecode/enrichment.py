"""Classical per-whole enrichment baseline.

One-sided upper-tail hypergeometric test per whole (does the whole
contain more listed parts than a uniform draw of its size would?),
followed by Benjamini-Hochberg step-up adjustment.  Tail sums are done
in log space; the universe is the parts that survived system
construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from . import model
from .system import IncidenceSystem


@dataclass
class EnrichmentResult:
    whole_ids: list[str]
    sizes: np.ndarray
    overlaps: np.ndarray  # listed parts per whole
    p_raw: np.ndarray
    p_adjusted: np.ndarray
    universe_size: int
    listed_total: int


def log_hypergeom_tail(N: int, K: int, m: int, k: int) -> float:
    """log P(H >= k) for H ~ Hypergeometric(N, K, m)."""
    if k <= max(0, m - (N - K)):
        return 0.0
    hi = min(m, K)
    if k > hi:
        return -np.inf
    j = np.arange(k, hi + 1)
    lg = gammaln  # log C(n, r) = lg(n+1) - lg(r+1) - lg(n-r+1)
    terms = (lg(K + 1) - lg(j + 1) - lg(K - j + 1)
             + lg(N - K + 1) - lg(m - j + 1) - lg(N - K - m + j + 1)
             - (lg(N + 1) - lg(m + 1) - lg(N - m + 1)))
    return min(float(logsumexp(terms)), 0.0)


def fisher_test(system: IncidenceSystem, x) -> EnrichmentResult:
    """Upper-tail overrepresentation p-value per whole, plus BH column."""
    x = model.as_part_vector(x, system)
    N = system.n_parts
    K = int(x.sum())
    sizes = system.deg_wholes.astype(np.int64)
    overlaps = np.add.reduceat(
        x[system.wp_indices].astype(np.int64), system.wp_indptr[:-1])
    p_raw = np.array([
        np.exp(log_hypergeom_tail(N, K, int(m), int(k)))
        for m, k in zip(sizes, overlaps)])
    return EnrichmentResult(
        whole_ids=list(system.wholes),
        sizes=sizes,
        overlaps=overlaps,
        p_raw=p_raw,
        p_adjusted=bh_adjust(p_raw),
        universe_size=N,
        listed_total=K,
    )


def bh_adjust(pvalues) -> np.ndarray:
    """Benjamini-Hochberg step-up adjustment, original order preserved."""
    p = np.asarray(pvalues, dtype=np.float64)
    if p.ndim != 1:
        raise ValueError("expected a 1-D vector of p-values")
    if p.size == 0:
        return p.copy()
    if np.isnan(p).any() or (p < 0).any() or (p > 1).any():
        raise ValueError("p-values must lie in [0, 1]")
    n = p.size
    order = np.argsort(p, kind="stable")
    ranked = p[order] * n / np.arange(1, n + 1)
    adjusted_sorted = np.minimum.accumulate(ranked[::-1])[::-1]
    adjusted_sorted = np.minimum(adjusted_sorted, 1.0)
    out = np.empty(n)
    out[order] = adjusted_sorted
    return out
