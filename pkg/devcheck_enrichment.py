"""Cross-check enrichment against exact-fraction references."""
import itertools
from fractions import Fraction
from math import comb

import numpy as np

from setdecode.enrichment import bh_adjust, fisher_test, log_hypergeom_tail
from setdecode.system import build_system

rng = np.random.default_rng(55)


def tail_fraction(N, K, m, k):
    num = Fraction(0)
    for j in range(k, min(m, K) + 1):
        num += Fraction(comb(K, j) * comb(N - K, m - j))
    return num / comb(N, m)


# S3 anchor: N=3, K=2, w1 (m=2, k=2) -> 1/3
s3 = build_system({"w1": ["p1", "p2"], "w2": ["p2", "p3"],
                   "w3": ["p1", "p2", "p3"]})
res = fisher_test(s3, [1, 1, 0])
assert res.universe_size == 3 and res.listed_total == 2
assert abs(res.p_raw[0] - 1 / 3) < 1e-12, res.p_raw
assert abs(res.p_raw[2] - 1.0) < 1e-12  # whole = universe
assert (res.p_adjusted >= res.p_raw - 1e-15).all()

# k = 0 -> 1 exactly
assert log_hypergeom_tail(10, 4, 3, 0) == 0.0

# exhaustive agreement with the Fraction oracle for all N <= 25
bad = 0
for N in range(1, 26):
    for K in range(0, N + 1):
        for m in range(1, N + 1):
            lo = max(0, m - (N - K))
            for k in range(0, min(m, K) + 1):
                got = np.exp(log_hypergeom_tail(N, K, m, k))
                want = float(tail_fraction(N, K, m, k))
                if abs(got - want) > 1e-10:
                    bad += 1
                    print(N, K, m, k, got, want)
assert bad == 0
print("hypergeometric tail matches Fraction oracle on all N<=25")

# monotonicity in k
for _ in range(200):
    N = int(rng.integers(2, 40))
    K = int(rng.integers(0, N + 1))
    m = int(rng.integers(1, N + 1))
    ps = [log_hypergeom_tail(N, K, m, k) for k in range(0, min(m, K) + 1)]
    assert all(a >= b - 1e-12 for a, b in zip(ps, ps[1:]))

# BH anchors
assert np.allclose(bh_adjust([0.01, 0.02, 0.03]), [0.03, 0.03, 0.03])
assert np.allclose(bh_adjust([1.0, 1.0, 1.0]), [1.0, 1.0, 1.0])
assert np.allclose(bh_adjust([0.2]), [0.2])

# BH reference implementation
def bh_ref(p):
    n = len(p)
    idx = sorted(range(n), key=lambda i: p[i])
    out = [0.0] * n
    best = 1.0
    for rank in range(n, 0, -1):
        i = idx[rank - 1]
        best = min(best, p[i] * n / rank)
        out[i] = best
    return out

for _ in range(300):
    n = int(rng.integers(1, 40))
    p = rng.random(n)
    p[rng.random(n) < 0.2] = 1.0
    p[rng.random(n) < 0.2] = 0.0
    got = bh_adjust(p)
    want = np.array(bh_ref(list(p)))
    assert np.allclose(got, want, atol=1e-12)
    # permutation invariance
    perm = rng.permutation(n)
    assert np.allclose(bh_adjust(p[perm]), got[perm], atol=1e-12)
    assert (got >= p - 1e-15).all()

try:
    bh_adjust([0.5, 1.5])
    raise SystemExit("expected range error")
except ValueError:
    pass

print("done, all enrichment checks passed")
