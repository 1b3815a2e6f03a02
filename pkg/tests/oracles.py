"""Pure-python reference implementations used to cross-check the package.

Everything here recomputes results from first principles with plain
loops, sets, and exact fractions.  Nothing imports from the package, so
implementation bugs cannot hide inside their own reference.  All
enumeration helpers take the incidence as ``member_sets``: a list that
holds, per whole, the list of member part indices.
"""

import itertools
import math
from fractions import Fraction
from math import comb


def member_sets_of(system):
    """Read a system's incidence out as plain python lists."""
    return [[int(p) for p in system.members(w)]
            for w in range(system.n_wholes)]


def induced_parts(z, member_sets, n_parts):
    """Part activity as the max over containing wholes."""
    a = [0] * n_parts
    for on, mem in zip(z, member_sets):
        if on:
            for p in mem:
                a[p] = 1
    return a


def violation_flags(z, member_sets, n_parts):
    """Flag each whole that is off while every one of its parts is on."""
    a = induced_parts(z, member_sets, n_parts)
    return [int(not on and all(a[p] for p in mem))
            for on, mem in zip(z, member_sets)]


def satisfies_rule(z, member_sets, n_parts):
    return not any(violation_flags(z, member_sets, n_parts))


def log_posterior(z, x, member_sets, n_parts, alpha, gamma, pi):
    """Full joint log probability, constants included."""
    a = induced_parts(z, member_sets, n_parts)
    val = 0.0
    for on in z:
        val += math.log(pi) if on else math.log(1.0 - pi)
    for p in range(n_parts):
        if a[p]:
            val += math.log(gamma) if x[p] else math.log(1.0 - gamma)
        else:
            val += math.log(alpha) if x[p] else math.log(1.0 - alpha)
    return val


def all_states(n_wholes):
    return itertools.product((0, 1), repeat=n_wholes)


def best_rule_state(x, member_sets, n_parts, alpha, gamma, pi, tol=1e-12):
    """Max log posterior over rule-satisfying states, with all argmaxes."""
    best, arg = -math.inf, []
    for z in all_states(len(member_sets)):
        if not satisfies_rule(z, member_sets, n_parts):
            continue
        v = log_posterior(z, x, member_sets, n_parts, alpha, gamma, pi)
        if v > best + tol:
            best, arg = v, [z]
        elif v > best - tol:
            arg.append(z)
    return best, arg


def posterior_marginals(x, member_sets, n_parts, alpha, gamma, pi,
                        constrained):
    """Per-whole activation marginals by direct state enumeration."""
    logs, states = [], []
    for z in all_states(len(member_sets)):
        if constrained and not satisfies_rule(z, member_sets, n_parts):
            continue
        logs.append(log_posterior(z, x, member_sets, n_parts,
                                  alpha, gamma, pi))
        states.append(z)
    top = max(logs)
    wts = [math.exp(v - top) for v in logs]
    tot = sum(wts)
    n_wholes = len(member_sets)
    marg = [sum(w for w, z in zip(wts, states) if z[j]) / tot
            for j in range(n_wholes)]
    return marg, top


def expected_violation_total(member_sets, n_parts, pi):
    """Mean violation count under independent Bernoulli(pi) wholes.

    Exact rational arithmetic over the float's binary expansion, so the
    result is the true expectation for the pi actually passed in.
    """
    n_wholes = len(member_sets)
    pf = Fraction(pi)
    total = Fraction(0)
    per = [Fraction(0)] * n_wholes
    for z in all_states(n_wholes):
        k = sum(z)
        pr = pf ** k * (1 - pf) ** (n_wholes - k)
        flags = violation_flags(z, member_sets, n_parts)
        total += pr * sum(flags)
        for j, f in enumerate(flags):
            per[j] += pr * f
    return float(total), [float(v) for v in per]


def rule_prior_probability(member_sets, n_parts, pi):
    """Prior mass of the rule-satisfying states, exact."""
    n_wholes = len(member_sets)
    pf = Fraction(pi)
    tot = Fraction(0)
    for z in all_states(n_wholes):
        if satisfies_rule(z, member_sets, n_parts):
            k = sum(z)
            tot += pf ** k * (1 - pf) ** (n_wholes - k)
    return float(tot)


def hypergeom_tail(N, K, m, k):
    """P[overlap >= k] drawing m of N items with K marked, exact."""
    num = Fraction(0)
    for j in range(k, min(m, K) + 1):
        num += Fraction(comb(K, j) * comb(N - K, m - j))
    return num / comb(N, m)


def step_up_adjust(p):
    """Monotone step-up multiple-testing adjustment, quadratic version."""
    n = len(p)
    order = sorted(range(n), key=lambda i: p[i])
    out = [0.0] * n
    best = 1.0
    for rank in range(n, 0, -1):
        i = order[rank - 1]
        best = min(best, p[i] * n / rank)
        out[i] = best
    return out


def random_raw_sets(rng, max_parts=10, max_wholes=7):
    """Random named set family for property tests, as an id -> members dict."""
    n_parts = int(rng.integers(2, max_parts + 1))
    n_wholes = int(rng.integers(1, max_wholes + 1))
    raw = {}
    for w in range(n_wholes):
        size = int(rng.integers(1, n_parts + 1))
        mem = rng.choice(n_parts, size=size, replace=False)
        raw[f"w{w}"] = [f"p{m}" for m in mem]
    return raw
