"""Pure-Python reference computations, independent of numpy code paths."""

import math


def quantile(values, p):
    """Linear interpolation between closest ranks on the sorted data."""
    xs = sorted(values)
    h = (len(xs) - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (h - lo) * (xs[hi] - xs[lo])


def box(values):
    xs = sorted(values)
    q1, med, q3 = quantile(xs, 0.25), quantile(xs, 0.5), quantile(xs, 0.75)
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = [x for x in xs if lo <= x <= hi]
    return {"median": med, "q1": q1, "q3": q3,
            "whisker_lo": inside[0], "whisker_hi": inside[-1],
            "outliers": [x for x in xs if x < lo or x > hi]}


def smoothed(counts, eps):
    n = sum(counts)
    b = len(counts)
    return [(c / n + eps) / (1 + b * eps) for c in counts]


def psi(p, q):
    return sum((a - b) * math.log(a / b) for a, b in zip(p, q))


def kl(p, q):
    return sum(a * math.log(a / b) for a, b in zip(p, q) if a > 0)


def js(p, q):
    m = [(a + b) / 2 for a, b in zip(p, q)]
    return 0.5 * kl(p, m) + 0.5 * kl(q, m)


def count_bins(sample, edges):
    """Linear scan: first bin whose half-open interval holds x, clamped at the ends."""
    counts = [0] * (len(edges) - 1)
    for x in sample:
        k = 0
        while k < len(counts) - 1 and x >= edges[k + 1]:
            k += 1
        counts[k] += 1
    return counts
