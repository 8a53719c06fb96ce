"""Brute-force reference computations, written without the package's code paths."""
from __future__ import annotations

import itertools
import math
from collections import Counter


def maximal_separated_nets(n, dist, radii):
    """Nested nets by plain loops: keep earlier centres, add any point farther than r from all."""
    net = []
    out = []
    for r in radii:
        for i in range(n):
            if i in net:
                continue
            if all(dist(i, j) > r for j in net):
                net.append(i)
        out.append(sorted(net))
    return out


def binary_blocks(n_points, k, m):
    """Generation-k blocks of a 2**m point grid under binary subdivision."""
    size = n_points >> k if k <= m else 1
    return [tuple(range(a, a + size)) for a in range(0, n_points, size)]


def min_half_cover(points, center, radius):
    """Smallest number of open r/2 balls centred at space points covering B(center, r)."""
    members = [i for i, p in enumerate(points) if math.dist(points[center], p) < radius]
    for size in range(1, len(points) + 1):
        for centres in itertools.combinations(range(len(points)), size):
            if all(any(math.dist(points[c], points[m]) < radius / 2 for c in centres) for m in members):
                return size
    return len(points)


def value_histogram(values, A):
    return Counter(values[i] for i in A)


def breakpoint_level_integral(ys):
    """∫ N(y) dy for the interpolant of ``ys``: sum over sorted level gaps of (#segments spanning gap) * gap."""
    levels = sorted(set(ys))
    total = []
    for lo, hi in zip(levels, levels[1:]):
        spanning = sum(1 for a, b in zip(ys, ys[1:]) if min(a, b) <= lo and max(a, b) >= hi)
        total.append(spanning * (hi - lo))
    return math.fsum(total)


def segment_roots(xs, ys, y):
    """Count solutions of interp(x) = y segment by segment (y assumed off every sample value)."""
    count = 0
    for (x0, a), (x1, b) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if a == b:
            continue
        t = (y - a) / (b - a)
        if 0.0 < t < 1.0:
            count += 1
    return count


def oscillation_brute(dist, values, kept, x, r):
    """max |f(x) - f(z)| over kept z with d(x, z) < r, for scalar values."""
    return max((abs(values[x] - values[z]) for z in kept if dist(x, z) < r), default=0.0)
