"""Brute-force reference computations used to freeze and cross-check expected values.

Everything here works on plain lists of exact rationals and never calls the
library's fast paths.
"""

from fractions import Fraction
from itertools import combinations, product


def value_matrix(space):
    """Exact rational distance matrix read entry by entry."""
    return [[space.value(x, y) for y in space.points] for x in space.points]


def is_ultrametric(d):
    n = len(d)
    for x in range(n):
        if d[x][x] != 0:
            return False
        for y in range(n):
            if d[x][y] != d[y][x] or (x != y and d[x][y] == 0):
                return False
    return all(d[x][y] <= max(d[x][z], d[y][z]) for x, y, z in product(range(n), repeat=3))


def diameter(d, subset):
    subset = list(subset)
    return max(d[a][b] for a in subset for b in subset)


def ball(d, center, radius):
    return {y for y in range(len(d)) if d[center][y] <= radius}


def all_balls(d):
    radii = sorted({v for row in d for v in row})
    return {frozenset(ball(d, x, r)) for x in range(len(d)) for r in radii}


def end_distance(ladder_values, u, v):
    for i, (a, b) in enumerate(zip(u, v)):
        if a != b:
            return ladder_values[i]
    return Fraction(0)


def lipschitz(d, targets):
    n = len(d)
    best = Fraction(0)
    for x, y in combinations(range(n), 2):
        best = max(best, d[targets[x]][targets[y]] / d[x][y])
    return best


def radial_modulus(d, targets, x, radius):
    ratios = [d[targets[x]][targets[u]] / d[x][u] for u in ball(d, x, radius) if u != x]
    return max(ratios) if ratios else None


def image(targets, subset=None):
    subset = range(len(targets)) if subset is None else subset
    return {targets[x] for x in subset}


def has_proper_invariant_subset(targets):
    """Enumerate every nonempty proper subset (small n only)."""
    n = len(targets)
    for mask in range(1, 2**n - 1):
        e = {i for i in range(n) if mask >> i & 1}
        if all(targets[x] in e for x in e):
            return True
    return False


def threshold_classes(d, radius):
    """Partition by d <= radius using union-find over all pairs."""
    n = len(d)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for x, y in combinations(range(n), 2):
        if d[x][y] <= radius:
            parent[find(x)] = find(y)
    groups = {}
    for x in range(n):
        groups.setdefault(find(x), set()).add(x)
    return sorted((frozenset(g) for g in groups.values()), key=min)
