"""Brute-force reference implementations, written without the package's internals.

Everything here works on plain Python sets and tuples and is only fast
enough for small degree.
"""

from __future__ import annotations

import functools
import itertools
from collections import Counter


def subsets(d):
    """All subsets of {1..d} as frozensets, indexed by bitmask."""
    return [frozenset(i + 1 for i in range(d) if x >> i & 1) for x in range(1 << d)]


def triangle(a, b, c):
    return a <= b | c and b <= a | c and c <= a | b


def triple_type(a, b, c):
    return (len(a), len(b), len(c), len(a & b), len(a & c), len(b & c), len(a & b & c))


def fingerprint(colors, d, a, triangles_only=True):
    """Counter of (color b, color c, type) over ordered pairs (b, c)."""
    sets = subsets(d)
    A = sets[a]
    out = Counter()
    for b, B in enumerate(sets):
        for c, C in enumerate(sets):
            if triangles_only and not triangle(A, B, C):
                continue
            out[(colors[b], colors[c], triple_type(A, B, C))] += 1
    return out


def is_coherent(colors, d, triangles_only=True):
    """Size-homogeneous and every cell has one fingerprint."""
    sets = subsets(d)
    by_cell = {}
    for a, col in enumerate(colors):
        by_cell.setdefault(col, []).append(a)
    for members in by_cell.values():
        if len({len(sets[a]) for a in members}) != 1:
            return False
        first = fingerprint(colors, d, members[0], triangles_only)
        if any(fingerprint(colors, d, a, triangles_only) != first for a in members[1:]):
            return False
    return True


def apply(perm, s):
    """Image of a set of 1-based points under a tuple of 1-based images."""
    return frozenset(perm[x - 1] for x in s)


def same_blocks(x, y):
    """Whether two color lists define the same partition."""
    return len(set(zip(x, y))) == len(set(x)) == len(set(y))


def automorphisms(colors, d, weak=False):
    """All permutations (1-based image tuples) preserving each cell, or the partition."""
    sets = subsets(d)
    index = {s: i for i, s in enumerate(sets)}
    out = []
    for perm in itertools.permutations(range(1, d + 1)):
        image = [colors[index[apply(perm, s)]] for s in sets]
        if (same_blocks(image, colors) if weak else image == list(colors)):
            out.append(perm)
    return out


def orbit_colors(group, d):
    """Color of each subset = least bitmask in its orbit under the given permutations."""
    sets = subsets(d)
    index = {s: i for i, s in enumerate(sets)}
    return [min(index[apply(g, s)] for g in group) for s in sets]


def compose(p, q):
    """p then q, as 1-based image tuples."""
    return tuple(q[p[i] - 1] for i in range(len(p)))


def close(gens, d):
    ident = tuple(range(1, d + 1))
    elems = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose(x, g)
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(elems)


@functools.lru_cache(maxsize=None)
def all_subgroups(d):
    """Every subgroup of Sym(d): cyclic subgroups closed under joins."""
    gens = {}
    for g in itertools.permutations(range(1, d + 1)):
        gens.setdefault(close([g], d), [g])
    frontier = list(gens)
    while frontier:
        new = []
        for H in frontier:
            for K in list(gens):
                if H <= K or K <= H:
                    continue
                J = close(gens[H] + gens[K], d)
                if J not in gens:
                    gens[J] = gens[H] + gens[K]
                    new.append(J)
        frontier = new
    return set(gens)


def relabel_class(colors, d):
    """Least first-occurrence renumbering over all relabelings of the points."""
    sets = subsets(d)
    index = {s: i for i, s in enumerate(sets)}
    best = None
    for perm in itertools.permutations(range(1, d + 1)):
        moved = [0] * len(sets)
        for i, s in enumerate(sets):
            moved[index[apply(perm, s)]] = colors[i]
        seen = {}
        key = tuple(seen.setdefault(c, len(seen)) for c in moved)
        best = key if best is None or key < best else best
    return best


def hamming_counts(colors, d, m, u, v):
    """Counter over w of (color(u, w), color(w, v)) in [m]^d, vertices as digit tuples."""
    def color(x, y):
        return colors[sum(1 << i for i in range(d) if x[i] != y[i])]

    return Counter((color(u, w), color(w, v)) for w in itertools.product(range(m), repeat=d))


def johnson_count(m, k, a, b, c):
    """Count k-subsets w of range(m) with |u - w| = b, |w - v| = c for fixed u, v, |u - v| = a."""
    u = set(range(k))
    v = set(range(a, k)) | set(range(k, k + a))
    return sum(1 for w in itertools.combinations(range(m), k)
               if len(u - set(w)) == b and len(set(w) - v) == c)
