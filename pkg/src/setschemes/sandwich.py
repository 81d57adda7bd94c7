"""Hamming sandwiches: pair colorings of [m]^d induced by a power-set partition.

Vertices of [m]^d are integers in base m, coordinate ``i`` being digit ``i``.
The pair ``(u, v)`` gets the color of the set of coordinates where they
differ.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coherence import is_coherent, triangle_pairs
from .core import SetPartition, all_permutations, popcounts
from .groups import automorphism_group, is_schurian, is_transitive
from .unionfind import ArrayUnionFind

MATERIALIZE_LIMIT = 4096
CONNECTIVITY_LIMIT = 10 ** 4


class Configuration:
    """A coloring of ordered vertex pairs, lazy unless materialized.

    ``color_fn(u, v)`` maps equal-shape integer arrays of vertices to colors.
    """

    def __init__(self, n: int, color_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 rank: int | None = None, table: np.ndarray | None = None):
        self.n = n
        self.color_fn = color_fn
        self._rank = rank
        self._table = table

    @classmethod
    def from_table(cls, table) -> "Configuration":
        table = np.asarray(table)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise ValueError("color table must be square")
        _, inv = np.unique(table, return_inverse=True)
        first = np.full(inv.max() + 1, table.size)
        np.minimum.at(first, inv.ravel(), np.arange(table.size))
        relabel = np.empty_like(first)
        relabel[np.argsort(first)] = np.arange(len(first))
        norm = relabel[inv.reshape(table.shape)].astype(np.int64)
        return cls(len(norm), lambda u, v: norm[u, v], int(norm.max()) + 1, norm)

    def color(self, u: int, v: int) -> int:
        return int(self.color_fn(np.array([u]), np.array([v]))[0])

    @property
    def rank(self) -> int:
        if self._rank is None:
            self._rank = int(self.materialize().max()) + 1
        return self._rank

    @property
    def materialized(self) -> bool:
        return self._table is not None

    def materialize(self) -> np.ndarray:
        """Full n x n color table with colors numbered by first occurrence."""
        if self._table is None:
            if self.n > MATERIALIZE_LIMIT:
                raise ValueError(f"{self.n} vertices exceeds the materialization limit {MATERIALIZE_LIMIT}")
            idx = np.arange(self.n, dtype=np.int64)
            raw = self.color_fn(np.repeat(idx, self.n), np.tile(idx, self.n)).reshape(self.n, self.n)
            norm = Configuration.from_table(raw)
            self._table, self._rank = norm._table, norm._rank
        return self._table

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.materialize(), other.materialize())

    def __repr__(self) -> str:
        return f"Configuration(n={self.n}, rank={self._rank if self._rank is not None else '?'})"


def _digits(vertices: np.ndarray, m: int, d: int) -> np.ndarray:
    out = np.empty((len(vertices), d), dtype=np.int64)
    v = vertices.astype(np.int64)
    for i in range(d):
        out[:, i] = v % m
        v = v // m
    return out


def disagreement(u: np.ndarray, v: np.ndarray, m: int, d: int) -> np.ndarray:
    """Bitmask of coordinates where base-m vertices differ."""
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    mask = np.zeros(np.broadcast(u, v).shape, dtype=np.int64)
    for i in range(d):
        mask |= ((u % m) != (v % m)).astype(np.int64) << i
        u, v = u // m, v // m
    return mask


def hamming_sandwich(S: SetPartition, m: int) -> Configuration:
    """The configuration on [m]^d coloring (u, v) by the cell of their disagreement set."""
    if m < 2:
        raise ValueError("m must be at least 2")
    d = S.degree
    colors = S.colors.astype(np.int64)
    return Configuration(m ** d, lambda u, v: colors[disagreement(u, v, m, d)], rank=S.rank)


def cc_wl_step(C: Configuration) -> tuple[Configuration, bool]:
    """Recolor (u, v) by its color and the counts of (color(u,w), color(w,v)) over w."""
    T = C.materialize()
    n, r = C.n, C.rank
    onehot = [(T == i).astype(np.int64) for i in range(r)]
    features = [T.ravel()]
    for i, j in itertools.product(range(r), repeat=2):
        features.append((onehot[i] @ onehot[j]).ravel())
    sig = np.stack(features, axis=1)
    _, inv = np.unique(sig, axis=0, return_inverse=True)
    new = Configuration.from_table(inv.reshape(n, n))
    return new, new.rank == r


def cc_wl_stabilize(C: Configuration) -> Configuration:
    """Coarsest coherent refinement of a pair coloring (cost n^3 per round)."""
    if C.n > CONNECTIVITY_LIMIT:
        raise ValueError(f"{C.n} vertices is too many for configuration WL")
    C = Configuration.from_table(C.materialize())
    while True:
        C, stable = cc_wl_step(C)
        if stable:
            return C


def is_coherent_configuration(C: Configuration) -> bool:
    return cc_wl_step(Configuration.from_table(C.materialize()))[1]


# -- structure constants -------------------------------------------------------

def _weighted_counts(S: SetPartition, m: int, a: int, beta: int, gamma: int) -> int:
    b, c = triangle_pairs(S.degree, a)
    keep = (S.colors[b] == beta) & (S.colors[c] == gamma)
    b, c = b[keep], c[keep]
    pc = popcounts(S.degree)
    outside = pc[b & c & ~a]
    inside = pc[a & b & c]
    return sum((m - 1) ** int(x) * (m - 2) ** int(y) for x, y in zip(outside, inside))


def sandwich_structure_constants(S: SetPartition, m: int, alpha: int, beta: int, gamma: int,
                                 a: int | None = None) -> int:
    """Number of w with (u, w) in beta and (w, v) in gamma, for (u, v) in alpha.

    Summed over triangles (a, b, c) with weight (m-1)^|b&c - a| (m-2)^|a&b&c|.
    Every member of ``alpha`` is evaluated and must give the same value.
    """
    cell = S.cell(alpha)
    if a is not None and S.colors[a] != alpha:
        raise ValueError(f"subset {a} is not in cell {alpha}")
    values = {int(x): _weighted_counts(S, m, int(x), beta, gamma) for x in cell}
    if len(set(values.values())) != 1:
        raise ValueError(f"value depends on the representative in cell {alpha}: {values}")
    return values[int(cell[0]) if a is None else a]


def brute_force_intersection_numbers(C: Configuration) -> np.ndarray:
    """``P[beta, gamma, u, v]`` = #{w : color(u,w) = beta, color(w,v) = gamma}."""
    T = C.materialize()
    onehot = np.stack([(T == i).astype(np.int64) for i in range(C.rank)])
    return np.einsum("buw,gwv->bguv", onehot, onehot)


# -- recovering the partition ------------------------------------------------

@dataclass(frozen=True)
class Recovery:
    scheme: SetPartition
    coherent: bool
    guaranteed: bool


def guarantee_bound(d: int) -> int:
    """Smallest m for which a coherent sandwich is known to come from a scheme."""
    return 3 ** d + 4


def recover_sas(C: Configuration, m: int, d: int, rows_per_chunk: int = 256) -> Recovery:
    """Read off the power-set partition behind a sandwiched configuration.

    Raises if some color is not a union of disagreement-set classes or mixes
    disagreement sizes.
    """
    if C.n != m ** d:
        raise ValueError(f"configuration has {C.n} vertices, expected {m}^{d}")
    by_mask = np.full(1 << d, -1, dtype=np.int64)
    idx = np.arange(C.n, dtype=np.int64)
    for start in range(0, C.n, rows_per_chunk):
        u = np.repeat(idx[start:start + rows_per_chunk], C.n)
        v = np.tile(idx, len(u) // C.n)
        col = (C.materialize()[u, v] if C.materialized else C.color_fn(u, v)).astype(np.int64)
        mask = disagreement(u, v, m, d)
        for k, c in np.unique(np.stack([mask, col], axis=1), axis=0).tolist():
            if by_mask[k] == -1:
                by_mask[k] = c
            elif by_mask[k] != c:
                raise ValueError("configuration is finer than the disagreement-set coloring")
    S = SetPartition(d, by_mask)
    if not S.is_size_homogeneous():
        raise ValueError("configuration is coarser than the Hamming scheme")
    if S.rank != C.rank:
        raise ValueError("a color class mixes disagreement classes with other colors")
    return Recovery(S, is_coherent(S, "triangle"), m >= guarantee_bound(d))


# -- report -----------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichReport:
    rank: int
    primitive: bool
    aut_order: int
    schurian: bool
    aut_primitive: bool
    connectivity_checked: bool = False


def color_graph_connected(S: SetPartition, m: int, color: int) -> bool:
    """Connectivity of the graph joining u and v when their disagreement set is in ``color``.

    The graph is invariant under translation in (Z/m)^d, so its edges are
    u -- u + delta for the vectors delta supported on members of the cell.
    """
    d = S.degree
    n = m ** d
    digits = _digits(np.arange(n), m, d)
    weights = m ** np.arange(d, dtype=np.int64)
    uf = ArrayUnionFind(n)
    u = np.arange(n, dtype=np.int64)
    for b in S.cell(color):
        support = [i for i in range(d) if b >> i & 1]
        for values in itertools.product(range(1, m), repeat=len(support)):
            delta = np.zeros(d, dtype=np.int64)
            delta[support] = values
            v = ((digits + delta) % m) @ weights
            uf.union_many(u, v)
            if uf.n_classes() == 1:
                return True
    return uf.n_classes() == 1


def sandwich_report(S: SetPartition, m: int, check_connectivity: bool | None = None) -> SandwichReport:
    """Properties of [m]^S read off from S, with optional explicit connectivity check."""
    if m < 2:
        raise ValueError("m must be at least 2")
    d = S.degree
    aut = automorphism_group(S)
    if d == 1:
        # [m]^S is the rank-2 scheme on m points
        primitive, aut_primitive = True, True
    else:
        primitive = S.is_homogeneous() and m >= 3
        aut_primitive = is_transitive(aut) and m >= 3
    if check_connectivity is None:
        check_connectivity = m ** d <= CONNECTIVITY_LIMIT
    if check_connectivity:
        connected = all(color_graph_connected(S, m, c) for c in range(S.rank) if c != S.colors[0])
        if connected != primitive:
            raise AssertionError("connectivity disagrees with the primitivity criterion")
    return SandwichReport(
        rank=S.rank,
        primitive=primitive,
        aut_order=math.factorial(m) ** d * aut.order,
        schurian=is_schurian(S, aut),
        aut_primitive=aut_primitive,
        connectivity_checked=check_connectivity,
    )


def configuration_automorphisms(C: Configuration, chunk: int = 20000) -> int:
    """Order of the group of vertex permutations preserving every color (n <= 10)."""
    T = C.materialize()
    perms = all_permutations(C.n).astype(np.int64)
    total = 0
    for start in range(0, len(perms), chunk):
        p = perms[start:start + chunk]
        ok = np.all(T[p[:, :, None], p[:, None, :]] == T[None], axis=(1, 2))
        total += int(ok.sum())
    return total


# -- small-m experiment -------------------------------------------------------

def size_homogeneous_partitions(d: int):
    """Every size-homogeneous partition of 2^[d] (as SetPartitions)."""
    pc = popcounts(d)
    layers = [np.flatnonzero(pc == k) for k in range(d + 1)]

    def set_partitions(items):
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for part in set_partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [[first] + part[i]] + part[i + 1:]
            yield [[first]] + part

    for choice in itertools.product(*(list(set_partitions(list(layer))) for layer in layers)):
        colors = np.empty(1 << d, dtype=np.int64)
        c = 0
        for layer_parts in choice:
            for block in layer_parts:
                colors[block] = c
                c += 1
        yield SetPartition(d, colors)


def sandwich_survey(d: int, m: int) -> list[tuple[SetPartition, bool, bool]]:
    """(partition, [m]^P coherent, P coherent) for every size-homogeneous P."""
    out = []
    for P in size_homogeneous_partitions(d):
        C = hamming_sandwich(P, m)
        out.append((P, is_coherent_configuration(C), is_coherent(P, "triangle")))
    return out
