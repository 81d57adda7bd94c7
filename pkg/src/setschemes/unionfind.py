"""Disjoint-set structures: a plain one for small problems and a vectorized one."""

from __future__ import annotations

import numpy as np


class UnionFind:
    """Union by rank with path compression over ``range(n)``."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x: int, y: int) -> bool:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        return True

    def classes(self) -> list[list[int]]:
        """Classes as sorted lists, ordered by least member."""
        groups: dict[int, list[int]] = {}
        for x in range(len(self.parent)):
            groups.setdefault(self.find(x), []).append(x)
        return sorted(groups.values(), key=lambda c: c[0])


class ArrayUnionFind:
    """Union-find on numpy arrays, for unioning millions of edges at once.

    Roots are always the least element of their class, which makes labels
    deterministic.
    """

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)

    def _compress(self) -> None:
        p = self.parent
        while True:
            q = p[p]
            if np.array_equal(q, p):
                break
            p = q
        self.parent = p

    def union_many(self, u: np.ndarray, v: np.ndarray) -> None:
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        while True:
            self._compress()
            ru, rv = self.parent[u], self.parent[v]
            differ = ru != rv
            if not differ.any():
                return
            ru, rv = ru[differ], rv[differ]
            hi = np.maximum(ru, rv)
            lo = np.minimum(ru, rv)
            np.minimum.at(self.parent, hi, lo)
            u, v = u[differ], v[differ]

    def labels(self) -> np.ndarray:
        self._compress()
        return self.parent.copy()

    def n_classes(self) -> int:
        self._compress()
        return int(np.count_nonzero(self.parent == np.arange(len(self.parent))))
