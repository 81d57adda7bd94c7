"""Permutation groups on [d] stored as full element lists.

Permutations act on the right: ``(p * q)(x) = q(p(x))``.  Points are 1-based
in every external surface (cycle notation, orbits) and 0-based in arrays.
"""

from __future__ import annotations

import functools
import itertools
import math
import re
from typing import Iterable, Sequence

import numpy as np

from .core import (MAX_SCAN_DEGREE, SetPartition, all_permutations, popcounts,
                   subset_images)
from .unionfind import UnionFind


class Permutation:
    """A bijection of [d]; ``images[i]`` is the 0-based image of point ``i + 1``."""

    __slots__ = ("images",)

    def __init__(self, images: Sequence[int]):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        self.images = images

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(range(degree))

    @classmethod
    def from_cycles(cls, text: str, degree: int) -> "Permutation":
        """Parse cycle notation such as ``"(1,3,5,7)(2,4,6,8)"``; ``"()"`` is the identity."""
        text = text.replace(" ", "")
        if not re.fullmatch(r"(\((\d+(,\d+)*)?\))+", text):
            raise ValueError(f"bad cycle notation: {text!r}")
        images = list(range(degree))
        seen: set[int] = set()
        for body in re.findall(r"\(([^)]*)\)", text):
            if not body:
                continue
            cycle = [int(x) - 1 for x in body.split(",")]
            if any(not 0 <= x < degree for x in cycle):
                raise ValueError(f"point out of range 1..{degree} in {text!r}")
            if seen.intersection(cycle) or len(set(cycle)) != len(cycle):
                raise ValueError(f"cycles overlap in {text!r}")
            seen.update(cycle)
            for x, y in zip(cycle, cycle[1:] + cycle[:1]):
                images[x] = y
        return cls(images)

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, point: int) -> int:
        return self.images[point - 1] + 1

    def __mul__(self, other: "Permutation") -> "Permutation":
        return Permutation(other.images[i] for i in self.images)

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(inv)

    def cycles(self) -> list[tuple[int, ...]]:
        seen = set()
        out = []
        for start in range(self.degree):
            if start in seen or self.images[start] == start:
                continue
            cycle = [start]
            seen.add(start)
            x = self.images[start]
            while x != start:
                cycle.append(x)
                seen.add(x)
                x = self.images[x]
            out.append(tuple(c + 1 for c in cycle))
        return out

    def order(self) -> int:
        return math.lcm(*(len(c) for c in self.cycles())) if self.cycles() else 1

    def __str__(self) -> str:
        cycles = self.cycles()
        if not cycles:
            return "()"
        return "".join("(" + ",".join(map(str, c)) + ")" for c in cycles)

    def __repr__(self) -> str:
        return f"Permutation({str(self)!r}, degree={self.degree})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)


def affine_map(a: int, b: int, n: int) -> Permutation:
    """x -> a*x + b on Z/n, with residue z labeled as point z + 1."""
    return Permutation((a * z + b) % n for z in range(n))


def _keys(rows: np.ndarray, degree: int) -> np.ndarray:
    """Pack each row (4 bits per point, degree <= 16) into one uint64."""
    rows = np.asarray(rows).astype(np.uint64).reshape(-1, degree)
    shifts = (4 * np.arange(degree)).astype(np.uint64)
    return np.bitwise_or.reduce(rows << shifts, axis=1) if degree else np.zeros(len(rows), np.uint64)


def _closure_rows(degree: int, gens: np.ndarray, start: np.ndarray | None = None) -> np.ndarray:
    """Breadth-first closure of ``start`` (default: identity) under right multiplication."""
    if start is None:
        start = np.arange(degree, dtype=np.int8)[None, :]
    out = [start]
    seen = np.sort(_keys(start, degree))
    frontier = start
    while len(frontier) and len(gens):
        cand = np.concatenate([g[frontier] for g in gens]).astype(np.int8)
        keys = _keys(cand, degree)
        keys, idx = np.unique(keys, return_index=True)
        pos = np.searchsorted(seen, keys)
        pos = np.minimum(pos, len(seen) - 1)
        new = seen[pos] != keys
        frontier = cand[idx[new]]
        if len(frontier):
            out.append(frontier)
            seen = np.union1d(seen, keys[new])
    return np.concatenate(out)


class PermGroup:
    """A finite permutation group on [degree] with its full element list.

    Construct from generators (closure computed on demand) or from a complete
    element array (generators picked greedily on demand).
    """

    def __init__(self, degree: int, generators: Iterable[Permutation] = (),
                 elements: np.ndarray | None = None):
        self.degree = degree
        gens = list(generators)
        for g in gens:
            if g.degree != degree:
                raise ValueError(f"generator {g} has degree {g.degree}, expected {degree}")
        self._generators = gens if (gens or elements is None) else None
        self._elements = None
        if elements is not None:
            elements = np.asarray(elements, dtype=np.int8).reshape(-1, degree)
            elements.setflags(write=False)
            self._elements = elements

    @property
    def generators(self) -> list[Permutation]:
        if self._generators is None:
            self._generators = self._greedy_generators()
        return self._generators

    @property
    def elements(self) -> np.ndarray:
        if self._elements is None:
            gens = np.array([g.images for g in self._generators], dtype=np.int8).reshape(-1, self.degree)
            rows = _closure_rows(self.degree, gens)
            rows.setflags(write=False)
            self._elements = rows
        return self._elements

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return self.order

    def _greedy_generators(self) -> list[Permutation]:
        rows = self.elements
        keys = _keys(rows, self.degree)
        gens: list[np.ndarray] = []
        covered = _closure_rows(self.degree, np.empty((0, self.degree), dtype=np.int8))
        covered_keys = set(_keys(covered, self.degree).tolist())
        # big-support elements first tends to give short generating sets
        moved = (rows != np.arange(self.degree)).sum(axis=1)
        for idx in np.lexsort((keys, -moved)):
            if int(keys[idx]) in covered_keys:
                continue
            gens.append(rows[idx])
            covered = _closure_rows(self.degree, np.array(gens), covered)
            covered_keys = set(_keys(covered, self.degree).tolist())
            if len(covered_keys) == len(rows):
                break
        return [Permutation(g) for g in gens]

    def __contains__(self, perm: Permutation) -> bool:
        key = int(_keys(np.array([perm.images]), self.degree)[0])
        return key in self._key_set()

    @functools.cached_property
    def _keyset(self) -> frozenset:
        return frozenset(_keys(self.elements, self.degree).tolist())

    def _key_set(self) -> frozenset:
        return self._keyset

    def permutations(self) -> list[Permutation]:
        return [Permutation(r) for r in self.elements]

    def is_subgroup_of(self, other: "PermGroup") -> bool:
        return self._keyset <= other._keyset

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermGroup):
            return NotImplemented
        return self.degree == other.degree and self._keyset == other._keyset

    def __hash__(self) -> int:
        return hash((self.degree, self._keyset))

    def is_abelian(self) -> bool:
        gens = [np.array(g.images) for g in self.generators]
        return all(np.array_equal(g[h], h[g]) for g, h in itertools.combinations(gens, 2))

    def center(self) -> np.ndarray:
        rows = self.elements.astype(np.int64)
        keep = np.ones(len(rows), dtype=bool)
        for g in self.generators:
            gi = np.array(g.images)
            keep &= np.all(rows[:, gi] == gi[rows], axis=1)
        return rows[keep]

    def element_orders(self) -> np.ndarray:
        rows = self.elements.astype(np.int64)
        ident = np.arange(self.degree)
        orders = np.zeros(len(rows), dtype=np.int64)
        power = rows.copy()
        k = 1
        while not orders.all():
            done = (orders == 0) & np.all(power == ident, axis=1)
            orders[done] = k
            power = np.take_along_axis(rows, power, axis=1)
            k += 1
        return orders

    def __repr__(self) -> str:
        return f"PermGroup(degree={self.degree}, order={self.order})"


def closure(generators: Sequence[Permutation], degree: int | None = None) -> PermGroup:
    """Group generated by ``generators`` (breadth-first, deterministic order)."""
    if degree is None:
        if not generators:
            raise ValueError("degree required for an empty generator list")
        degree = generators[0].degree
    for g in generators:
        if g.degree != degree:
            raise ValueError(f"degree mismatch: {g} has degree {g.degree}, expected {degree}")
    group = PermGroup(degree, generators)
    group.elements  # noqa: B018 - force closure
    return group


def trivial_group(degree: int) -> PermGroup:
    return PermGroup(degree, [Permutation.identity(degree)])


def symmetric_group(degree: int) -> PermGroup:
    gens = []
    if degree >= 2:
        gens = [Permutation.from_cycles("(1,2)", degree),
                Permutation([*range(1, degree), 0])]
    if degree <= MAX_SCAN_DEGREE:
        return PermGroup(degree, gens or [Permutation.identity(degree)],
                         elements=all_permutations(degree))
    return PermGroup(degree, gens)


def alternating_group(degree: int) -> PermGroup:
    gens = [Permutation([*range(i), i + 1, i + 2, i, *range(i + 3, degree)])
            for i in range(degree - 2)]
    return closure(gens or [Permutation.identity(degree)], degree)


# -- orbits -------------------------------------------------------------------

def point_orbits(G: PermGroup) -> list[tuple[int, ...]]:
    """Orbits of G on [d] (1-based), by union-find over generator images."""
    uf = UnionFind(G.degree)
    for g in G.generators:
        for i, j in enumerate(g.images):
            uf.union(i, j)
    return [tuple(x + 1 for x in cls) for cls in uf.classes()]


def is_transitive(G: PermGroup) -> bool:
    return len(point_orbits(G)) == 1


def subset_orbit_labels(G: PermGroup) -> np.ndarray:
    """Least member of the G-orbit of every subset."""
    n = 1 << G.degree
    gens = np.array([g.images for g in G.generators], dtype=np.int64).reshape(-1, G.degree)
    imgs = subset_images(gens, G.degree)
    uf = UnionFind(n)
    for img in imgs:
        for a, b in enumerate(img.tolist()):
            if a != b:
                uf.union(a, b)
    labels = np.empty(n, dtype=np.int64)
    for cls in uf.classes():
        labels[cls] = cls[0]
    return labels


def orbital_scheme(G: PermGroup) -> SetPartition:
    """Partition of the power set into G-orbits."""
    return SetPartition(G.degree, subset_orbit_labels(G))


# -- automorphisms ----------------------------------------------------------

def _singleton_respecting_perms(S: SetPartition) -> np.ndarray:
    d = S.degree
    single = [int(S.colors[1 << i]) for i in range(d)]
    classes: dict[int, list[int]] = {}
    for i, c in enumerate(single):
        classes.setdefault(c, []).append(i)
    blocks = list(classes.values())
    if len(blocks) == 1:
        return all_permutations(d)
    rows = []
    for choice in itertools.product(*(itertools.permutations(b) for b in blocks)):
        row = [0] * d
        for block, image in zip(blocks, choice):
            for i, j in zip(block, image):
                row[i] = j
        rows.append(row)
    return np.array(rows, dtype=np.int8)


def _filter_preserving(S: SetPartition, perms: np.ndarray, weak: bool,
                       chunk: int = 8192) -> np.ndarray:
    d = S.degree
    colors = S.colors.astype(np.int64)
    pc = popcounts(d)
    small = np.flatnonzero(pc <= 2)
    reps = np.array([c[0] for c in S.cells()], dtype=np.int64)
    keep_rows = []
    for start in range(0, len(perms), chunk):
        block = perms[start:start + chunk]
        img = subset_images(block, d)
        for cols in (small, None):
            mapped = colors[img] if cols is None else colors[img[:, cols]]
            target = colors if cols is None else colors[cols]
            if weak:
                phi = colors[img[:, reps]]
                ok = np.all(mapped == phi[:, target], axis=1)
            else:
                ok = np.all(mapped == target, axis=1)
            block, img = block[ok], img[ok]
            if not len(block):
                break
        keep_rows.append(block)
    return np.concatenate(keep_rows) if keep_rows else np.empty((0, d), dtype=np.int8)


def _aut_backtrack(S: SetPartition) -> np.ndarray:
    """Cell-preserving permutations by point-by-point extension with pruning."""
    d = S.degree
    colors = S.colors
    found: list[list[int]] = []
    checks = [colors[np.arange(1 << i) | (1 << i)] for i in range(d)]

    def extend(i: int, table: np.ndarray, used: int, perm: list[int]) -> None:
        if i == d:
            found.append(list(perm))
            return
        for j in range(d):
            if used >> j & 1:
                continue
            part = table | (1 << j)
            if np.array_equal(colors[part], checks[i]):
                perm.append(j)
                extend(i + 1, np.concatenate([table, part]), used | (1 << j), perm)
                perm.pop()

    extend(0, np.zeros(1, dtype=np.int64), 0, [])
    return np.array(found, dtype=np.int8).reshape(-1, d)


def automorphism_group(S: SetPartition, method: str = "auto") -> PermGroup:
    """Permutations of [d] fixing every cell of S setwise.

    ``method`` is ``"scan"`` (vectorized scan of the permutations respecting
    singleton colors), ``"backtrack"`` (prefix-pruned search, any degree), or
    ``"auto"``.
    """
    if method == "auto":
        method = "scan" if S.degree <= 8 else "backtrack"
    if method == "scan":
        rows = _filter_preserving(S, _singleton_respecting_perms(S), weak=False)
    elif method == "backtrack":
        rows = _aut_backtrack(S)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PermGroup(S.degree, elements=rows)


def weak_automorphism_group(S: SetPartition) -> PermGroup:
    """Permutations of [d] mapping the partition to itself (cells may move)."""
    return PermGroup(S.degree, elements=_filter_preserving(S, all_permutations(S.degree), weak=True))


def is_schurian(S: SetPartition, aut: PermGroup | None = None) -> bool:
    if aut is None:
        aut = automorphism_group(S)
    return orbital_scheme(aut) == S


# -- named groups -------------------------------------------------------------

def _named_generators(name: str) -> tuple[int, list[Permutation]]:
    if name == "G1":
        return 8, [affine_map(1, 1, 8), affine_map(3, 0, 8), affine_map(5, 0, 8)]
    if name == "H1":
        return 8, [affine_map(1, 2, 8), affine_map(3, 1, 8), affine_map(5, 0, 8)]
    if name == "G2":
        return 8, [affine_map(1, 1, 8), affine_map(3, 0, 8)]
    if name == "H2":
        return 8, [affine_map(1, 2, 8), affine_map(3, 1, 8)]
    if name == "G3":
        return 8, [affine_map(1, 1, 8), affine_map(5, 0, 8)]
    if name == "H3":
        return 8, [affine_map(1, 2, 8), affine_map(5, 0, 8)]
    if name == "G4":
        return 8, [Permutation.from_cycles("(1,3,5,7)(2,4,6,8)", 8),
                   Permutation.from_cycles("(2,4)(6,8)", 8)]
    if name == "H4":
        return 8, [Permutation.from_cycles("(1,3,5,7)(2,4,6,8)", 8),
                   Permutation.from_cycles("(2,6)(4,8)", 8)]
    if name == "A9":
        return 9, [affine_map(1, 1, 9), affine_map(2, 0, 9)]
    if name == "M27":
        return 9, [affine_map(1, 1, 9), affine_map(4, 0, 9)]
    raise KeyError(f"unknown group {name!r}")


NAMED_GROUPS = ("G1", "G2", "G3", "G4", "H1", "H2", "H3", "H4", "A9", "M27")


@functools.lru_cache(maxsize=None)
def named_group(name: str) -> PermGroup:
    degree, gens = _named_generators(name)
    return closure(gens, degree)


def parse_group(text: str, degree: int) -> PermGroup:
    """Group from a name (``Sym``, ``Alt``, ``1``, a named group) or generators.

    Generators are cycle-notation permutations separated by ``;``.
    """
    text = text.strip()
    if text in ("Sym", "S"):
        return symmetric_group(degree)
    if text in ("Alt", "A"):
        return alternating_group(degree)
    if text in ("1", "trivial"):
        return trivial_group(degree)
    if text in NAMED_GROUPS:
        G = named_group(text)
        if G.degree != degree:
            raise ValueError(f"{text} acts on {G.degree} points, not {degree}")
        return G
    gens = [Permutation.from_cycles(part, degree) for part in text.split(";") if part.strip()]
    return closure(gens or [Permutation.identity(degree)], degree)


# -- describing small groups ----------------------------------------------

def _abelian_invariants(orders: np.ndarray, n: int) -> list[int]:
    factors: list[int] = []
    m, p = n, 2
    primes = []
    while m > 1:
        if m % p == 0:
            primes.append(p)
            while m % p == 0:
                m //= p
        p += 1
    for p in primes:
        counts = []
        j = 1
        while True:
            c = int(np.count_nonzero((p ** j) % orders == 0))
            counts.append(c)
            if j > 1 and counts[-1] == counts[-2]:
                break
            j += 1
        prev = 1
        ranks = []
        for c in counts[:-1]:
            ranks.append(round(math.log(c // prev, p)))
            prev = c
        # ranks[j] = number of cyclic p-factors of order >= p^(j+1)
        for j, r in enumerate(ranks):
            nxt = ranks[j + 1] if j + 1 < len(ranks) else 0
            factors.extend([p ** (j + 1)] * (r - nxt))
    # combine p-parts into invariant factors, largest first
    by_prime: dict[int, list[int]] = {}
    for q in factors:
        for p in primes:
            if q % p == 0:
                by_prime.setdefault(p, []).append(q)
                break
    for v in by_prime.values():
        v.sort(reverse=True)
    length = max((len(v) for v in by_prime.values()), default=0)
    out = []
    for i in range(length):
        out.append(math.prod(v[i] for v in by_prime.values() if i < len(v)))
    return out


def describe_group(G: PermGroup) -> str:
    """Short structural name: enough to tell apart the groups met in practice."""
    n = G.order
    d = G.degree
    if n == 1:
        return "1"
    if n == math.factorial(d):
        return f"Sym({d})"
    if n > 5000:
        return f"order {n}"
    orders = G.element_orders()
    if G.is_abelian():
        inv = _abelian_invariants(orders, n)
        return " × ".join(f"C{q}" for q in inv)
    involutions = int(np.count_nonzero(orders == 2))
    exponent = math.lcm(*orders.tolist())
    if n == 8:
        return "Q8" if involutions == 1 else "D8"
    if n == 16:
        z = G.center()
        if len(z) == 4 and exponent == 4:
            zg = PermGroup(d, elements=z)
            if np.count_nonzero(zg.element_orders() == 4):
                return "Q8∘C4"
    if n == 27:
        return "C9⋊C3" if exponent == 9 else "3^(1+2)"
    if n == math.factorial(d) // 2 and n > 1:
        return f"Alt({d})"
    if np.count_nonzero(orders == n // 2) and involutions >= n // 2:
        return f"D{n}"
    return f"order {n}"


# -- subgroup lattice up to conjugacy ----------------------------------------

class _SymTables:
    def __init__(self, degree: int):
        perms = all_permutations(degree).astype(np.int64)
        self.perms = perms
        keys = _keys(perms, degree)
        order = np.argsort(keys)
        self._sorted_keys = keys[order]
        self._order = order
        self.n = len(perms)
        self.degree = degree
        # mul[i, j] = perms[i] then perms[j]
        self.mul = np.empty((self.n, self.n), dtype=np.int32)
        for j in range(self.n):
            self.mul[:, j] = self.index(perms[j][perms])
        ident = self.index(np.arange(degree)[None, :])[0]
        self.identity = int(ident)
        self.inv = np.argmax(self.mul == ident, axis=1)
        # conj[g, h] = g^-1 h g
        self.conj = np.empty((self.n, self.n), dtype=np.int32)
        for g in range(self.n):
            self.conj[g] = self.mul[self.mul[self.inv[g]], g]

    def index(self, rows: np.ndarray) -> np.ndarray:
        keys = _keys(rows, self.degree)
        return self._order[np.searchsorted(self._sorted_keys, keys)]

    def close(self, gens: np.ndarray) -> np.ndarray:
        """Sorted element indices of the subgroup generated by ``gens``."""
        ident = self.identity
        seen = np.zeros(self.n, dtype=bool)
        seen[ident] = True
        frontier = np.array([ident])
        while len(frontier):
            nxt = np.unique(self.mul[np.ix_(frontier, gens)].ravel())
            nxt = nxt[~seen[nxt]]
            seen[nxt] = True
            frontier = nxt
        return np.flatnonzero(seen)

    def conj_key(self, elems: np.ndarray) -> bytes:
        masks = np.zeros((self.n, self.n), dtype=bool)
        rows = np.repeat(np.arange(self.n), len(elems))
        masks[rows, self.conj[:, elems].ravel()] = True
        packed = np.packbits(masks, axis=1)
        best = min(range(self.n), key=lambda g: packed[g].tobytes())
        return packed[best].tobytes()


@functools.lru_cache(maxsize=None)
def subgroups_up_to_conjugacy(degree: int) -> tuple[PermGroup, ...]:
    """One subgroup of Sym(degree) from each conjugacy class (degree <= 6).

    Found by closing the trivial group under adjoining one element at a
    time; two subgroups are identified when some conjugate of one equals
    the other.
    """
    if degree > 6:
        raise ValueError("subgroup scan supports degree <= 6")
    t = _SymTables(degree)
    start = (np.array([t.identity]), np.array([t.identity]))
    found = {t.conj_key(start[0]): start}
    known: set[bytes] = {start[0].tobytes()}
    queue = [start]
    while queue:
        H, gens = queue.pop(0)
        covered = np.zeros(t.n, dtype=bool)
        covered[H] = True
        for g in range(t.n):
            if covered[g]:
                continue
            covered[t.mul[H, g]] = True  # every element of the coset Hg gives the same join
            K_gens = np.append(gens, g)
            K = t.close(K_gens)
            if K.tobytes() in known:
                continue
            known.add(K.tobytes())
            key = t.conj_key(K)
            if key not in found:
                found[key] = (K, K_gens)
                queue.append((K, K_gens))
    groups = []
    for key in sorted(found, key=lambda k: (len(found[k][0]), k)):
        elems, gens = found[key]
        groups.append(PermGroup(degree, [Permutation(t.perms[g]) for g in gens],
                                elements=t.perms[elems]))
    return tuple(groups)


# -- products -----------------------------------------------------------------

def direct_product(G: PermGroup, H: PermGroup) -> PermGroup:
    """G x H on the disjoint union, G on the first G.degree points."""
    d, e = G.degree, H.degree
    gens = [Permutation(list(g.images) + list(range(d, d + e))) for g in G.generators]
    gens += [Permutation(list(range(d)) + [d + j for j in h.images]) for h in H.generators]
    return closure(gens, d + e)


def wreath_group(H: PermGroup, G: PermGroup) -> PermGroup:
    """Imprimitive wreath product: copies of H on k blocks, G permuting blocks.

    Block ``i`` holds points ``i*d .. i*d + d - 1`` where ``d = H.degree``.
    """
    d, k = H.degree, G.degree
    gens = []
    for b in range(k):
        for h in H.generators:
            images = list(range(k * d))
            images[b * d:(b + 1) * d] = [b * d + x for x in h.images]
            gens.append(Permutation(images))
    for g in G.generators:
        gens.append(Permutation(g.images[i // d] * d + i % d for i in range(k * d)))
    return closure(gens, k * d)
