"""Subsets of [d] as bitmasks, triple invariants, and partitions of the power set.

A subset of ``[d] = {1, ..., d}`` is an ``int`` whose bit ``i - 1`` is set iff
``i`` is a member.  A :class:`SetPartition` stores one color per subset, indexed
by bitmask, with colors numbered by first occurrence so that two partitions are
equal iff their color arrays are equal.
"""

from __future__ import annotations

import functools
import itertools
import json
from typing import Iterable, NamedTuple, Sequence

import numpy as np

MAX_DEGREE = 16
MAX_SCAN_DEGREE = 10


class SchemeFormatError(ValueError):
    """Base class for problems with scheme files."""


class MalformedSchemeError(SchemeFormatError):
    pass


class NotAPartitionError(SchemeFormatError):
    pass


class DuplicateSubsetError(SchemeFormatError):
    pass


class ElementOutOfRangeError(SchemeFormatError):
    pass


# -- subsets -----------------------------------------------------------------

def subset(elements: Iterable[int]) -> int:
    """Bitmask of a collection of 1-based points."""
    bits = 0
    for i in elements:
        bits |= 1 << (int(i) - 1)
    return bits


def elements(bits: int) -> tuple[int, ...]:
    """1-based points of a bitmask, increasing."""
    out = []
    i = 1
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return tuple(out)


def complement(bits: int, degree: int) -> int:
    return ((1 << degree) - 1) & ~bits


def size(bits: int) -> int:
    return bin(bits).count("1")


@functools.lru_cache(maxsize=None)
def popcounts(degree: int) -> np.ndarray:
    """Popcount of every bitmask below ``2**degree`` (read-only int64 array)."""
    n = 1 << degree
    pc = np.zeros(n, dtype=np.int64)
    for i in range(degree):
        pc += (np.arange(n) >> i) & 1
    pc.setflags(write=False)
    return pc


class TripleType(NamedTuple):
    """Intersection sizes (|a|, |b|, |c|, |a&b|, |a&c|, |b&c|, |a&b&c|)."""

    a: int
    b: int
    c: int
    ab: int
    ac: int
    bc: int
    abc: int


def triple_invariant(a: int, b: int, c: int) -> TripleType:
    return TripleType(size(a), size(b), size(c), size(a & b), size(a & c),
                      size(b & c), size(a & b & c))


def is_triangle(a: int, b: int, c: int) -> bool:
    """True iff each of a, b, c lies inside the union of the other two."""
    return (a & ~(b | c)) == 0 and (b & ~(a | c)) == 0 and (c & ~(a | b)) == 0


# -- permutations of points acting on subsets ------------------------------

@functools.lru_cache(maxsize=None)
def all_permutations(degree: int) -> np.ndarray:
    """Every permutation of ``range(degree)`` as rows of images, lexicographic."""
    if degree > MAX_SCAN_DEGREE:
        raise ValueError(f"degree {degree} exceeds scan limit {MAX_SCAN_DEGREE}")
    perms = np.array(list(itertools.permutations(range(degree))), dtype=np.int8)
    perms = perms.reshape(-1, degree)
    perms.setflags(write=False)
    return perms


def subset_images(perms: np.ndarray, degree: int) -> np.ndarray:
    """Image of every subset under every permutation.

    ``perms`` has shape (K, degree) with 0-based images; the result has shape
    (K, 2**degree) and entry [k, a] is the bitmask of ``perms[k](a)``.
    """
    perms = np.asarray(perms, dtype=np.int64).reshape(-1, degree)
    n = 1 << degree
    masks = np.arange(n, dtype=np.int64)
    out = np.zeros((perms.shape[0], n), dtype=np.int64)
    for i in range(degree):
        bit = ((masks >> i) & 1)[None, :]
        out |= bit << perms[:, i][:, None]
    return out


def _normalize(colors: np.ndarray) -> np.ndarray:
    """Renumber colors by order of first occurrence."""
    _, first, inverse = np.unique(colors, return_index=True, return_inverse=True)
    relabel = np.empty(len(first), dtype=np.int32)
    relabel[np.argsort(first, kind="stable")] = np.arange(len(first), dtype=np.int32)
    return relabel[inverse.reshape(-1)]


class SetPartition:
    """A coloring of all ``2**degree`` subsets of ``[degree]``.

    Colors are renumbered by first occurrence in bitmask order on
    construction, so ``colors`` is a canonical encoding of the partition and
    the empty set always has color 0.
    """

    __slots__ = ("degree", "colors", "rank", "_cells", "_hash")

    def __init__(self, degree: int, colors: Sequence[int] | np.ndarray):
        if not 0 <= degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in 0..{MAX_DEGREE}, got {degree}")
        colors = np.asarray(colors).reshape(-1)
        if colors.shape[0] != 1 << degree:
            raise ValueError(f"expected {1 << degree} colors, got {colors.shape[0]}")
        normalized = _normalize(colors)
        normalized.setflags(write=False)
        self.degree = degree
        self.colors = normalized
        self.rank = int(normalized.max()) + 1
        self._cells = None
        self._hash = None

    @classmethod
    def from_cells(cls, degree: int, cells: Iterable[Iterable[int]]) -> "SetPartition":
        """Build from cells given as bitmasks; raises if they do not partition."""
        n = 1 << degree
        colors = np.full(n, -1, dtype=np.int64)
        for idx, cell in enumerate(cells):
            for a in cell:
                if not 0 <= a < n:
                    raise ElementOutOfRangeError(f"subset {a:#x} outside degree {degree}")
                if colors[a] >= 0:
                    raise DuplicateSubsetError(f"subset {list(elements(a))} appears twice")
                colors[a] = idx
        missing = np.flatnonzero(colors < 0)
        if len(missing):
            raise NotAPartitionError(
                f"not a partition: subset {list(elements(int(missing[0])))} is missing")
        return cls(degree, colors)

    @classmethod
    def trivial(cls, degree: int) -> "SetPartition":
        return cls(degree, popcounts(degree))

    @classmethod
    def discrete(cls, degree: int) -> "SetPartition":
        return cls(degree, np.arange(1 << degree))

    # cells ------------------------------------------------------------
    def cells(self) -> list[np.ndarray]:
        """Members of each cell, in color order; each array sorted."""
        if self._cells is None:
            order = np.argsort(self.colors, kind="stable")
            bounds = np.searchsorted(self.colors[order], np.arange(self.rank + 1))
            self._cells = [order[bounds[i]:bounds[i + 1]] for i in range(self.rank)]
        return self._cells

    def cell(self, color: int) -> np.ndarray:
        return self.cells()[color]

    def cell_of(self, a: int) -> int:
        return int(self.colors[a])

    def cell_member_sizes(self) -> np.ndarray:
        """|a| for the first member a of each cell."""
        pc = popcounts(self.degree)
        return np.array([pc[c[0]] for c in self.cells()], dtype=np.int64)

    def is_size_homogeneous(self) -> bool:
        pc = popcounts(self.degree)
        return bool(np.all(pc == self.cell_member_sizes()[self.colors]))

    def is_homogeneous(self) -> bool:
        """The singletons form one cell."""
        singles = [1 << i for i in range(self.degree)]
        color = self.colors[singles[0]] if singles else None
        if color is None:
            return True
        return len(self.cell(int(color))) == self.degree and bool(
            np.all(self.colors[singles] == color))

    def split_by_size(self) -> "SetPartition":
        pc = popcounts(self.degree)
        return SetPartition(self.degree, self.colors.astype(np.int64) * (self.degree + 1) + pc)

    def complement_cell(self, color: int) -> np.ndarray:
        full = (1 << self.degree) - 1
        return np.sort(full ^ self.cell(color))

    # order and relabeling --------------------------------------------
    def refines(self, other: "SetPartition") -> bool:
        """True iff every cell of ``self`` lies inside a cell of ``other``."""
        if self.degree != other.degree:
            return False
        pairs = np.unique(self.colors.astype(np.int64) * other.rank + other.colors)
        return len(pairs) == self.rank

    def __le__(self, other: "SetPartition") -> bool:
        return self.refines(other)

    def permute(self, perm: Sequence[int]) -> "SetPartition":
        """Image of the partition under a point permutation (0-based images)."""
        img = subset_images(np.asarray(perm)[None, :], self.degree)[0]
        colors = np.empty_like(self.colors)
        colors[img] = self.colors
        return SetPartition(self.degree, colors)

    def with_split(self, members: Iterable[int]) -> "SetPartition":
        """Move ``members`` into a fresh color (each keeps its cell otherwise)."""
        colors = self.colors.astype(np.int64) * 2
        idx = np.fromiter(members, dtype=np.int64)
        colors[idx] += 1
        return SetPartition(self.degree, colors)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SetPartition):
            return NotImplemented
        return self.degree == other.degree and np.array_equal(self.colors, other.colors)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.degree, self.colors.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"SetPartition(degree={self.degree}, rank={self.rank})"


# -- canonical forms ---------------------------------------------------------

def lexmin_relabeling(colors: np.ndarray, perms: np.ndarray, images,
                      chunk: int = 20000) -> tuple[np.ndarray, int]:
    """Lexicographically least recolored array over a family of relabelings.

    ``images(rows, x)`` must return, for the permutations ``perms[rows]``,
    the index that position ``x`` reads from.  Each candidate array is
    renumbered by first occurrence before comparison.  Returns the least
    array and the index of one permutation attaining it.
    """
    n = len(colors)
    rank = int(colors.max()) + 1
    best: list[int] | None = None
    best_row = -1
    for start in range(0, len(perms), chunk):
        rows = np.arange(start, min(start + chunk, len(perms)))
        labels = np.full((len(rows), rank), -1, dtype=np.int32)
        counts = np.zeros(len(rows), dtype=np.int32)
        local = np.arange(len(rows))
        prefix: list[int] = []
        tied = best is not None
        for x in range(n):
            v = colors[images(rows[local], x)]
            cur = labels[local, v]
            fresh = cur < 0
            if fresh.any():
                labels[local[fresh], v[fresh]] = counts[local[fresh]]
                counts[local[fresh]] += 1
                cur = labels[local, v]
            low = int(cur.min())
            keep = cur == low
            local = local[keep]
            prefix.append(low)
            if tied:
                if low > best[x]:
                    break
                if low < best[x]:
                    tied = False
        else:
            if best is None or prefix < best:
                best = prefix
                best_row = int(rows[local[0]])
    return np.array(best, dtype=np.int64), best_row


def _subset_reader(perms: np.ndarray, degree: int):
    bits_of = [[i for i in range(degree) if (x >> i) & 1] for x in range(1 << degree)]
    p64 = perms.astype(np.int64)

    def images(rows, x):
        out = np.zeros(len(rows), dtype=np.int64)
        for i in bits_of[x]:
            out |= np.int64(1) << p64[rows, i]
        return out

    return images


def canonical_labeling(S: SetPartition) -> tuple[bytes, tuple[int, ...]]:
    """Canonical form of ``S`` and a relabeling (0-based images) attaining it.

    ``S.permute(perm)`` has color array equal to the canonical one.
    """
    d = S.degree
    perms = all_permutations(d)
    best, row = lexmin_relabeling(S.colors, perms, _subset_reader(perms, d))
    # position x of S^g reads colors[h(x)] with h = g^-1
    h = perms[row].astype(np.int64)
    g = np.empty(d, dtype=np.int64)
    g[h] = np.arange(d)
    form = bytes([d]) + best.astype("<u2").tobytes()
    return form, tuple(int(i) for i in g)


def canonical_form(S: SetPartition) -> bytes:
    """Least first-occurrence color array over all relabelings of [d].

    Equal for two partitions iff they are weakly isomorphic.
    """
    return canonical_labeling(S)[0]


def from_canonical_form(form: bytes) -> SetPartition:
    d = form[0]
    return SetPartition(d, np.frombuffer(form[1:], dtype="<u2").astype(np.int64))


# -- scheme file format ------------------------------------------------------

def _cell_key(cell: np.ndarray) -> tuple[int, int]:
    first = int(cell[0])
    return size(first), first


def canonical_cells(S: SetPartition) -> list[list[int]]:
    """Cells as sorted bitmask lists, ordered by (member size, smallest mask)."""
    cells = [sorted(int(a) for a in c) for c in S.cells()]
    cells.sort(key=lambda c: (size(c[0]), c[0]))
    return cells


def serialize_partition(S: SetPartition) -> str:
    lines = []
    for cell in canonical_cells(S):
        lines.append("  " + json.dumps([list(elements(a)) for a in cell]))
    return '{"degree": %d, "cells": [\n%s\n]}\n' % (S.degree, ",\n".join(lines))


def parse_partition(text: str) -> SetPartition:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedSchemeError(f"malformed scheme file: {exc}") from None
    if not isinstance(doc, dict) or "degree" not in doc or "cells" not in doc:
        raise MalformedSchemeError("malformed scheme file: need 'degree' and 'cells'")
    d = doc["degree"]
    if not isinstance(d, int) or isinstance(d, bool) or not 0 <= d <= MAX_DEGREE:
        raise MalformedSchemeError(f"malformed scheme file: bad degree {d!r}")
    cells = doc["cells"]
    if not isinstance(cells, list):
        raise MalformedSchemeError("malformed scheme file: 'cells' must be a list")
    masks = []
    for cell in cells:
        if not isinstance(cell, list) or not cell:
            raise MalformedSchemeError("malformed scheme file: each cell is a nonempty list")
        members = []
        for sub in cell:
            if not isinstance(sub, list) or not all(
                    isinstance(x, int) and not isinstance(x, bool) for x in sub):
                raise MalformedSchemeError(f"malformed scheme file: bad subset {sub!r}")
            if any(x < 1 or x > d for x in sub):
                raise ElementOutOfRangeError(f"element out of range 1..{d} in {sub}")
            if any(x >= y for x, y in zip(sub, sub[1:])):
                raise MalformedSchemeError(f"malformed scheme file: subset {sub} not increasing")
            members.append(subset(sub))
        masks.append(members)
    return SetPartition.from_cells(d, masks)


def read_partition(path) -> SetPartition:
    with open(path) as fh:
        return parse_partition(fh.read())


def write_partition(S: SetPartition, path) -> None:
    with open(path, "w") as fh:
        fh.write(serialize_partition(S))
