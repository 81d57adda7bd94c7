"""Coherence of power-set partitions and the set-scheme WL refinement.

For a subset ``a`` the *fingerprint* is the exact multiset of
``(color(b), color(c), type(a, b, c))`` over pairs ``(b, c)``; in triangle
mode only pairs forming a triangle with ``a`` are counted.  A partition is
coherent when fingerprints are constant on cells.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import SetPartition, TripleType, popcounts

MODES = ("triangle", "all")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def triangle_pairs(degree: int, a: int) -> tuple[np.ndarray, np.ndarray]:
    """All (b, c) with (a, b, c) a triangle.

    Outside ``a`` the two sets agree; each point of ``a`` lies in b only, in
    c only, or in both.  There are ``3**|a| * 2**(degree - |a|)`` pairs.
    """
    inside = [i for i in range(degree) if a >> i & 1]
    outside = [i for i in range(degree) if not a >> i & 1]
    b = np.zeros(1, dtype=np.int64)
    c = np.zeros(1, dtype=np.int64)
    for i in inside:
        bit = np.int64(1 << i)
        b = np.concatenate([b | bit, b, b | bit])
        c = np.concatenate([c, c | bit, c | bit])
    e = np.zeros(1, dtype=np.int64)
    for i in outside:
        e = np.concatenate([e, e | np.int64(1 << i)])
    return (b[:, None] | e[None, :]).ravel(), (c[:, None] | e[None, :]).ravel()


class _Keyer:
    """Integer encoding of (color(b), color(c), type(a, b, c)) for one partition."""

    def __init__(self, S: SetPartition, mode: str):
        self.S = S
        self.mode = mode
        self.degree = d = S.degree
        self.R = S.rank
        self.D = d + 1
        self.pc = popcounts(d)
        self.col = S.colors.astype(np.int64)
        if mode == "all":
            n = 1 << d
            b = np.repeat(np.arange(n, dtype=np.int64), n)
            c = np.tile(np.arange(n, dtype=np.int64), n)
            D = self.D
            self._bc = b & c
            self._b, self._c = b, c
            self._base = ((self.col[b] * self.R + self.col[c]) * D + self.pc[self._bc]) * D ** 3

    def keys(self, a: int) -> np.ndarray:
        D, pc = self.D, self.pc
        if self.mode == "all":
            pa = pc[a & np.arange(1 << self.degree, dtype=np.int64)]
            return self._base + pa[self._b] * D * D + pa[self._c] * D + pc[a & self._bc]
        b, c = triangle_pairs(self.degree, a)
        col = self.col
        return ((((col[b] * self.R + col[c]) * D + pc[b & c]) * D + pc[a & b]) * D
                + pc[a & c]) * D + pc[a & b & c]

    def counts(self, a: int) -> tuple[np.ndarray, np.ndarray]:
        return np.unique(self.keys(a), return_counts=True)

    def fingerprint(self, a: int) -> bytes:
        k, n = self.counts(a)
        return k.tobytes() + b"|" + n.astype(np.int64).tobytes()

    def decode(self, a: int, key: int) -> tuple[int, int, TripleType]:
        D, R = self.D, self.R
        key, abc = divmod(int(key), D)
        key, ac = divmod(key, D)
        key, ab = divmod(key, D)
        key, bc = divmod(key, D)
        beta, gamma = divmod(key, R)
        sizes = self.S.cell_member_sizes()
        tau = TripleType(int(self.pc[a]), int(sizes[beta]), int(sizes[gamma]), ab, ac, bc, abc)
        return beta, gamma, tau


def _fingerprints(keyer: _Keyer, subsets: np.ndarray, threads: int) -> list[bytes]:
    subsets = [int(a) for a in subsets]
    if threads <= 1 or len(subsets) < 2:
        return [keyer.fingerprint(a) for a in subsets]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(keyer.fingerprint, subsets, chunksize=max(1, len(subsets) // (4 * threads))))


def wl_step(S: SetPartition, mode: str = "triangle", orbit_labels: np.ndarray | None = None,
            threads: int = 1) -> tuple[SetPartition, bool]:
    """One refinement round; returns the refined partition and whether nothing split.

    ``orbit_labels`` (least member of each subset's orbit under a group of
    cell-preserving permutations) lets the round fingerprint one subset per
    orbit and copy the result to the rest.
    """
    _check_mode(mode)
    if not S.is_size_homogeneous():
        return S.split_by_size(), False
    keyer = _Keyer(S, mode)
    n = 1 << S.degree
    if orbit_labels is None:
        reps = np.arange(n)
        rep_of = reps
    else:
        reps, rep_of = np.unique(orbit_labels, return_inverse=True)
    prints = _fingerprints(keyer, reps, threads)
    ids: dict[bytes, int] = {}
    rep_ids = np.array([ids.setdefault(fp, len(ids)) for fp in prints], dtype=np.int64)
    new = S.colors.astype(np.int64) * len(ids) + rep_ids[rep_of]
    refined = SetPartition(S.degree, new)
    return refined, refined.rank == S.rank


def wl_stabilize(S: SetPartition, mode: str = "triangle", use_aut: bool = False,
                 threads: int = 1) -> SetPartition:
    """Coarsest refinement of S that is coherent in the given mode."""
    _check_mode(mode)
    if not S.is_size_homogeneous():
        S = S.split_by_size()
    labels = None
    if use_aut:
        from .groups import automorphism_group, subset_orbit_labels
        labels = subset_orbit_labels(automorphism_group(S))
    while True:
        S, stable = wl_step(S, mode, orbit_labels=labels, threads=threads)
        if stable:
            return S


def is_coherent(S: SetPartition, mode: str = "triangle") -> bool:
    """Size-homogeneous and coherent for the types of the given mode."""
    return S.is_size_homogeneous() and wl_step(S, mode)[1]


def is_fully_coherent(S: SetPartition) -> bool:
    return is_coherent(S, "all")


# -- structure constants ------------------------------------------------------

@dataclass(frozen=True)
class CoherenceWitness:
    """Two members of one cell whose counts differ for some (beta, gamma, type)."""

    alpha: int
    a: int
    a_prime: int
    beta: int
    gamma: int
    tau: TripleType
    counts: tuple[int, int]


@dataclass
class StructureConstantTable:
    """Nonzero p(alpha, beta, gamma, tau), keyed by cell colors and triple type."""

    degree: int
    mode: str
    entries: dict[tuple[int, int, int, TripleType], int]

    def __getitem__(self, key) -> int:
        return self.entries.get(key, 0)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["alpha", "beta", "gamma"] + [f"tau{i}" for i in range(1, 8)] + ["p"])
        for (al, be, ga, tau), p in sorted(self.entries.items()):
            w.writerow([al, be, ga, *tau, p])
        return out.getvalue()


def structure_constants(S: SetPartition, mode: str = "triangle"
                        ) -> StructureConstantTable | CoherenceWitness:
    """Full table when S is coherent, otherwise the first witness found.

    Cells are scanned in color order and members in bitmask order; the
    witness pairs the cell's first member with the first member that
    disagrees, at the least differing key.
    """
    _check_mode(mode)
    if not S.is_size_homogeneous():
        raise ValueError("partition is not size-homogeneous")
    keyer = _Keyer(S, mode)
    entries: dict[tuple[int, int, int, TripleType], int] = {}
    for alpha, cell in enumerate(S.cells()):
        a0 = int(cell[0])
        k0, n0 = keyer.counts(a0)
        for a in cell[1:]:
            a = int(a)
            k1, n1 = keyer.counts(a)
            if np.array_equal(k0, k1) and np.array_equal(n0, n1):
                continue
            c0 = dict(zip(k0.tolist(), n0.tolist()))
            c1 = dict(zip(k1.tolist(), n1.tolist()))
            key = min(k for k in c0.keys() | c1.keys() if c0.get(k, 0) != c1.get(k, 0))
            beta, gamma, tau = keyer.decode(a0, key)
            return CoherenceWitness(alpha, a0, a, beta, gamma, tau, (c0.get(key, 0), c1.get(key, 0)))
        for key, count in zip(k0.tolist(), n0.tolist()):
            beta, gamma, tau = keyer.decode(a0, key)
            entries[(alpha, beta, gamma, tau)] = int(count)
    return StructureConstantTable(S.degree, mode, entries)


# -- consequences of triangle coherence ---------------------------------------

def complement_closed(S: SetPartition) -> bool:
    """The complement of every cell is a cell."""
    full = (1 << S.degree) - 1
    comp = S.colors[full ^ np.arange(1 << S.degree)]
    # complementation maps cells onto cells iff it induces a bijection on colors
    pairs = np.unique(S.colors.astype(np.int64) * S.rank + comp)
    return len(pairs) == S.rank


def containment_degrees(S: SetPartition) -> np.ndarray:
    """``D[a, beta]`` = number of b in cell beta with a a subset of b."""
    n = 1 << S.degree
    idx = np.arange(n, dtype=np.int64)
    contained = (idx[:, None] & ~idx[None, :]) == 0
    onehot = np.zeros((n, S.rank), dtype=np.int64)
    onehot[idx, S.colors] = 1
    return contained.astype(np.int64) @ onehot


def containment_biregular(S: SetPartition) -> bool:
    """For all cells alpha, beta, containment between them is biregular."""
    up = containment_degrees(S)
    n = 1 << S.degree
    idx = np.arange(n, dtype=np.int64)
    contains = (idx[None, :] & ~idx[:, None]) == 0
    onehot = np.zeros((n, S.rank), dtype=np.int64)
    onehot[idx, S.colors] = 1
    down = contains.astype(np.int64) @ onehot
    for cell in S.cells():
        if not (np.all(up[cell] == up[cell[0]]) and np.all(down[cell] == down[cell[0]])):
            return False
    return True
