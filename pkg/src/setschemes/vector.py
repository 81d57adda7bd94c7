"""Vector association schemes: partitions of {0..k}^d with polynomial structure constants.

A profile ``a`` in {0..k}^d is stored by its index ``sum(a[i] * (k+1)**i)``.
For k-subsets u, v, w of [m] the Johnson count ``p^a_{bc}(m)`` is the number
of w with ``|u - w| = b`` and ``|w - v| = c`` when ``|u - v| = a``.
"""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import lexmin_relabeling
from .groups import PermGroup, symmetric_group
from .polynomial import RationalPolynomial


# -- Johnson structure polynomials ---------------------------------------------

@functools.lru_cache(maxsize=None)
def johnson_p(k: int, a: int, b: int, c: int) -> RationalPolynomial:
    """p^a_{bc} of the Johnson scheme J(m, k) as an exact polynomial in m."""
    if not all(0 <= x <= k for x in (a, b, c)):
        raise ValueError(f"entries must lie in 0..{k}")
    total = RationalPolynomial()
    for i in range(0, k - a + 1):
        coef = math.comb(k - a, i) * _comb(a, k - b - i) * _comb(a, k - c - i)
        if coef:
            total = total + RationalPolynomial.binomial(k + a, b + c + i - k) * coef
    return total


def _comb(n: int, r: int) -> int:
    return math.comb(n, r) if 0 <= r <= n else 0


@functools.lru_cache(maxsize=None)
def _k_subsets(m: int, k: int) -> np.ndarray:
    return np.array([sum(1 << x for x in s) for s in itertools.combinations(range(m), k)],
                    dtype=np.int64)


def _popcount(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    while np.any(x):
        out += x & 1
        x = x >> 1
    return out


def johnson_p_oracle(m: int, k: int, a: int, b: int, c: int) -> int:
    """Count w by brute force for one pair (u, v) with |u - v| = a."""
    if not (0 <= a <= k and k + a <= m):
        raise ValueError(f"no pair of {k}-subsets of [{m}] differs in {a} points")
    u = (1 << k) - 1
    v = (u >> a) << a | (((1 << a) - 1) << k)
    w = _k_subsets(m, k)
    hits = (_popcount(u & ~w) == b) & (_popcount(w & ~v) == c)
    return int(np.count_nonzero(hits))


def delta_condition(a, b, c) -> bool:
    """Triangle inequalities, componentwise for profiles."""
    a, b, c = (np.atleast_1d(np.asarray(x)) for x in (a, b, c))
    return bool(np.all(a <= b + c) and np.all(b <= a + c) and np.all(c <= a + b))


def profile_polynomial(k: int, a, b, c) -> RationalPolynomial:
    """Product over coordinates of the Johnson polynomials."""
    poly = RationalPolynomial.constant(1)
    for x, y, z in zip(a, b, c):
        poly = poly * johnson_p(k, int(x), int(y), int(z))
    return poly


def leading_term(k: int, a, b, c) -> RationalPolynomial:
    """Leading monomial of the profile polynomial when ``b = a + c``."""
    a, b, c = (np.atleast_1d(np.asarray(x)) for x in (a, b, c))
    if not np.array_equal(b, a + c):
        raise ValueError("leading-term formula needs b = a + c componentwise")
    if np.any(b > k) or np.any(a < 0) or np.any(c < 0):
        raise ValueError(f"entries must lie in 0..{k}")
    coef = Fraction(1)
    for x, y, z in zip(a.tolist(), b.tolist(), c.tolist()):
        coef *= Fraction(math.factorial(k - x), math.factorial(k - y) * math.factorial(z) ** 2)
    return RationalPolynomial.monomial(coef, int(c.sum()))


# -- profiles and partitions -------------------------------------------------

@functools.lru_cache(maxsize=None)
def profiles(k: int, d: int) -> np.ndarray:
    """All profiles as rows, row ``i`` having index ``i``."""
    idx = np.arange((k + 1) ** d)
    out = np.stack([(idx // (k + 1) ** i) % (k + 1) for i in range(d)], axis=1)
    out.setflags(write=False)
    return out


def profile_index(profile, k: int) -> int:
    return int(sum(int(x) * (k + 1) ** i for i, x in enumerate(profile)))


@functools.lru_cache(maxsize=None)
def _relabel_table(k: int, d: int, perms_key: bytes) -> np.ndarray:
    perms = np.frombuffer(perms_key, dtype=np.int8).reshape(-1, d).astype(np.int64)
    P = profiles(k, d)
    weights = (k + 1) ** np.arange(d)
    out = np.empty((len(perms), len(P)), dtype=np.int64)
    for r, g in enumerate(perms):
        moved = np.empty_like(P)
        moved[:, g] = P
        out[r] = moved @ weights
    return out


def relabel_table(k: int, d: int, perms: np.ndarray) -> np.ndarray:
    """``T[r, x]`` = index of profile x with coordinate i moved to position perms[r][i]."""
    return _relabel_table(k, d, np.ascontiguousarray(perms, dtype=np.int8).tobytes())


class VectorPartitionError(ValueError):
    pass


class VectorPartition:
    """A coloring of {0..k}^d whose cells lie inside coordinate-permutation orbits."""

    __slots__ = ("k", "degree", "colors", "rank")

    def __init__(self, k: int, degree: int, colors):
        colors = np.asarray(colors, dtype=np.int64).reshape(-1)
        if len(colors) != (k + 1) ** degree:
            raise VectorPartitionError(f"expected {(k + 1) ** degree} colors")
        _, first, inv = np.unique(colors, return_index=True, return_inverse=True)
        relabel = np.empty(len(first), dtype=np.int64)
        relabel[np.argsort(first)] = np.arange(len(first))
        colors = relabel[inv.reshape(-1)]
        colors.setflags(write=False)
        self.k, self.degree, self.colors, self.rank = k, degree, colors, len(first)
        P = profiles(k, degree)
        shape = np.sort(P, axis=1) @ ((k + 1) ** np.arange(degree))
        pairs = np.unique(np.stack([colors, shape], axis=1), axis=0)
        if len(pairs) != self.rank:
            raise VectorPartitionError("a cell mixes profiles that are not coordinate permutations")
        if np.count_nonzero(colors == colors[0]) != 1:
            raise VectorPartitionError("the zero profile must form its own cell")

    @classmethod
    def from_cells(cls, k: int, degree: int, cells) -> "VectorPartition":
        n = (k + 1) ** degree
        colors = np.full(n, -1, dtype=np.int64)
        for c, cell in enumerate(cells):
            for prof in cell:
                if len(prof) != degree or any(not 0 <= int(x) <= k for x in prof):
                    raise VectorPartitionError(f"bad profile {prof}")
                i = profile_index(prof, k)
                if colors[i] >= 0:
                    raise VectorPartitionError(f"profile {list(prof)} appears twice")
                colors[i] = c
        if np.any(colors < 0):
            missing = profiles(k, degree)[np.flatnonzero(colors < 0)[0]]
            raise VectorPartitionError(f"not a partition: profile {missing.tolist()} is missing")
        return cls(k, degree, colors)

    def cells(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.colors == c) for c in range(self.rank)]

    def with_split(self, members) -> "VectorPartition":
        colors = self.colors * 2
        colors[np.asarray(members, dtype=np.int64)] += 1
        return VectorPartition(self.k, self.degree, colors)

    def permute(self, perm) -> "VectorPartition":
        table = relabel_table(self.k, self.degree, np.asarray([perm]))[0]
        colors = np.empty_like(self.colors)
        colors[table] = self.colors
        return VectorPartition(self.k, self.degree, colors)

    def is_homogeneous(self) -> bool:
        """The coordinate orbit of (0, ..., 0, 1) is one cell."""
        if self.degree == 0 or self.k == 0:
            return True
        units = [(self.k + 1) ** i for i in range(self.degree)]
        return (len(set(self.colors[units].tolist())) == 1
                and np.count_nonzero(self.colors == self.colors[units[0]]) == self.degree)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VectorPartition):
            return NotImplemented
        return (self.k, self.degree) == (other.k, other.degree) and np.array_equal(self.colors, other.colors)

    def __hash__(self) -> int:
        return hash((self.k, self.degree, self.colors.tobytes()))

    def __repr__(self) -> str:
        return f"VectorPartition(k={self.k}, degree={self.degree}, rank={self.rank})"


def trivial_vas(k: int, d: int) -> VectorPartition:
    return vas_orbital(symmetric_group(d), k)


def vas_orbital(G: PermGroup, k: int) -> VectorPartition:
    """Profiles colored by their orbit under coordinate permutations from G."""
    table = relabel_table(k, G.degree, G.elements)
    return VectorPartition(k, G.degree, table.min(axis=0))


def vas_automorphism_group(S: VectorPartition) -> PermGroup:
    """Coordinate permutations fixing every cell."""
    perms = symmetric_group(S.degree).elements
    table = relabel_table(S.k, S.degree, perms)
    keep = np.all(S.colors[table] == S.colors[None, :], axis=1)
    return PermGroup(S.degree, elements=perms[keep])


def vas_is_schurian(S: VectorPartition) -> bool:
    return vas_orbital(vas_automorphism_group(S), S.k) == S


def vas_canonical_form(S: VectorPartition) -> bytes:
    perms = symmetric_group(S.degree).elements
    table = relabel_table(S.k, S.degree, perms)
    best, _ = lexmin_relabeling(S.colors, perms, lambda rows, x: table[rows, x])
    return bytes([S.k, S.degree]) + best.astype("<u2").tobytes()


# -- coherence ----------------------------------------------------------------

@dataclass(frozen=True)
class VasWitness:
    alpha: int
    a: tuple[int, ...]
    a_prime: tuple[int, ...]
    beta: int
    gamma: int
    p_a: RationalPolynomial
    p_a_prime: RationalPolynomial


def structure_polynomial(S: VectorPartition, a: int, beta: int, gamma: int) -> RationalPolynomial:
    """p^a_{beta gamma}: sum over (b, c) in beta x gamma of the profile polynomials."""
    P = profiles(S.k, S.degree)
    total = RationalPolynomial()
    for b in np.flatnonzero(S.colors == beta):
        for c in np.flatnonzero(S.colors == gamma):
            if delta_condition(P[a], P[b], P[c]):
                total = total + profile_polynomial(S.k, P[a], P[b], P[c])
    return total


MAX_PROFILES = 125


@functools.lru_cache(maxsize=None)
def _coefficient_tensor(k: int, d: int) -> np.ndarray:
    """``C[a, b, c, j]`` = coefficient of m**j in ``(k!)**d`` times the profile polynomial.

    The scaling clears every denominator, so cell sums are exact integer arithmetic.
    """
    if (k + 1) ** d > MAX_PROFILES:
        raise ValueError(f"{(k + 1) ** d} profiles exceed the limit of {MAX_PROFILES}")
    scale = math.factorial(k)
    scalar = np.zeros((k + 1, k + 1, k + 1, k + 1), dtype=np.int64)
    for a, b, c in itertools.product(range(k + 1), repeat=3):
        coeffs = (johnson_p(k, a, b, c) * scale).coefficients
        if any(x.denominator != 1 for x in coeffs):
            raise ArithmeticError("scaled Johnson polynomial is not integral")
        scalar[a, b, c, :len(coeffs)] = [int(x) for x in coeffs]
    P = profiles(k, d)
    n = len(P)
    C = np.ones((n, n, n, 1), dtype=np.int64)
    for i in range(d):
        factor = scalar[P[:, i][:, None, None], P[:, i][None, :, None], P[:, i][None, None, :]]
        prod = np.zeros((n, n, n, C.shape[3] + k), dtype=np.int64)
        for j in range(C.shape[3]):
            prod[..., j:j + k + 1] += C[..., j:j + 1] * factor
        C = prod
    if int(np.abs(C).max()) * n * n >= 2 ** 62:
        raise OverflowError("coefficients too large for int64 cell sums")
    C.setflags(write=False)
    return C


def _cell_coefficients(S: VectorPartition) -> np.ndarray:
    """``F[a, beta, gamma, j]``: scaled coefficients of p^a_{beta gamma}."""
    C = _coefficient_tensor(S.k, S.degree)
    onehot = np.zeros((len(S.colors), S.rank), dtype=np.int64)
    onehot[np.arange(len(S.colors)), S.colors] = 1
    by_c = np.tensordot(C, onehot, axes=([2], [0]))  # a, b, j, gamma
    by_bc = np.tensordot(by_c, onehot, axes=([1], [0]))  # a, j, gamma, beta
    return by_bc.transpose(0, 3, 2, 1)


def vas_check(S: VectorPartition) -> tuple[bool, VasWitness | None]:
    """Whether p^a_{beta gamma} is the same polynomial for all a in each cell."""
    F = _cell_coefficients(S)
    P = profiles(S.k, S.degree)
    for alpha, cell in enumerate(S.cells()):
        a0 = int(cell[0])
        for a in cell[1:]:
            diff = np.argwhere(np.any(F[a] != F[a0], axis=-1))
            if len(diff):
                beta, gamma = (int(x) for x in diff[0])
                return False, VasWitness(alpha, tuple(P[a0].tolist()), tuple(P[int(a)].tolist()),
                                         beta, gamma, structure_polynomial(S, a0, beta, gamma),
                                         structure_polynomial(S, int(a), beta, gamma))
    return True, None


def vas_wl_stabilize(S: VectorPartition) -> VectorPartition:
    """Coarsest refinement of S whose structure polynomials are representative-independent."""
    while True:
        F = _cell_coefficients(S)
        flat = F.reshape(len(S.colors), -1)
        ids: dict[tuple[int, bytes], int] = {}
        colors = [ids.setdefault((int(c), row.tobytes()), len(ids)) for c, row in zip(S.colors, flat)]
        T = VectorPartition(S.k, S.degree, colors)
        if T.rank == S.rank:
            return S
        S = T


# -- consequences of coherence ---------------------------------------------------

def vas_complement_closed(S: VectorPartition) -> bool:
    P = profiles(S.k, S.degree)
    comp = (S.k - P) @ ((S.k + 1) ** np.arange(S.degree))
    pairs = np.unique(np.stack([S.colors, S.colors[comp]], axis=1), axis=0)
    return len(pairs) == S.rank


def vas_domination_biregular(S: VectorPartition) -> bool:
    P = profiles(S.k, S.degree)
    below = np.all(P[:, None, :] <= P[None, :, :], axis=2).astype(np.int64)
    onehot = np.zeros((len(P), S.rank), dtype=np.int64)
    onehot[np.arange(len(P)), S.colors] = 1
    up, down = below @ onehot, below.T @ onehot
    return all(np.all(up[c] == up[c[0]]) and np.all(down[c] == down[c[0]]) for c in S.cells())


def vas_row_sums_balanced(S: VectorPartition) -> bool:
    """Every cell's profiles sum to a constant vector."""
    P = profiles(S.k, S.degree)
    return all(len(set(P[c].sum(axis=0).tolist())) == 1 for c in S.cells())


# -- enumeration -----------------------------------------------------------------

@dataclass(frozen=True)
class VasResult:
    scheme: VectorPartition
    homogeneous: bool
    schurian: bool


def _proper_parts(cell: np.ndarray):
    n = len(cell)
    for size in range(1, n // 2 + 1):
        for part in itertools.combinations(cell.tolist(), size):
            yield part


def vas_enumerate(k: int, d: int) -> list[VasResult]:
    """Every vector association scheme on {0..k}^d up to coordinate relabeling.

    Walks the refinement lattice from the trivial scheme: split one cell,
    stabilize, keep one partition per relabeling class.
    """
    if (k + 1) ** d > 81:
        raise ValueError("profile space too large for exhaustive search")
    start = vas_wl_stabilize(trivial_vas(k, d))
    seen = {vas_canonical_form(start): start}
    queue = [start]
    while queue:
        S = queue.pop(0)
        for cell in S.cells():
            for part in _proper_parts(cell):
                T = vas_wl_stabilize(S.with_split(part))
                key = vas_canonical_form(T)
                if key not in seen:
                    seen[key] = T
                    queue.append(T)
    out = []
    for key in sorted(seen):
        S = seen[key]
        ok, _ = vas_check(S)
        if not ok:
            raise AssertionError("stabilized partition failed the exact check")
        out.append(VasResult(S, S.is_homogeneous(), vas_is_schurian(S)))
    return out


def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def vas_enumerate_naive(k: int, d: int, homogeneous_only: bool = False) -> list[VectorPartition]:
    """Brute force: every partition inside coordinate orbits, filtered by the exact check.

    With ``homogeneous_only``, blocks whose profiles do not sum to a constant
    vector are discarded before checking.
    """
    P = profiles(k, d)
    orbit = trivial_vas(k, d)
    choices = []
    for cell in orbit.cells():
        options = []
        for part in _set_partitions(cell.tolist()):
            if homogeneous_only and not all(len(set(P[b].sum(axis=0).tolist())) == 1 for b in part):
                continue
            options.append(part)
        choices.append(options)
    found = {}
    for combo in itertools.product(*choices):
        colors = np.empty(len(P), dtype=np.int64)
        c = 0
        for part in combo:
            for block in part:
                colors[block] = c
                c += 1
        S = VectorPartition(k, d, colors)
        if homogeneous_only and not S.is_homogeneous():
            continue
        if vas_check(S)[0]:
            found.setdefault(vas_canonical_form(S), S)
    return [found[key] for key in sorted(found)]


# -- file format and the k = 1 correspondence --------------------------------------

def serialize_vas(S: VectorPartition) -> str:
    P = profiles(S.k, S.degree)
    cells = sorted(S.cells(), key=lambda c: (int(P[c[0]].sum()), int(c[0])))
    lines = ["  " + json.dumps([P[i].tolist() for i in c]) for c in cells]
    return '{"k": %d, "degree": %d, "cells": [\n%s\n]}\n' % (S.k, S.degree, ",\n".join(lines))


def parse_vas(text: str) -> VectorPartition:
    try:
        doc = json.loads(text)
        k, d, cells = int(doc["k"]), int(doc["degree"]), doc["cells"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise VectorPartitionError(f"malformed VAS file: {exc}") from None
    return VectorPartition.from_cells(k, d, cells)


def vas_from_set_partition(S) -> VectorPartition:
    """k = 1: the profile of a subset is its indicator vector."""
    return VectorPartition(1, S.degree, S.colors)


def set_partition_from_vas(S: VectorPartition):
    from .core import SetPartition

    if S.k != 1:
        raise ValueError("only k = 1 profiles are subsets")
    return SetPartition(S.degree, S.colors)
