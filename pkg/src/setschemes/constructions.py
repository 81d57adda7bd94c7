"""Building schemes: direct sums, wreath products, index-two splits, the catalog."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .coherence import is_coherent, is_fully_coherent
from .core import MAX_DEGREE, SetPartition, canonical_cells, subset
from .groups import (PermGroup, automorphism_group, describe_group, is_schurian,
                     is_transitive, named_group, orbital_scheme, symmetric_group)


def direct_sum(S: SetPartition, T: SetPartition) -> SetPartition:
    """Cells ``alpha + beta = {a | b << S.degree}`` on the disjoint union of the points."""
    d, e = S.degree, T.degree
    if d + e > MAX_DEGREE:
        raise ValueError(f"degree {d + e} exceeds {MAX_DEGREE}")
    colors = S.colors.astype(np.int64)[None, :] * T.rank + T.colors.astype(np.int64)[:, None]
    return SetPartition(d + e, colors.ravel())


def _tuple_colors(S: SetPartition, k: int) -> np.ndarray:
    """Per-block colors ``(c(a_1), ..., c(a_k))`` for every subset of [k*d], shape (2**(kd), k)."""
    d = S.degree
    masks = np.arange(1 << (k * d), dtype=np.int64)
    low = (1 << d) - 1
    return np.stack([S.colors.astype(np.int64)[(masks >> (i * d)) & low] for i in range(k)], axis=1)


def wreath_product(S: SetPartition, G: PermGroup) -> SetPartition:
    """Fuse the cells of S^k along the G-orbits of their color tuples."""
    k = G.degree
    if k * S.degree > MAX_DEGREE:
        raise ValueError(f"degree {k * S.degree} exceeds {MAX_DEGREE}")
    tuples = _tuple_colors(S, k)
    weights = S.rank ** np.arange(k - 1, -1, -1, dtype=np.int64)
    best = None
    for g in G.elements:
        moved = np.empty_like(tuples)
        moved[:, g.astype(np.int64)] = tuples
        code = moved @ weights
        best = code if best is None else np.minimum(best, code)
    return SetPartition(k * S.degree, best)


def orbit_preserving_block_group(S: SetPartition, G: PermGroup) -> PermGroup:
    """Permutations of the k blocks that keep every G-orbit of color tuples."""
    k = G.degree
    tuples = np.array(list(itertools.product(range(S.rank), repeat=k)), dtype=np.int64)
    weights = S.rank ** np.arange(k - 1, -1, -1, dtype=np.int64)

    def fuse(rows):
        best = None
        for g in G.elements:
            moved = np.empty_like(rows)
            moved[:, g.astype(np.int64)] = rows
            code = moved @ weights
            best = code if best is None else np.minimum(best, code)
        return best

    base = fuse(tuples)
    keep = []
    for h in symmetric_group(k).elements:
        moved = np.empty_like(tuples)
        moved[:, h.astype(np.int64)] = tuples
        if np.array_equal(fuse(moved), base):
            keep.append(h)
    return PermGroup(k, elements=np.array(keep))


# -- splitting along an index-two subgroup ------------------------------------

def split_cells(G: PermGroup, H: PermGroup) -> list[np.ndarray]:
    """Cells of the G-orbit partition that break up under H, in canonical cell order."""
    SG, SH = orbital_scheme(G), orbital_scheme(H)
    out = []
    for cell in canonical_cells(SG):
        if len(np.unique(SH.colors[cell])) > 1:
            out.append(np.array(cell, dtype=np.int64))
    return out


def split_scheme(G: PermGroup, H: PermGroup, which) -> SetPartition:
    """Refine the G-orbit partition by splitting the selected cells into H-orbits.

    ``which`` holds indices into :func:`split_cells`.  Coherence of the
    result is not guaranteed.
    """
    if len(G) != 2 * len(H) or not H.is_subgroup_of(G):
        raise ValueError("H must be a subgroup of index 2 in G")
    cells = split_cells(G, H)
    which = sorted(set(which))
    if not which or len(which) == len(cells):
        raise ValueError("which must be a proper nonempty subset of the split cells")
    if which[0] < 0 or which[-1] >= len(cells):
        raise ValueError(f"split cell index out of range 0..{len(cells) - 1}")
    SG, SH = orbital_scheme(G), orbital_scheme(H)
    colors = SG.colors.astype(np.int64) * 2
    for i in which:
        cell = cells[i]
        colors[cell] += (SH.colors[cell] != SH.colors[cell[0]])
    return SetPartition(G.degree, colors)


def split_index(G: PermGroup, H: PermGroup, members) -> int:
    """Index of the split cell containing the given subset (bitmask)."""
    for i, cell in enumerate(split_cells(G, H)):
        if members in cell:
            return i
    raise ValueError("subset does not lie in a split cell")


def partner_indices(G: PermGroup, H: PermGroup, which) -> list[int]:
    return [i for i in range(len(split_cells(G, H))) if i not in set(which)]


def separate(S: SetPartition, *parts) -> SetPartition:
    """Move each listed collection of subsets into its own cell."""
    for part in parts:
        S = S.with_split(part)
    return S


# -- the catalog ----------------------------------------------------------------

def _z8(points) -> int:
    """Bitmask of residues mod 8 (residue z is point z + 1)."""
    return subset(z + 1 for z in points)


def _progressions() -> list[int]:
    """4-term progressions a, a+d, a+2d, a+3d mod 8 with a even and d in {1, 5}."""
    return sorted({_z8((a + i * d) % 8 for i in range(4)) for a in range(0, 8, 2) for d in (1, 5)})


S7_ALPHA = [(1, 2, 3), (1, 3, 6), (1, 4, 7), (1, 7, 8), (2, 5, 7), (3, 4, 5), (3, 5, 8), (5, 6, 7)]
S7_BETA = [(1, 2, 3, 6), (1, 4, 7, 8), (2, 5, 6, 7), (3, 4, 5, 8)]


@dataclass(frozen=True)
class TableRow:
    rank: int
    aut_order: int
    aut_description: str
    homogeneous: bool
    vertex_transitive: bool
    fully_coherent: bool
    schurian: bool


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    scheme: SetPartition
    group_pair: tuple[str, str]
    expected: TableRow


# Golden rows for the nonschurian catalog: degree 8 then degree 9.
EXPECTED_TABLE1 = {
    "S1": TableRow(25, 16, "Q8∘C4", True, True, True, False),
    "S2": TableRow(30, 16, "Q8∘C4", True, True, True, False),
    "S3": TableRow(28, 8, "Q8", True, True, True, False),
    "S4": TableRow(36, 8, "Q8", True, True, True, False),
    "S5": TableRow(28, 8, "C4 × C2", True, False, True, False),
    "S6": TableRow(51, 8, "C4 × C2", False, False, True, False),
    "S7": TableRow(43, 8, "C4 × C2", False, False, True, False),
    "S8": TableRow(49, 8, "C4 × C2", False, False, True, False),
}
EXPECTED_TABLE2 = {
    "N9a": TableRow(24, 27, "C9⋊C3", True, True, True, False),
    "N9b": TableRow(26, 27, "C9⋊C3", True, True, True, False),
}
CATALOG_IDS = tuple(EXPECTED_TABLE1) + tuple(EXPECTED_TABLE2)

_PAIRS = {"S1": ("G1", "H1"), "S2": ("G1", "H1"), "S3": ("G2", "H2"), "S4": ("G2", "H2"),
          "S5": ("G3", "H3"), "S6": ("G3", "H3"), "S7": ("G4", "H4"), "S8": ("G4", "H4"),
          "N9a": ("A9", "M27"), "N9b": ("A9", "M27")}


def _selection(G: PermGroup, H: PermGroup, base: SetPartition) -> list[int]:
    """Indices of the split cells that ``base`` actually splits."""
    out = []
    for i, cell in enumerate(split_cells(G, H)):
        if len(np.unique(base.colors[cell])) > 1:
            out.append(i)
    return out


def _build(name: str) -> SetPartition:
    gname, hname = _PAIRS[name]
    G, H = named_group(gname), named_group(hname)
    SG = orbital_scheme(G)
    first = name in ("S1", "S3", "S5", "S7", "N9a")
    if gname in ("G1", "G2", "G3"):
        alpha = _progressions()
        base = SG.with_split(alpha)
        # the complementary cell of alpha_1 is alpha_1 itself, so one split suffices
    elif gname == "G4":
        full = (1 << 8) - 1
        alpha = [subset(s) for s in S7_ALPHA]
        beta = [subset(s) for s in S7_BETA]
        base = separate(SG, alpha, [full ^ a for a in alpha], beta)
    else:
        # residues {1,2,3,5} and {1,2,3,6} of Z/9 are points {2,3,4,6} and {2,3,4,7}
        SH = orbital_scheme(H)
        x, y = subset((2, 3, 4, 6)), subset((2, 3, 4, 7))
        if SG.colors[x] != SG.colors[y] or SH.colors[x] == SH.colors[y]:
            raise RuntimeError(f"{name}: the two 4-sets do not form one split G-cell")
        full = (1 << 9) - 1
        alpha = np.flatnonzero(SH.colors == SH.colors[x])
        base = SG.with_split(alpha).with_split(full ^ alpha)
    which = _selection(G, H, base)
    built = split_scheme(G, H, which)
    if built != base:
        raise RuntimeError(f"{name}: direct construction disagrees with the index-two split")
    if not first:
        built = split_scheme(G, H, partner_indices(G, H, which))
    return built


@functools.lru_cache(maxsize=None)
def catalog(name: str) -> CatalogEntry:
    """A named nonschurian scheme, verified triangle-coherent."""
    if name not in _PAIRS:
        raise KeyError(f"unknown catalog id {name!r}; choose from {', '.join(CATALOG_IDS)}")
    S = _build(name)
    if not is_coherent(S, "triangle"):
        raise RuntimeError(f"{name}: construction is not coherent")
    expected = EXPECTED_TABLE1.get(name) or EXPECTED_TABLE2[name]
    return CatalogEntry(name, S, _PAIRS[name], expected)


def table_row(S: SetPartition) -> TableRow:
    aut = automorphism_group(S)
    return TableRow(
        rank=S.rank,
        aut_order=aut.order,
        aut_description=describe_group(aut),
        homogeneous=S.is_homogeneous(),
        vertex_transitive=is_transitive(aut),
        fully_coherent=is_fully_coherent(S),
        schurian=is_schurian(S, aut),
    )
