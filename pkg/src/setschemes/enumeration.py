"""Isomorph-free enumeration of the lattice of set association schemes.

Starting from the trivial scheme, every coherent partition is reached by
repeatedly splitting one cell ``alpha_i`` into a design-like part and the
rest and stabilizing.  Cells are visited in the order (member size, least
bitmask) up to size ``d // 2``; complements follow by complement closure.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .coherence import wl_stabilize
from .core import (MAX_SCAN_DEGREE, SetPartition, canonical_form, from_canonical_form,
                   popcounts, subset_images)
from .groups import PermGroup, is_schurian, weak_automorphism_group
from .unionfind import UnionFind


def lattice_cells(S: SetPartition) -> list[np.ndarray]:
    """Cells with members of size at most d // 2, ordered by (size, least member)."""
    pc = popcounts(S.degree)
    cells = [c for c in S.cells() if pc[c[0]] <= S.degree // 2]
    return sorted(cells, key=lambda c: (int(pc[c[0]]), int(c[0])))


def _act(img: np.ndarray, item) -> tuple[int, ...]:
    if isinstance(item, (int, np.integer)):
        return (int(img[item]),)
    return tuple(sorted(int(img[x]) for x in item))


def orbit_reps(items, G: PermGroup) -> list:
    """One item per G-orbit, the least one (items compared as sorted tuples).

    Items are subsets (bitmasks) or collections of subsets.  Orbits are
    merged with union-find over the images under G's generators.
    """
    items = list(items)
    if not items:
        return []
    ident = np.arange(1 << G.degree)
    keys = [_act(ident, it) for it in items]
    index = {k: i for i, k in enumerate(keys)}
    uf = UnionFind(len(items))
    gens = np.array([g.images for g in G.generators], dtype=np.int64).reshape(-1, G.degree)
    for img in subset_images(gens, G.degree):
        for i, k in enumerate(keys):
            j = index.get(_act(img, k))
            if j is None:
                raise ValueError("items are not closed under the group")
            uf.union(i, j)
    reps = []
    for cls in uf.classes():
        best = min(cls, key=lambda i: keys[i])
        reps.append(items[best])
    return sorted(reps, key=lambda it: _act(ident, it))


def _stabilizer(W: PermGroup, S: SetPartition, cell: np.ndarray) -> PermGroup:
    imgs = subset_images(W.elements, S.degree)
    keep = S.colors[imgs[:, int(cell[0])]] == S.colors[int(cell[0])]
    return PermGroup(S.degree, elements=W.elements[keep])


def _design_like_labelled(S: SetPartition, cells: list[np.ndarray], i: int) -> list[tuple[int, ...]]:
    target = [int(b) for b in cells[i]]
    n = len(target)
    constraints: list[int] = []
    ratios: list[tuple[int, int]] = []  # (e_j, |alpha_j|) per constraint
    for j in range(i):
        cell = cells[j]
        if cell[0] == 0 or popcounts(S.degree)[cell[0]] >= popcounts(S.degree)[target[0]]:
            continue
        inside = [sum(1 for a in cell if (int(a) & ~b) == 0) for b in target]
        if len(set(inside)) != 1:
            raise ValueError("partition is not coherent: containment is not regular")
        if inside[0] == 0:
            continue
        for a in cell:
            constraints.append(int(a))
            ratios.append((inside[0], len(cell)))
    covers = [[k for k, a in enumerate(constraints) if (a & ~b) == 0] for b in target]
    found: list[tuple[int, ...]] = []
    for s in range(1, n // 2 + 1):
        if any(s * e % size for e, size in ratios):
            continue
        lam = [s * e // size for e, size in ratios]
        count = [0] * len(constraints)
        rem = [0] * len(constraints)
        for cov in covers:
            for k in cov:
                rem[k] += 1
        chosen: list[int] = []

        def search(pos: int) -> None:
            if len(chosen) == s:
                if all(c == l for c, l in zip(count, lam)):
                    found.append(tuple(chosen))
                return
            if len(chosen) + n - pos < s:
                return
            cov = covers[pos]
            for k in cov:
                rem[k] -= 1
            # include target[pos]
            if all(count[k] < lam[k] for k in cov):
                for k in cov:
                    count[k] += 1
                chosen.append(target[pos])
                search(pos + 1)
                chosen.pop()
                for k in cov:
                    count[k] -= 1
            # exclude target[pos]
            if all(count[k] + rem[k] >= lam[k] for k in cov):
                search(pos + 1)
            for k in cov:
                rem[k] += 1

        search(0)
    return found


def design_like_subsets(S: SetPartition, i: int, weak_aut: PermGroup | None = None,
                        reduce: bool = True, cells: list[np.ndarray] | None = None
                        ) -> list[tuple[int, ...]]:
    """Design-like parts of the ``i``-th lattice cell, one per weak-automorphism orbit.

    A part ``alpha`` of cell ``alpha_i`` with ``0 < |alpha| <= |alpha_i| / 2``
    is design-like when every subset in an earlier lattice cell lies in the
    same number of members of ``alpha`` as the others of its cell.  Parts
    are sorted tuples of bitmasks.  ``cells`` overrides the lattice order,
    e.g. to include cells above ``d // 2``.
    """
    if cells is None:
        cells = lattice_cells(S)
    found = _design_like_labelled(S, cells, i)
    if not reduce or not found:
        return found
    if weak_aut is None:
        weak_aut = weak_automorphism_group(S)
    return orbit_reps(found, _stabilizer(weak_aut, S, cells[i]))


def _redundant_cells(S: SetPartition, cells: list[np.ndarray], W: PermGroup) -> set[int]:
    """Lattice cells that some weak automorphism maps onto an earlier cell."""
    imgs = subset_images(W.elements, S.degree)
    first_index = {int(S.colors[c[0]]): k for k, c in enumerate(cells)}
    out = set()
    for k, c in enumerate(cells):
        images = {first_index.get(int(col), k) for col in np.unique(S.colors[imgs[:, int(c[0])]])}
        if min(images) < k:
            out.add(k)
    return out


def refinement_children(S: SetPartition, threads: int = 1) -> list[SetPartition]:
    """Stabilized design-like splits of S, one per isomorphism class.

    Every coherent strict refinement of S refines (a relabeling of) one of
    the children.
    """
    if S.degree > MAX_SCAN_DEGREE:
        raise ValueError(f"degree {S.degree} exceeds {MAX_SCAN_DEGREE}")
    cells = lattice_cells(S)
    W = weak_automorphism_group(S)
    skip = _redundant_cells(S, cells, W)
    splits = []
    for i, cell in enumerate(cells):
        if len(cell) < 2 or i in skip:
            continue
        for part in design_like_subsets(S, i, weak_aut=W):
            splits.append(S.with_split(part))
    if threads > 1 and len(splits) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            stable = list(pool.map(wl_stabilize, splits))
    else:
        stable = [wl_stabilize(T) for T in splits]
    children: dict[bytes, SetPartition] = {}
    for T in stable:
        children.setdefault(canonical_form(T), T)
    return [children[k] for k in sorted(children)]


# -- whole-lattice enumeration -------------------------------------------------

def canonical_id(form: bytes) -> str:
    return hashlib.sha1(form).hexdigest()[:12]


@dataclass
class EnumerationState:
    degree: int
    seen: set[bytes] = field(default_factory=set)
    frontier: list[bytes] = field(default_factory=list)
    complete: bool = False
    expanded: int = 0
    elapsed: float = 0.0
    timestamp: float = 0.0
    schurian: dict[bytes, bool] = field(default_factory=dict)

    def results(self) -> list[tuple[SetPartition, bool]]:
        """Every scheme found with its schurian flag, sorted by canonical form."""
        out = []
        for form in sorted(self.seen):
            if form not in self.schurian:
                self.schurian[form] = is_schurian(from_canonical_form(form))
            out.append((from_canonical_form(form), self.schurian[form]))
        return out

    def to_json(self) -> str:
        return json.dumps({
            "degree": self.degree,
            "complete": self.complete,
            "expanded": self.expanded,
            "elapsed": self.elapsed,
            "timestamp": self.timestamp,
            "counts": {"seen": len(self.seen), "frontier": len(self.frontier)},
            "seen": sorted(f.hex() for f in self.seen),
            "frontier": [f.hex() for f in self.frontier],
            "schurian": {f.hex(): v for f, v in sorted(self.schurian.items())},
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EnumerationState":
        doc = json.loads(text)
        return cls(
            degree=doc["degree"],
            seen={bytes.fromhex(h) for h in doc["seen"]},
            frontier=[bytes.fromhex(h) for h in doc["frontier"]],
            complete=doc["complete"],
            expanded=doc["expanded"],
            elapsed=doc["elapsed"],
            timestamp=doc["timestamp"],
            schurian={bytes.fromhex(h): v for h, v in doc.get("schurian", {}).items()},
        )

    def save(self, path) -> None:
        self.timestamp = time.time()
        tmp = f"{path}.tmp"
        with open(tmp, "w") as fh:
            fh.write(self.to_json())
        os.replace(tmp, path)

    def summary_csv(self) -> str:
        from .constructions import table_row

        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["canonical_id", "rank", "aut_order", "schurian", "homogeneous",
                    "vertex_transitive", "fully_coherent"])
        for S, schurian in self.results():
            row = table_row(S)
            w.writerow([canonical_id(canonical_form(S)), row.rank, row.aut_order, int(schurian),
                        int(row.homogeneous), int(row.vertex_transitive), int(row.fully_coherent)])
        return out.getvalue()


LONG_RUN_DEGREE = 7


def _frontier_key(form: bytes) -> tuple[int, bytes]:
    return from_canonical_form(form).rank, form


def enumerate_all(degree: int, max_seconds: float | None = None, checkpoint_path=None,
                  threads: int = 1, long_run: bool = False,
                  checkpoint_interval: float = 60.0) -> EnumerationState:
    """Every set association scheme of the given degree up to relabeling.

    Resumes from ``checkpoint_path`` when that file exists.  When
    ``max_seconds`` runs out the state is saved and returned with
    ``complete`` false.
    """
    if degree > 9:
        raise ValueError("enumeration supports degree <= 9")
    if degree >= LONG_RUN_DEGREE and not long_run:
        raise ValueError(f"degree {degree} needs long_run=True (--long-run on the command line)")
    if checkpoint_path and os.path.exists(checkpoint_path):
        with open(checkpoint_path) as fh:
            state = EnumerationState.from_json(fh.read())
        if state.degree != degree:
            raise ValueError(f"checkpoint is for degree {state.degree}, not {degree}")
    else:
        start = canonical_form(SetPartition.trivial(degree))
        state = EnumerationState(degree, seen={start}, frontier=[start])
    began = time.monotonic()
    base_elapsed = state.elapsed
    last_save = began
    while state.frontier:
        state.frontier.sort(key=_frontier_key)
        form = state.frontier.pop(0)
        for child in refinement_children(from_canonical_form(form), threads=threads):
            key = canonical_form(child)
            if key not in state.seen:
                state.seen.add(key)
                state.frontier.append(key)
        state.expanded += 1
        now = time.monotonic()
        state.elapsed = base_elapsed + now - began
        if checkpoint_path and now - last_save >= checkpoint_interval:
            state.save(checkpoint_path)
            last_save = now
        if max_seconds is not None and now - began >= max_seconds and state.frontier:
            break
    state.complete = not state.frontier
    if checkpoint_path:
        state.save(checkpoint_path)
    return state
