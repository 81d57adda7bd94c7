import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from setschemes.coherence import (CoherenceWitness, StructureConstantTable, complement_closed,
                                  containment_biregular, is_coherent, is_fully_coherent,
                                  structure_constants, wl_stabilize, wl_step)
from setschemes.core import SetPartition, subset, triple_invariant
from setschemes.groups import (named_group, orbital_scheme, subgroups_up_to_conjugacy,
                               subset_orbit_labels, automorphism_group)

# d = 3: {} | {1} | {2},{3} | all 2-sets | {1,2,3}
RANK5 = SetPartition.from_cells(3, [[0], [1], [2, 4], [3, 5, 6], [7]])
SYM23 = SetPartition.from_cells(3, [[0], [1], [2, 4], [3, 5], [6], [7]])


def random_partition(d, seed, max_colors=4):
    rng = np.random.default_rng(seed)
    return SetPartition(d, rng.integers(0, max_colors, size=1 << d))


def coarsen(S, rng):
    """Merge random pairs of same-size cells."""
    colors = S.colors.astype(np.int64).copy()
    sizes = S.cell_member_sizes()
    for _ in range(rng.integers(1, 4)):
        a, b = rng.integers(0, S.rank, size=2)
        if sizes[a] == sizes[b]:
            colors[colors == b] = a
    return SetPartition(S.degree, colors)


# -- examples -------------------------------------------------------------------------

@pytest.mark.parametrize("mode", ["triangle", "all"])
def test_orbital_schemes_are_stable(mode):
    for d in range(1, 5):
        for G in subgroups_up_to_conjugacy(d):
            S = orbital_scheme(G)
            assert wl_step(S, mode) == (S, True)


def test_rank5_partition_splits_to_sym23(record):
    T, stable = wl_step(RANK5)
    assert not stable and T == SYM23 and T.rank == 6
    assert record(wl_stabilize(RANK5)) == SYM23


def test_discrete_is_stable():
    assert wl_step(SetPartition.discrete(3))[1]


def test_trivial_is_its_own_stabilization(record):
    assert record(wl_stabilize(SetPartition.trivial(5))) == SetPartition.trivial(5)


def test_trivial_degree_two_structure_constant():
    # ordered pairs ({1},{2}) and ({2},{1}) both have this type: brute force gives 2
    T = SetPartition.trivial(2)
    table = structure_constants(T, "all")
    tau = triple_invariant(subset([1, 2]), subset([1]), subset([2]))
    alpha, beta = T.cell_of(3), T.cell_of(1)
    assert table[(alpha, beta, beta, tau)] == 2
    counts = oracles.fingerprint(T.colors.tolist(), 2, 3, triangles_only=False)
    assert counts[(beta, beta, tuple(tau))] == 2


def test_rank5_witness():
    w = structure_constants(RANK5)
    assert isinstance(w, CoherenceWitness)
    assert (w.a, w.a_prime) == (subset([1, 2]), subset([2, 3]))
    assert (w.beta, w.gamma) == (RANK5.cell_of(1), RANK5.cell_of(2))
    assert w.counts == (1, 0)
    assert tuple(w.tau) == (2, 1, 1, 1, 1, 0, 0)


def test_orbital_g1_table():
    S = orbital_scheme(named_group("G1"))
    assert isinstance(structure_constants(S), StructureConstantTable)


def test_structure_table_invariants():
    for S in (SetPartition.trivial(3), SYM23, orbital_scheme(subgroups_up_to_conjugacy(5)[7])):
        table = structure_constants(S, "all")
        sizes = [len(c) for c in S.cells()]
        totals = np.zeros(S.rank, dtype=np.int64)
        for (al, be, ga, _), p in table.entries.items():
            assert 0 < p <= sizes[be] * sizes[ga]
            totals[al] += p
        assert np.all(totals == 4 ** S.degree)


def test_structure_table_matches_oracle():
    S = SYM23
    for mode, tri in (("triangle", True), ("all", False)):
        table = structure_constants(S, mode)
        for alpha, cell in enumerate(S.cells()):
            ref = oracles.fingerprint(S.colors.tolist(), 3, int(cell[0]), triangles_only=tri)
            ours = {(b, g, tuple(t)): p for (al, b, g, t), p in table.entries.items() if al == alpha}
            assert ours == dict(ref)


def test_structure_table_csv():
    text = structure_constants(SetPartition.trivial(1)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "alpha,beta,gamma,tau1,tau2,tau3,tau4,tau5,tau6,tau7,p"
    assert len(lines) > 1


def test_mode_is_validated():
    with pytest.raises(ValueError):
        wl_step(SetPartition.trivial(2), "pairs")


def test_size_split_first():
    S = SetPartition(2, [0, 0, 0, 0])
    T, stable = wl_step(S)
    assert not stable and T == SetPartition.trivial(2)
    assert not is_coherent(S)


# -- oracles -----------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10 ** 6))
def test_coherence_matches_oracle(d, seed):
    S = random_partition(d, seed).split_by_size()
    for mode, tri in (("triangle", True), ("all", False)):
        assert is_coherent(S, mode) == oracles.is_coherent(S.colors.tolist(), d, tri)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10 ** 6))
def test_wl_step_matches_oracle_refinement(d, seed):
    S = random_partition(d, seed).split_by_size()
    keys = [(int(S.colors[a]), tuple(sorted(oracles.fingerprint(S.colors.tolist(), d, a).items())))
            for a in range(1 << d)]
    ids = {}
    ref = SetPartition(d, [ids.setdefault(k, len(ids)) for k in keys])
    assert wl_step(S)[0] == ref


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10 ** 6))
def test_stabilization_is_coherent_and_matches_oracle(d, seed):
    T = wl_stabilize(random_partition(d, seed))
    assert is_coherent(T)
    if d <= 3:
        assert oracles.is_coherent(T.colors.tolist(), d)


# -- refinement properties on coarsened orbital schemes -------------------------------

@st.composite
def coarsened_orbital(draw):
    d = draw(st.integers(2, 5))
    groups = subgroups_up_to_conjugacy(d)
    G = groups[draw(st.integers(0, len(groups) - 1))]
    rng = np.random.default_rng(draw(st.integers(0, 10 ** 6)))
    return G, coarsen(orbital_scheme(G), rng)


@settings(max_examples=40, deadline=None)
@given(coarsened_orbital())
def test_wl_monotone_idempotent_and_above_coherent_refinements(case):
    G, S = case
    step, _ = wl_step(S)
    assert step <= S and step.rank >= S.rank
    T = wl_stabilize(S)
    assert T <= S
    assert wl_stabilize(T) == T
    assert orbital_scheme(G) <= T


def test_upper_bound_over_all_subgroups():
    for d in (3, 4):
        orbitals = [orbital_scheme(G) for G in subgroups_up_to_conjugacy(d)]
        rng = np.random.default_rng(d)
        for S0 in orbitals:
            S = coarsen(S0, rng)
            T = wl_stabilize(S)
            for O in orbitals:
                for perm in itertools.permutations(range(d)):
                    Op = O.permute(perm)
                    if Op <= S:
                        assert Op <= T


@pytest.mark.parametrize("mode", ["triangle", "all"])
def test_orbit_representatives_give_identical_refinement(mode):
    for S in (coarsen(orbital_scheme(named_group("H3")), np.random.default_rng(1)),
              coarsen(orbital_scheme(named_group("G4")), np.random.default_rng(2)), RANK5):
        labels = subset_orbit_labels(automorphism_group(S))
        assert wl_step(S, mode, orbit_labels=labels) == wl_step(S, mode)
        assert wl_stabilize(S, mode, use_aut=True) == wl_stabilize(S, mode)


@pytest.mark.parametrize("threads", [2, 3])
def test_thread_count_does_not_change_results(threads):
    S = coarsen(orbital_scheme(named_group("G1")), np.random.default_rng(5))
    assert wl_stabilize(S, threads=threads).colors.tobytes() == wl_stabilize(S).colors.tobytes()
    assert wl_step(S, "all", threads=threads) == wl_step(S, "all")


# -- consequences of coherence -----------------------------------------------------------

def test_complement_and_containment_checks_detect_failures():
    assert complement_closed(SYM23) and containment_biregular(SYM23)
    # {1} alone but {2,3} merged with {1,2}: complements do not form a cell
    assert not complement_closed(RANK5.with_split([6]).with_split([2]))
    assert not containment_biregular(RANK5)


def test_full_coherence_examples():
    assert is_fully_coherent(orbital_scheme(named_group("H4")))
    assert not is_fully_coherent(RANK5)
