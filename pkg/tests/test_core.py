import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from setschemes.core import (DuplicateSubsetError, ElementOutOfRangeError, MalformedSchemeError,
                             NotAPartitionError, SetPartition, canonical_cells, canonical_form,
                             canonical_labeling, complement, elements, from_canonical_form,
                             is_triangle, parse_partition, serialize_partition, subset,
                             triple_invariant)
from setschemes.groups import PermGroup, Permutation, orbital_scheme


def masks(d):
    return st.integers(0, (1 << d) - 1)


@st.composite
def triples(draw, max_degree=6):
    d = draw(st.integers(1, max_degree))
    return d, draw(masks(d)), draw(masks(d)), draw(masks(d))


@st.composite
def partitions(draw, max_degree=4):
    d = draw(st.integers(1, max_degree))
    colors = draw(st.lists(st.integers(0, 5), min_size=1 << d, max_size=1 << d))
    return SetPartition(d, colors)


def test_subset_round_trip():
    assert subset([1, 3]) == 0b101
    assert elements(0b101) == (1, 3)
    assert elements(0) == ()
    assert complement(0b101, 4) == 0b1010


@pytest.mark.parametrize("a,b,c,expected", [
    ((), (), (), (0, 0, 0, 0, 0, 0, 0)),
    ((1,), (1,), (1,), (1, 1, 1, 1, 1, 1, 1)),
    ((1, 2), (2, 3), (1, 3), (2, 2, 2, 1, 1, 1, 0)),
])
def test_triple_invariant_examples(a, b, c, expected):
    assert tuple(triple_invariant(subset(a), subset(b), subset(c))) == expected


@pytest.mark.parametrize("a,b,c,expected", [
    ((1,), (1,), (), True),
    ((1,), (2,), (), False),
    ((1, 2), (2, 3), (1, 3), True),
])
def test_is_triangle_examples(a, b, c, expected):
    assert is_triangle(subset(a), subset(b), subset(c)) is expected


@given(triples())
def test_triple_invariant_matches_set_oracle(t):
    d, a, b, c = t
    sets = oracles.subsets(d)
    assert tuple(triple_invariant(a, b, c)) == oracles.triple_type(sets[a], sets[b], sets[c])
    assert is_triangle(a, b, c) == oracles.triangle(sets[a], sets[b], sets[c])


@given(triples(), st.randoms(use_true_random=False))
def test_triple_invariant_is_relabeling_invariant(t, rng):
    d, a, b, c = t
    perm = list(range(d))
    rng.shuffle(perm)

    def move(x):
        return sum(1 << perm[i] for i in range(d) if x >> i & 1)

    assert triple_invariant(a, b, c) == triple_invariant(move(a), move(b), move(c))


@given(triples())
def test_is_triangle_symmetric_in_arguments(t):
    _, a, b, c = t
    assert len({is_triangle(*p) for p in itertools.permutations((a, b, c))}) == 1


@given(triples())
def test_triangle_unions_and_size_identity(t):
    _, a, b, c = t
    if is_triangle(a, b, c):
        assert a | b == b | c == a | c
        tau = triple_invariant(a, b, c)
        assert tau.a + tau.b + tau.c == 2 * bin(a | b | c).count("1") + tau.abc


def test_triple_type_bounds():
    for a, b, c in itertools.product(range(8), repeat=3):
        t = triple_invariant(a, b, c)
        assert t.ab <= min(t.a, t.b) and t.ac <= min(t.a, t.c) and t.bc <= min(t.b, t.c)
        assert t.abc <= min(t.ab, t.ac, t.bc)


def test_partition_normalizes_colors():
    S = SetPartition(2, [7, 3, 3, 9])
    assert S.colors.tolist() == [0, 1, 1, 2]
    assert S.rank == 3
    assert S == SetPartition.trivial(2)
    assert S.is_size_homogeneous() and S.is_homogeneous()


def test_trivial_and_discrete():
    assert SetPartition.trivial(4).rank == 5
    assert SetPartition.discrete(3).rank == 8
    assert SetPartition.discrete(3) <= SetPartition.trivial(3)
    assert not SetPartition.trivial(3) <= SetPartition.discrete(3)


@given(partitions())
def test_every_color_occurs(S):
    assert sorted(set(S.colors.tolist())) == list(range(S.rank))


@given(partitions())
def test_size_homogeneous_flag_matches_definition(S):
    sizes = {}
    for a, c in enumerate(S.colors.tolist()):
        sizes.setdefault(c, set()).add(bin(a).count("1"))
    assert S.is_size_homogeneous() == all(len(v) == 1 for v in sizes.values())


# -- canonical forms -------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(partitions(), st.randoms(use_true_random=False))
def test_canonical_form_is_relabeling_invariant(S, rng):
    perm = list(range(S.degree))
    rng.shuffle(perm)
    assert canonical_form(S) == canonical_form(S.permute(perm))


@settings(max_examples=25, deadline=None)
@given(partitions(max_degree=3))
def test_canonical_form_matches_oracle(S):
    # the first-occurrence-renumbered least relabeling is the canonical array
    form = canonical_form(S)
    assert list(np.frombuffer(form[1:], dtype="<u2")) == list(oracles.relabel_class(S.colors.tolist(), S.degree))


@given(partitions())
def test_canonical_labeling_attains_form(S):
    form, g = canonical_labeling(S)
    assert S.permute(g) == from_canonical_form(form)


def test_trivial_canonical_form_is_fixed():
    T = SetPartition.trivial(3)
    assert from_canonical_form(canonical_form(T)) == T


def test_conjugate_orbital_schemes_share_canonical_form():
    A = orbital_scheme(PermGroup(3, [Permutation.from_cycles("(1,2)", 3)]))
    B = orbital_scheme(PermGroup(3, [Permutation.from_cycles("(2,3)", 3)]))
    assert A != B
    assert canonical_form(A) == canonical_form(B)


# -- file format -------------------------------------------------------------------

def test_serialize_round_trip_is_canonical():
    text = '{"degree": 2, "cells": [[[1,2]], [[2],[1]], [[]]]}'
    S = parse_partition(text)
    assert S == SetPartition.trivial(2)
    out = serialize_partition(S)
    assert json.loads(out) == {"degree": 2, "cells": [[[]], [[1], [2]], [[1, 2]]]}
    assert serialize_partition(parse_partition(out)) == out


@given(partitions())
def test_serialize_parse_identity(S):
    assert parse_partition(serialize_partition(S)) == S


def test_canonical_cells_order():
    S = SetPartition(2, [0, 1, 2, 3])
    assert canonical_cells(S) == [[0], [1], [2], [3]]


@pytest.mark.parametrize("text,error", [
    ('{"degree": 2, "cells": [[[]], [[1], [2]]]}', NotAPartitionError),
    ('{"degree": 2, "cells": [[[]], [[0]], [[1], [2]], [[1, 2]]]}', ElementOutOfRangeError),
    ('{"degree": 2, "cells": [[[]], [[3]], [[1], [2]], [[1, 2]]]}', ElementOutOfRangeError),
    ('{"degree": 2, "cells": [[[]], [[1]], [[1], [2]], [[1, 2]]]}', DuplicateSubsetError),
    ('{"degree": 2, "cells": [[[]], [[2, 1]], [[1], [2]]]}', MalformedSchemeError),
    ('{"degree": 2}', MalformedSchemeError),
    ('{degree: 2}', MalformedSchemeError),
    ('{"degree": -1, "cells": []}', MalformedSchemeError),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_partition(text)


def test_missing_subset_message():
    with pytest.raises(NotAPartitionError, match="not a partition"):
        parse_partition('{"degree": 2, "cells": [[[]], [[1], [2]]]}')
    with pytest.raises(ElementOutOfRangeError, match="element out of range"):
        parse_partition('{"degree": 2, "cells": [[[]], [[0]]]}')
