import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.abgroup import (Group, GroupMap, Subgroup, automorphism_count, enumerate_automorphisms,
                              even_odd_split, fixed_subgroup, group_make, two_torsion)
from artifact.classification import two_group_shapes
from artifact.errors import InvalidArgument, ResourceLimit

shapes = st.lists(st.integers(2, 6), min_size=0, max_size=3).map(tuple)


def _brute_automorphisms(g: Group) -> int:
    """Count bijective generator assignments that respect the relations."""
    count = 0
    for images in itertools.product(g.elements, repeat=g.rank):
        if any(g.order_of(h) not in [d for d in range(1, o + 1) if o % d == 0] for h, o in zip(images, g.orders)):
            continue
        seen = set()
        for x in g.elements:
            y = g.zero
            for c, h in zip(x, images):
                y = g.add(y, g.scale(c, h))
            seen.add(y)
        count += len(seen) == g.size
    return count


def test_group_make_examples():
    assert group_make([]).size == 1
    assert group_make([4, 2]).size == 8
    assert group_make([3, 3]).size == 9
    with pytest.raises(InvalidArgument):
        group_make([1, 3])


@given(shapes)
def test_enumeration_is_complete_and_ordered(orders):
    g = Group(orders)
    els = g.elements
    assert len(els) == len(set(els)) == g.size == int(np.prod(orders, dtype=int))
    assert list(els) == sorted(els)
    assert all(g.index(x) == i for i, x in enumerate(els))


@given(shapes, st.data())
def test_addition_axioms(orders, data):
    g = Group(orders)
    pick = st.sampled_from(g.elements)
    x, y, z = data.draw(pick), data.draw(pick), data.draw(pick)
    assert g.add(x, y) == g.add(y, x)
    assert g.add(g.add(x, y), z) == g.add(x, g.add(y, z))
    assert g.add(x, g.neg(x)) == g.zero
    assert g.sub(x, y) == g.add(x, g.neg(y))


def test_two_torsion_examples():
    g = Group((4, 2))
    assert set(two_torsion(g)) == {(0, 0), (2, 0), (0, 1), (2, 1)}
    assert two_torsion(g).shape == (2, 2)
    assert set(two_torsion(Group((3, 3)))) == {(0, 0)}
    assert set(two_torsion(Group((8,)))) == {(0,), (4,)}


def test_even_odd_split_examples():
    e, o = even_odd_split(Group((12,)))
    assert set(e) == {(0,), (3,), (6,), (9,)} and set(o) == {(0,), (4,), (8,)}
    e, o = even_odd_split(Group((2, 2)))
    assert e.size == 4 and o.size == 1
    e, o = even_odd_split(Group((5,)))
    assert e.size == 1 and o.size == 5


@pytest.mark.parametrize("orders", [(2, 2), (4,), (2, 4), (3, 3), (6,), (2, 6), (4, 4), (2, 2, 2), (12,)])
def test_split_parts_are_characteristic(orders):
    g = Group(orders)
    e, o = even_odd_split(g)
    assert e.size * o.size == g.size
    assert set(e) & set(o) == {g.zero}
    for a in enumerate_automorphisms(g):
        assert {a(x) for x in e} == set(e)
        assert {a(x) for x in o} == set(o)


@pytest.mark.parametrize("orders", [(), (2,), (3,), (4,), (2, 2), (2, 4), (3, 3), (2, 2, 2), (6,), (2, 6)])
def test_automorphism_count_matches_brute_force(orders):
    g = Group(orders)
    autos = enumerate_automorphisms(g)
    assert len(autos) == automorphism_count(g) == _brute_automorphisms(g)
    assert all(a.is_bijective() for a in autos)


def test_automorphism_examples():
    assert len(enumerate_automorphisms(Group((2, 2)))) == 6
    inv = enumerate_automorphisms(Group((4,)), 2)
    assert len(inv) == 1 and inv[0].images == ((3,),)
    assert len(enumerate_automorphisms(Group(()))) == 1
    assert automorphism_count(Group((2, 2, 2, 2))) == 20160


def test_automorphism_bound():
    with pytest.raises(ResourceLimit):
        enumerate_automorphisms(Group((2,) * 7))


def test_fixed_subgroup_examples():
    z4 = Group((4,))
    assert set(fixed_subgroup(z4, GroupMap.scalar(z4, -1))) == {(0,), (2,)}
    z3 = Group((3,))
    assert set(fixed_subgroup(z3, GroupMap.scalar(z3, -1))) == {(0,)}
    v = Group((2, 2))
    swap = GroupMap.from_matrix(v, [[0, 1], [1, 0]])
    assert set(fixed_subgroup(v, swap)) == {(0, 0), (1, 1)}
    with pytest.raises(InvalidArgument):
        fixed_subgroup(v, GroupMap.scalar(z4, 1))


def test_groupmap_rejects_ill_defined_images():
    with pytest.raises(InvalidArgument):
        GroupMap(Group((2,)), Group((4,)), ((1,),))


@pytest.mark.parametrize("orders", [s for s in two_group_shapes(16)])
def test_involution_norm_map_lands_in_fixed_points(orders):
    """x + theta(x) is fixed, and |G_2| / |G^theta cap G_2| <= 4."""
    g = Group(orders)
    if automorphism_count(g) > 25000:
        pytest.skip("too many automorphisms to enumerate")
    g2 = set(two_torsion(g))
    for t in [GroupMap.identity(g)] + enumerate_automorphisms(g, 2):
        fixed = set(fixed_subgroup(g, t))
        assert all(g.add(x, t(x)) in fixed for x in g.elements)
        assert len(g2) <= 4 * len(fixed & g2)


def test_subgroup_as_group():
    g = Group((4, 2))
    sub = Subgroup.generated_by(g, [(2, 0), (0, 1)])
    h, emb = sub.as_group()
    assert h.orders == (2, 2)
    assert {emb(x) for x in h.elements} == set(sub)
