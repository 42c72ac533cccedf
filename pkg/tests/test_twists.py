import itertools
import random

import pytest
from hypothesis import given, strategies as st

from gen import random_object
from twistlab.algebra import build_zigzag, path_graph
from twistlab.complexes import (ChainMap, cone, direct_sum, ext_table, is_isomorphic, minimize,
                                projective, shift)
from twistlab.ktheory import LatticeModel, class_of, euler_pairing
from twistlab.twists import (SphericalCollection, StrictModeError, composite_twist,
                             evaluation_map, inverse_twist, twist)

seeds = st.integers(0, 10_000)


def iso(x, y):
    return is_isomorphic(x, y).isomorphic


# examples

def test_evaluation_orthogonal(p3):
    ev = evaluation_map(p3["1"], p3["3"])
    assert ev.source.is_zero and ev.is_zero


def test_evaluation_self(a2):
    p1 = projective(a2, "1")
    ev = evaluation_map(p1, p1)
    assert sorted(ev.source.summands) == [("1", -2), ("1", 0)]
    assert ev.is_closed
    names = sorted(a2.basis[b].name for el in ev.matrix.values() for b in el)
    assert names == ["e1", "l1"]


def test_evaluation_adjacent(a2):
    ev = evaluation_map(projective(a2, "1"), projective(a2, "2"))
    assert list(ev.source.summands) == [("1", -1)]
    ((_, el),) = ev.matrix.items()
    assert [a2.basis[b].name for b in el] == ["a12"]


def test_twist_examples(a2, p3):
    assert twist(p3["1"], p3["3"]) == p3["3"]
    p1, p2 = projective(a2, "1"), projective(a2, "2")
    assert iso(twist(p1, p1), shift(p1, -1))
    t = twist(p1, p2)
    arrow = cone(ChainMap(projective(a2, "1", -1), p2, 0, {(0, 0): a2.element(a12=1)}))
    assert len(t.summands) == 2 and iso(t, arrow)


def test_inverse_twist_examples(a2, p3):
    assert iso(inverse_twist(p3["1"], p3["3"]), p3["3"])
    p1, p2 = projective(a2, "1"), projective(a2, "2")
    assert iso(inverse_twist(p1, twist(p1, p2)), p2)
    assert iso(inverse_twist(p1, shift(p1, -1)), p1)


def test_composite_examples(a3, p3):
    g = p3["2"]
    a = composite_twist(SphericalCollection([p3["1"], p3["3"]], 2), g)
    b = composite_twist(SphericalCollection([p3["3"], p3["1"]], 2), g)
    assert iso(a, b)
    x = random_object(a3, random.Random(3))
    assert composite_twist(SphericalCollection([p3["1"]], 2), x) == twist(p3["1"], x)


def test_strict_mode_rejects_adjacent(p3):
    with pytest.raises(StrictModeError) as info:
        composite_twist(SphericalCollection([p3["1"], p3["2"]], 2), p3["3"])
    assert info.value.violations[0] == ("1", "2", 1)
    assert "(1,2)" in str(info.value) and "shift 1" in str(info.value)
    # non-strict mode still computes
    composite_twist(SphericalCollection([p3["1"], p3["2"]], 2), p3["3"], strict=False)


# properties

@pytest.mark.parametrize("n,d", [(2, 2), (3, 2), (2, 3), (3, 4)])
def test_sphere_shift(n, d):
    alg = build_zigzag(path_graph(n, d=d, forward_degree=1), d=d)
    for v in alg.vertices:
        e = projective(alg, v)
        assert iso(twist(e, e), shift(e, 1 - d))


@given(seed=seeds)
def test_orthogonal_fixed_points(a3, seed):
    rng = random.Random(seed)
    g = random_object(a3, rng)
    e = projective(a3, rng.choice("13"))
    if not ext_table(e, g):
        assert iso(twist(e, g), g)


@given(seed=seeds)
def test_equivalence_witness(a3, seed):
    rng = random.Random(seed)
    g = random_object(a3, rng)
    e = projective(a3, rng.choice("123"))
    assert iso(inverse_twist(e, twist(e, g)), g)
    assert iso(twist(e, inverse_twist(e, g)), g)


@given(seed=seeds)
def test_k_consistency(a3, seed):
    rng = random.Random(seed)
    g = random_object(a3, rng)
    e = projective(a3, rng.choice("123"))
    m = LatticeModel.of_algebra(a3)
    ce, cg = class_of(e, m), class_of(g, m)
    expect = tuple(b - euler_pairing(m, ce, cg) * a for a, b in zip(ce, cg))
    assert class_of(twist(e, g), m) == expect


def test_commutation_iff_orthogonal_or_equal(a3, p3):
    gens = list(p3.values())
    for a, b in itertools.product("123", repeat=2):
        e, f = p3[a], p3[b]
        commute = all(iso(twist(e, twist(f, g)), twist(f, twist(e, g))) for g in gens)
        assert commute == (not ext_table(e, f) or a == b)


def test_braid_relation_sanity(a3, p3):
    e, f = p3["1"], p3["2"]
    for g in p3.values():
        assert iso(twist(e, twist(f, twist(e, g))), twist(f, twist(e, twist(f, g))))
