import random
from collections import Counter

import pytest
import sympy
from hypothesis import given, strategies as st

from gen import random_member, random_object
from twistlab.algebra import GraphSpec, build_zigzag, path_graph
from twistlab.analysis import is_orthogonal
from twistlab.complexes import (ChainMap, ComplexError, cone, direct_sum, ext_table, is_isomorphic,
                                mat_mul, minimize, projective, shift, zero_complex)
from twistlab.decompose import (endomorphism_algebra, find_idempotent, recover_collection,
                                scramble, split_by_idempotent, split_summands)
from twistlab.linalg import QQ, FieldSpec
from twistlab.twists import twist

GF = FieldSpec.prime(32003)


def P(alg, v, s=0):
    return projective(alg, v, s)


def has_nontrivial_idempotent(a):
    """Solve e^2 = e over Q on the structure constants (exhaustive)."""
    n = a.dimension
    c = sympy.symbols(f"c0:{n}")
    eqs = []
    for k in range(n):
        s = sum(c[i] * c[j] * sympy.Rational(str(a.constants[i][j][k]))
                for i in range(n) for j in range(n) if a.constants[i][j][k])
        eqs.append(sympy.expand(s - c[k]))
    trivial = [tuple(0 for _ in c), tuple(1 if i == 0 else 0 for i in range(n))]
    for sol in sympy.solve(eqs, c, dict=True):
        full = tuple(sympy.simplify(sol.get(x, x)) for x in c)
        if full not in [tuple(sympy.Integer(v) for v in t) for t in trivial]:
            return True
    return False


def is_idempotent(x, e):
    return mat_mul(x.algebra, e, e) == e


def collection_key(res):
    """Members up to shift, with multiplicities, as a sorted tuple."""
    out = []
    for obj, mult in zip(res.collection.objects, res.multiplicities):
        base = min(s for _, s in obj.summands)
        out.append((tuple(sorted((v, s - base) for v, s in obj.summands)), mult))
    return tuple(sorted(out))


def string_object(alg):
    return cone(ChainMap(P(alg, "1", -2), P(alg, "1"), 0, {(0, 0): alg.element(l1=1)}))


# endomorphism algebras

def test_end_examples(a3):
    assert endomorphism_algebra(P(a3, "1")).dimension == 1
    assert endomorphism_algebra(direct_sum([P(a3, "1"), P(a3, "1")])).dimension == 4
    a = endomorphism_algebra(direct_sum([P(a3, "1"), P(a3, "3")]))
    assert a.dimension == 2
    # product of scalars: both non-identity basis products are idempotent-like
    assert a.constants[0][0] == (1, 0)


def test_end_identity_first_and_closed(a3):
    x = random_object(a3, random.Random(5), 3)
    a = endomorphism_algebra(x)
    ident = a.basis[0]
    for b in a.basis:
        assert mat_mul(a3, ident, b) == b
    assert all(len(row) == a.dimension for row in a.constants)


@given(seed=st.integers(0, 10_000))
def test_end_dimension_is_degree_zero_homology(a3, seed):
    x = random_object(a3, random.Random(seed), 3)
    assert endomorphism_algebra(x).dimension == ext_table(x, x).get(0, 0)


# idempotents

def test_find_idempotent_examples(a3):
    x = direct_sum([P(a3, "1"), P(a3, "3")])
    e = find_idempotent(endomorphism_algebra(x))
    assert e is not None and is_idempotent(minimize(x), e)
    diag = sorted(a3.basis[b].name for (j, k), el in e.items() if j == k for b in el)
    assert diag in (["e1"], ["e3"])
    assert find_idempotent(endomorphism_algebra(P(a3, "1"))) is None
    x = direct_sum([P(a3, "1"), P(a3, "1")])
    e = find_idempotent(endomorphism_algebra(x))
    assert e is not None and is_idempotent(x, e) and e != {}


def test_local_algebras_have_no_idempotent(a2):
    for x in (twist(P(a2, "1"), P(a2, "2")), string_object(a2)):
        a = endomorphism_algebra(x)
        assert find_idempotent(a) is None
        if a.dimension <= 6:
            assert not has_nontrivial_idempotent(a)


def exhaustive_cases():
    a3 = build_zigzag(path_graph(3))
    cases = []
    for seed in range(40):
        rng = random.Random(seed)
        x = random_object(a3, rng, rng.randint(1, 4))
        a = endomorphism_algebra(x)
        if a.dimension <= 6:
            cases.append((seed, a))
    a2 = build_zigzag(path_graph(2))
    for x in (string_object(a2), twist(P(a2, "1"), P(a2, "2")),
              direct_sum([P(a2, "1"), P(a2, "1", 2)]), direct_sum([string_object(a2), P(a2, "2")])):
        cases.append(("fixed", endomorphism_algebra(x)))
    return cases


@pytest.mark.parametrize("seed,alg", exhaustive_cases(), ids=lambda v: str(v) if not hasattr(v, "basis") else "")
def test_find_idempotent_matches_exhaustive_search(seed, alg):
    assert (find_idempotent(alg) is not None) == has_nontrivial_idempotent(alg)


# splitting

def test_split_by_idempotent_pieces(a3):
    x = direct_sum([P(a3, "1"), P(a3, "3")])
    e = find_idempotent(endomorphism_algebra(x))
    a, b = split_by_idempotent(minimize(x), e)
    assert Counter(a.summands + b.summands) == Counter([("1", 0), ("3", 0)])


def test_split_examples(a2, a3):
    m = scramble(direct_sum([P(a3, "1"), P(a3, "1"), P(a3, "3")]), seed=1)
    rep = split_summands(m)
    assert rep.verified and rep.complete
    assert sorted((p.summands, mult) for p, mult, _ in rep.pieces) == [((("1", 0),), 2), ((("3", 0),), 1)]
    rep = split_summands(twist(P(a2, "1"), P(a2, "2")))
    assert len(rep.pieces) == 1 and rep.pieces[0][1] == 1 and rep.verified
    rep = split_summands(zero_complex(a3))
    assert rep.pieces == [] and rep.verified


def test_split_orders_by_rank(a2):
    m = direct_sum([twist(P(a2, "1"), P(a2, "2")), P(a2, "1", 3)])
    rep = split_summands(scramble(m, seed=4))
    assert [len(p.summands) for p, _, _ in rep.pieces] == [1, 2]


def test_split_budget_reports_partial(a3):
    m = direct_sum([P(a3, "1"), P(a3, "2"), P(a3, "3"), P(a3, "1", 1)])
    rep = split_summands(m, budget=2)
    assert not rep.complete and rep.all_pieces


@given(seed=st.integers(0, 10_000))
def test_split_soundness(seed):
    alg = build_zigzag(path_graph(3))
    rng = random.Random(seed)
    parts = [random_object(alg, rng, rng.randint(1, 2)) for _ in range(rng.randint(1, 3))]
    m = scramble(direct_sum(parts, alg), seed)
    rep = split_summands(m, seed=seed)
    assert rep.verified
    assert is_isomorphic(direct_sum(rep.all_pieces, alg), m).isomorphic
    for p in rep.all_pieces:
        assert find_idempotent(endomorphism_algebra(p), seed=seed) is None


def test_scramble_is_isomorphic_but_not_equal(a3):
    x = direct_sum([P(a3, "1"), P(a3, "1"), P(a3, "3")])
    for seed in range(5):
        y = scramble(x, seed)
        y.check()
        assert y.differential and len(y.summands) == 5
        assert is_isomorphic(x, y).isomorphic


# recovery

def test_recover_examples(a3):
    r = recover_collection(direct_sum([P(a3, "1"), P(a3, "3"), P(a3, "3")]))
    assert r.ok and r.strongly_spherical
    assert sorted(zip([o.summands for o in r.collection.objects], r.multiplicities)) == \
        [((("1", 0),), 1), ((("3", 0),), 2)]
    r = recover_collection(direct_sum([P(a3, "1"), P(a3, "2")]))
    assert not r.ok and r.diagnostic == "orthogonality violation"
    assert r.violation == ("S1", "S2", 1)
    iso_alg = build_zigzag(GraphSpec(("1",), ()), QQ, 2)
    r = recover_collection(P(iso_alg, "1"))
    assert not r.ok and r.diagnostic.startswith("piece not spherical")


def test_recover_merges_shifts(a3):
    r = recover_collection(direct_sum([P(a3, "1"), P(a3, "1", 2), P(a3, "3", -1)]))
    assert r.ok and sorted(r.multiplicities) == [1, 2]


@pytest.mark.parametrize("field", [QQ, GF], ids=str)
def test_recovery_unique_across_seeds(field):
    alg = build_zigzag(path_graph(3), field, 2)
    m = direct_sum([P(alg, "1"), P(alg, "1"), P(alg, "3")])
    keys = set()
    for seed in range(10):
        r = recover_collection(scramble(m, seed), seed=seed)
        assert r.ok and r.strongly_spherical
        assert all(v == "COMMUTE_ORTHOGONAL" for _, _, v in r.pairwise)
        for i, a in enumerate(r.collection.objects):
            for b in r.collection.objects[i + 1:]:
                assert is_orthogonal(a, b)
        keys.add(collection_key(r))
    assert keys == {(((("1", 0),), 2), ((("3", 0),), 1))}


def test_recovery_unique_for_twisted_members():
    alg = build_zigzag(path_graph(4))
    e = twist(P(alg, "2"), P(alg, "1"))  # spherical, orthogonal to P4
    m = direct_sum([e, shift(e, 2), P(alg, "4")])
    keys = set()
    for seed in range(10):
        r = recover_collection(scramble(m, seed), seed=seed)
        assert r.ok
        keys.add(collection_key(r))
    assert len(keys) == 1
