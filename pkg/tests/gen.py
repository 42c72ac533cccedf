"""Seeded random objects for property tests."""

import random

from twistlab.complexes import (ChainMap, cone, direct_sum, hom_complex, minimize, projective,
                                shift)


def random_class(x, y, m, rng, allow_zero=False):
    """A random closed degree-m map x -> y, written as x[-m] -> y of degree 0.

    Drawn from the homology basis so that a non-zero class is returned
    whenever H^m is non-zero and ``allow_zero`` is false.
    """
    h = hom_complex(x, y)
    F = x.algebra.field
    basis = h.homology_basis(m)
    vec = [F.zero] * len(h.basis(m))
    if basis:
        cs = [F(rng.randrange(-5, 6)) for _ in basis]
        if not allow_zero and not any(cs):
            cs[rng.randrange(len(cs))] = F.one
        for c, v in zip(cs, basis):
            vec = [a + c * b for a, b in zip(vec, v)]
    return ChainMap(shift(x, -m), y, 0, h.vector_to_matrix(m, vec))


def _grow(p, g, rng, p_cone):
    """Cone a random class p[-m] -> g that keeps every summand, else add p."""
    h = hom_complex(p, g)
    degrees = [m for m in h.degree_range if h.homology_dim(m)]
    rng.shuffle(degrees)
    if rng.random() < p_cone:
        for m in degrees:
            c = minimize(cone(random_class(p, g, m, rng)))
            if len(c.summands) == len(g.summands) + 1:
                return c
    return direct_sum([g, p])


def random_member(alg, v, rng, length, spread=2):
    """An object of <P_v> built from ``length`` shifted copies of P_v by cones."""
    e = projective(alg, v)
    g = shift(e, rng.randint(-spread, spread))
    for _ in range(length - 1):
        g = _grow(shift(e, rng.randint(-spread, spread)), g, rng, 0.8)
    return g


def random_object(alg, rng, size=3, spread=2):
    """A random object built from projectives at arbitrary vertices."""
    verts = list(alg.vertices)
    g = projective(alg, rng.choice(verts), rng.randint(-spread, spread))
    for _ in range(size - 1):
        g = _grow(projective(alg, rng.choice(verts), rng.randint(-spread, spread)), g, rng, 0.75)
    return g


def rng_for(*key):
    return random.Random(repr(key))
