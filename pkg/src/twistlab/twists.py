"""Spherical twists, object by object.

``twist(e, g)`` is the cone of the evaluation map ``Hom*(e, g) (x) e -> g``,
so it fixes ``e``-orthogonal objects and sends a d-spherical ``e`` to
``e[1-d]``.  ``inverse_twist`` is the shifted cone of the coevaluation
``g -> Hom*(g, e)^* (x) e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .complexes import (
    ChainMap,
    ComplexError,
    TwistedComplex,
    cone,
    direct_sum,
    hom_complex,
    minimize,
    shift,
)


class StrictModeError(ComplexError):
    """composite_twist was asked to run on a collection that is not strongly spherical."""

    def __init__(self, violations):
        self.violations = violations
        i, j, k = violations[0]
        super().__init__(f"collection is not strongly spherical: pair ({i},{j}) at shift {k}")


@dataclass
class SphericalCollection:
    objects: list
    cy_dimension: int
    names: list = field(default_factory=list)

    def __post_init__(self):
        if not self.names:
            self.names = [str(i + 1) for i in range(len(self.objects))]

    def __len__(self):
        return len(self.objects)

    def __iter__(self):
        return iter(self.objects)


def _blockwise(parts, summand_offsets, into_rows: bool):
    out = {}
    for off, mat in zip(summand_offsets, parts):
        for (j, k), e in mat.items():
            out[(j + off, k) if into_rows else (j, k + off)] = e
    return out


def evaluation_map(e: TwistedComplex, g: TwistedComplex) -> ChainMap:
    """Closed degree-0 map from the sum of ``e[-m]`` over a basis of H^m Hom(e, g) to g."""
    h = hom_complex(e, g)
    pieces, mats, offsets, off = [], [], [], 0
    for m in h.degree_range:
        for vec in h.homology_basis(m):
            pieces.append(shift(e, -m))
            mats.append(h.vector_to_matrix(m, vec))
            offsets.append(off)
            off += len(e.summands)
    src = direct_sum(pieces, e.algebra)
    return ChainMap(src, g, 0, _blockwise(mats, offsets, into_rows=False))


def coevaluation_map(e: TwistedComplex, g: TwistedComplex) -> ChainMap:
    """Closed degree-0 map from g to the sum of ``e[m]`` over a basis of H^m Hom(g, e)."""
    h = hom_complex(g, e)
    pieces, mats, offsets, off = [], [], [], 0
    for m in h.degree_range:
        for vec in h.homology_basis(m):
            pieces.append(shift(e, m))
            mats.append(h.vector_to_matrix(m, vec))
            offsets.append(off)
            off += len(e.summands)
    tgt = direct_sum(pieces, e.algebra)
    return ChainMap(g, tgt, 0, _blockwise(mats, offsets, into_rows=True))


def twist(e: TwistedComplex, g: TwistedComplex) -> TwistedComplex:
    out = minimize(cone(evaluation_map(e, g)))
    out.check_window()
    return out


def inverse_twist(e: TwistedComplex, g: TwistedComplex) -> TwistedComplex:
    out = minimize(shift(cone(coevaluation_map(e, g)), -1))
    out.check_window()
    return out


def composite_twist(gamma: SphericalCollection, g: TwistedComplex, strict: bool = True) -> TwistedComplex:
    """T_{E_1}(T_{E_2}(... T_{E_n}(g)))."""
    if strict:
        from .analysis import is_strongly_spherical

        ok, violations = is_strongly_spherical(gamma)
        if not ok:
            raise StrictModeError(violations)
    out = g
    for e in reversed(gamma.objects):
        out = twist(e, out)
    return out
