"""Finite-dimensional graded algebras and the zigzag construction.

Conventions
-----------
A basis element ``x`` with ``source=v`` and ``target=w`` is a morphism of
projectives ``P_v -> P_w``; equivalently ``x`` lies in ``e_w A e_v`` for
right modules.  The product table is keyed by composition order:
``products[(g, f)]`` is ``g . f`` (first ``f``, then ``g``) and is only
non-zero when ``target(f) == source(g)``.  Internal degree is the
homological degree, so ``Hom(P_v, P_w[i])`` is the degree-``i`` part of
``e_w A e_v``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .linalg import QQ, FieldSpec


class AlgebraError(ValueError):
    pass


@dataclass(frozen=True)
class BasisElement:
    name: str
    source: str
    target: str
    degree: int


@dataclass(frozen=True)
class GraphSpec:
    vertices: tuple
    edges: tuple
    arrow_degrees: Mapping = field(default_factory=dict)

    def neighbors(self, v):
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            elif b == v:
                out.append(a)
        return out

    def degree_of(self, v, w, d):
        return self.arrow_degrees.get((v, w), None)


def path_graph(n: int, d: int = 2, forward_degree: int | None = None) -> GraphSpec:
    """The A_n graph 1 - 2 - ... - n.

    ``forward_degree`` is the degree of the arrow i -> i+1; the reverse
    arrow gets ``d - forward_degree``.  Defaults to 1.
    """
    fd = 1 if forward_degree is None else forward_degree
    verts = tuple(str(i) for i in range(1, n + 1))
    edges = tuple((verts[i], verts[i + 1]) for i in range(n - 1))
    degs = {}
    for a, b in edges:
        degs[(a, b)] = fd
        degs[(b, a)] = d - fd
    return GraphSpec(verts, edges, degs)


def _fmt_elem(algebra, elem):
    if not elem:
        return "0"
    return " + ".join(f"{c}*{algebra.basis[i].name}" for i, c in sorted(elem.items()))


@dataclass(frozen=True, eq=False)
class AlgebraSpec:
    field: FieldSpec
    cy_dimension: int
    idempotents: tuple  # vertex names
    basis: tuple  # BasisElement
    products: Mapping  # (i, j) -> {k: coeff}, i.e. basis[i] . basis[j]

    # -- lookup tables --------------------------------------------------
    @cached_property
    def index(self) -> dict:
        return {b.name: i for i, b in enumerate(self.basis)}

    @cached_property
    def idempotent_index(self) -> dict:
        out = {}
        for i, b in enumerate(self.basis):
            if b.degree == 0 and b.source == b.target:
                out[b.source] = i
        return out

    @cached_property
    def _hom_index(self) -> dict:
        out: dict = {}
        for i, b in enumerate(self.basis):
            out.setdefault((b.source, b.target, b.degree), []).append(i)
        return out

    @cached_property
    def max_degree(self) -> int:
        return max((b.degree for b in self.basis), default=0)

    @cached_property
    def _mul_rows(self) -> dict:
        rows: dict = {}
        for (i, j), val in self.products.items():
            if val:
                rows.setdefault(j, []).append((i, val))
        return rows

    def hom_basis(self, source: str, target: str, degree: int) -> list[int]:
        """Indices of basis elements giving maps ``P_source -> P_target[degree]``."""
        return self._hom_index.get((source, target, degree), [])

    @property
    def vertices(self) -> tuple:
        return self.idempotents

    @property
    def dimension(self) -> int:
        return len(self.basis)

    # -- element arithmetic (elements are dicts index -> scalar) --------
    def element(self, **coeffs) -> dict:
        return {self.index[k]: self.field(v) for k, v in coeffs.items() if v}

    def mul(self, g: dict, f: dict) -> dict:
        """Composite ``g . f`` of two elements."""
        out: dict = {}
        prods = self.products
        for j, cf in f.items():
            for i, cg in g.items():
                val = prods.get((i, j))
                if val:
                    c = cg * cf
                    for k, ck in val.items():
                        nv = out.get(k, 0) + c * ck
                        if nv:
                            out[k] = nv
                        else:
                            out.pop(k, None)
        return out

    def format(self, elem: dict) -> str:
        return _fmt_elem(self, elem)

    def __repr__(self):
        return (f"AlgebraSpec(dim={self.dimension}, vertices={list(self.idempotents)}, "
                f"d={self.cy_dimension}, field={self.field})")


def build_zigzag(graph: GraphSpec, field: FieldSpec = QQ, d: int = 2) -> AlgebraSpec:
    """Zigzag algebra of ``graph`` with loops in degree ``d``."""
    if d < 2:
        raise AlgebraError(f"Calabi-Yau dimension must be >= 2, got {d}")
    if not graph.vertices:
        raise AlgebraError("empty graph")
    verts = tuple(graph.vertices)
    vset = set(verts)
    for a, b in graph.edges:
        if a == b:
            raise AlgebraError(f"self-loop at {a}")
        if a not in vset or b not in vset:
            raise AlgebraError(f"edge ({a},{b}) uses an unknown vertex")
        da, db = graph.arrow_degrees.get((a, b)), graph.arrow_degrees.get((b, a))
        if da is None or db is None:
            raise AlgebraError(f"missing arrow degree on edge {a}-{b}")
        if da < 1 or db < 1:
            raise AlgebraError(f"arrow degrees on {a}-{b} must be >= 1")
        if da + db != d:
            raise AlgebraError(f"arrow degrees on {a}-{b} sum to {da + db}, expected d={d}")

    basis = [BasisElement(f"e{v}" if len(v) == 1 else f"e_{v}", v, v, 0) for v in verts]
    sep = lambda *vs: "".join(vs) if all(len(v) == 1 for v in vs) else "_".join(("",) + vs)[1:]
    arrows = {}
    for a, b in graph.edges:
        for v, w in ((a, b), (b, a)):
            arrows[(v, w)] = len(basis)
            basis.append(BasisElement("a" + sep(v, w), v, w, graph.arrow_degrees[(v, w)]))
    loops = {}
    for v in verts:
        if graph.neighbors(v):
            loops[v] = len(basis)
            basis.append(BasisElement(f"l{v}" if len(v) == 1 else f"l_{v}", v, v, d))

    one = field.one
    products: dict = {}
    idem = {v: i for i, v in enumerate(verts)}
    for j, b in enumerate(basis):
        # unit laws: e_target . x = x, x . e_source = x
        products[(idem[b.target], j)] = {j: one}
        products[(j, idem[b.source])] = {j: one}
    for (v, w), fi in arrows.items():
        for (w2, u), gi in arrows.items():
            if w2 != w:
                continue
            # a(w,u) . a(v,w): P_v -> P_w -> P_u
            products[(gi, fi)] = {loops[v]: one} if u == v else {}
    return AlgebraSpec(field, d, verts, tuple(basis), products)


def validate(a: AlgebraSpec) -> list[str]:
    """List violations of the graded-algebra axioms; empty means valid."""
    report = []
    B = a.basis
    vset = set(a.idempotents)
    deg0 = [i for i, b in enumerate(B) if b.degree == 0]
    if any(b.degree < 0 for b in B):
        report.append("negative degree basis element")
    for b in B:
        if b.source not in vset or b.target not in vset:
            report.append(f"basis element {b.name} uses an unknown vertex")
    idem = a.idempotent_index
    if set(idem) != vset or len(deg0) != len(vset):
        report.append("degree-0 basis elements are not exactly one idempotent per vertex")
    for i in deg0:
        b = B[i]
        if b.source != b.target:
            report.append(f"degree-0 element {b.name} is not at a single vertex")
    for i in deg0:
        for j in deg0:
            val = a.products.get((i, j), {})
            expect = {i: a.field.one} if i == j else {}
            if {k: c for k, c in val.items() if c} != expect:
                report.append(f"idempotent axiom fails for {B[i].name}.{B[j].name}")
    for j, b in enumerate(B):
        if b.target in idem and a.mul({idem[b.target]: 1}, {j: 1}) != {j: a.field.one}:
            report.append(f"unit law fails: e_{b.target}.{b.name}")
        if b.source in idem and a.mul({j: 1}, {idem[b.source]: 1}) != {j: a.field.one}:
            report.append(f"unit law fails: {b.name}.e_{b.source}")
    for (i, j), val in a.products.items():
        gi, fj = B[i], B[j]
        for k, c in val.items():
            if not c:
                continue
            if fj.target != gi.source:
                report.append(f"vertex violation: {gi.name}.{fj.name} is incomposable but non-zero")
                break
            if B[k].degree != gi.degree + fj.degree:
                report.append(
                    f"grading violation: deg({gi.name}.{fj.name}) != "
                    f"deg {gi.name} + deg {fj.name}")
                break
            if B[k].source != fj.source or B[k].target != gi.target:
                report.append(f"vertex violation: {gi.name}.{fj.name} lands outside e_t A e_s")
                break
    n = len(B)
    for x, y, z in itertools.product(range(n), repeat=3):
        if B[z].target != B[y].source or B[y].target != B[x].source:
            continue
        lhs = a.mul(a.mul({x: 1}, {y: 1}), {z: 1})
        rhs = a.mul({x: 1}, a.mul({y: 1}, {z: 1}))
        if lhs != rhs:
            report.append(f"associativity fails on ({B[x].name}, {B[y].name}, {B[z].name})")
    return report
