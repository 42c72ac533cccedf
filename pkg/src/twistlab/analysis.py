"""Decision procedures for spherical objects and commuting twists."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .complexes import (
    ChainMap,
    ComplexError,
    TwistedComplex,
    cone,
    ext_table,
    hom_complex,
    is_isomorphic,
    minimize,
    projective,
    shift,
)
from .twists import SphericalCollection, twist


class AnalysisError(ValueError):
    pass


class NotSphericalError(AnalysisError):
    pass


class TheoremViolation(AssertionError):
    """The model contradicted a statement the engine asserts as a theorem."""


def is_spherical(e: TwistedComplex, d: int) -> bool:
    return dict(ext_table(e, e)) == {0: 1, d: 1}


@dataclass(frozen=True)
class Classification:
    simple: bool
    rigid: bool
    exceptional: bool
    spherical: bool
    table: dict

    def as_dict(self):
        return {"simple": self.simple, "rigid": self.rigid,
                "exceptional": self.exceptional, "spherical": self.spherical}


def classify(e: TwistedComplex, d: int) -> Classification:
    t = ext_table(e, e)
    simple = t.get(0, 0) == 1
    return Classification(
        simple=simple,
        rigid=t.get(1, 0) == 0,
        exceptional=simple and all(t.get(i, 0) == 0 for i in range(1, d)),
        spherical=dict(t) == {0: 1, d: 1},
        table=dict(t),
    )


def is_orthogonal(e: TwistedComplex, f: TwistedComplex) -> bool:
    return not ext_table(e, f) and not ext_table(f, e)


def is_strongly_spherical(gamma: SphericalCollection) -> tuple[bool, list]:
    """Check the pattern {0:1, d:1} on the diagonal and nothing off it.

    Violations are (name_i, name_j, shift) triples, first offending shift
    per ordered pair.
    """
    d = gamma.cy_dimension
    violations = []
    objs, names = gamma.objects, gamma.names
    for i, a in enumerate(objs):
        for j, b in enumerate(objs):
            t = dict(ext_table(a, b))
            want = {0: 1, d: 1} if i == j else {}
            if t != want:
                bad = sorted(k for k in set(t) | set(want) if t.get(k) != want.get(k))
                violations.append((names[i], names[j], bad[0]))
    return not violations, violations


def is_strongly_simple(objs: Sequence[TwistedComplex]) -> bool:
    for i, a in enumerate(objs):
        if ext_table(a, a).get(0, 0) != 1:
            return False
        for j, b in enumerate(objs):
            if i != j and ext_table(a, b):
                return False
    return True


def d_e(e: TwistedComplex, g: TwistedComplex) -> int:
    return ext_table(e, g).total


def _require_d(d: int):
    if d < 2:
        raise AnalysisError(f"requires d >= 2 (the lemma assumes dim X >= 2), got d={d}")


def _require_spherical(e: TwistedComplex, d: int, what: str = "e"):
    if not is_spherical(e, d):
        raise NotSphericalError(f"{what} is not {d}-spherical: ext table {ext_table(e, e)!r}")


# -- filtrations -------------------------------------------------------------

@dataclass
class PeelResult:
    success: bool
    shifts: list = field(default_factory=list)
    failure: Optional[str] = None  # None | "parity" | "no-reduction" | "orthogonal-residue" | "budget"
    message: str = ""
    d_e_trace: list = field(default_factory=list)

    @property
    def length(self) -> int:
        return len(self.shifts)

    @property
    def length_matches_d_e(self) -> bool:
        """Whether 2 * length equals the starting d_e."""
        return bool(self.d_e_trace) and 2 * len(self.shifts) == self.d_e_trace[0]


def _candidate_maps(e, g, rng, seeded: bool):
    """Yield (m, ChainMap e[-m] -> g) candidates, minimal |m| first."""
    h = hom_complex(e, g)
    degrees = [m for m in h.degree_range if h.homology_dim(m)]
    degrees.sort(key=lambda m: (abs(m), m if not seeded else rng.random()))
    F = e.algebra.field
    src_cache = {}
    for m in degrees:
        basis = h.homology_basis(m)
        vecs = []
        if seeded:
            for _ in range(2):
                cs = [F(rng.randrange(-9, 10)) for _ in basis]
                if not any(cs):
                    cs[rng.randrange(len(cs))] = F.one
                vecs.append([sum((c * v[i] for c, v in zip(cs, basis)), F.zero)
                             for i in range(len(basis[0]))])
        vecs.extend(basis)
        src = src_cache.setdefault(m, shift(e, -m))
        for vec in vecs:
            yield m, ChainMap(src, g, 0, h.vector_to_matrix(m, vec))


def peel_filtration(e: TwistedComplex, g: TwistedComplex, d: int | None = None,
                    seed: int | None = None, budget: int = 200) -> PeelResult:
    """Peel shifted copies of e off g by cones until nothing is left.

    Each step takes a non-zero class ``f: e[-m] -> g`` (minimal |m| first)
    and replaces g by the minimal model of cone(f).  A step is accepted
    when it strictly lowers (minimal-model size, d_e) lexicographically;
    other choices are backtracked over within ``budget`` cone evaluations.
    With ``seed=None`` candidates are homology basis vectors in order; a
    seed randomises degree ties and tries random combinations first.
    """
    d = e.algebra.cy_dimension if d is None else d
    _require_d(d)
    _require_spherical(e, d)
    rng = random.Random(seed)
    seeded = seed is not None
    steps = [0]

    start = minimize(g)
    de0 = d_e(e, start)
    if de0 % 2:
        return PeelResult(False, [], "parity",
                          f"d_e = {de0} is odd; objects of <E> have even d_e", [de0])

    def rec(cur, de, trace):
        if cur.is_zero:
            return []
        if de == 0:
            raise _Fail("orthogonal-residue",
                        f"residue {cur.describe()} is orthogonal to e but non-zero")
        if de % 2:
            raise _Fail("parity", f"d_e = {de} is odd")
        here = (len(cur.summands), de)
        for m, f in _candidate_maps(e, cur, rng, seeded):
            steps[0] += 1
            if steps[0] > budget:
                raise _Fail("budget", f"exceeded peeling budget {budget}")
            nxt = minimize(cone(f))
            nde = d_e(e, nxt)
            if nde > de or (len(nxt.summands), nde) >= here:
                continue
            trace.append(nde)
            try:
                return [-m] + rec(nxt, nde, trace)
            except _Fail as exc:
                if exc.kind == "budget":
                    raise
                trace.pop()
        raise _Fail("no-reduction", f"no cone step shrinks {cur.describe()} (d_e = {de})")

    trace = [de0]
    try:
        shifts = rec(start, de0, trace)
    except _Fail as exc:
        return PeelResult(False, [], exc.kind, str(exc), trace)
    return PeelResult(True, shifts, None, "", trace)


class _Fail(Exception):
    def __init__(self, kind, msg):
        super().__init__(msg)
        self.kind = kind


@dataclass
class MembershipReport:
    e: TwistedComplex
    g: TwistedComplex
    in_thick_subcategory: bool
    d_e_total: int
    filtration_shifts: Optional[list]
    twist_test_passed: bool
    peel: Optional[PeelResult] = None

    def as_dict(self):
        return {
            "in_thick_subcategory": self.in_thick_subcategory,
            "d_e_total": self.d_e_total,
            "filtration_shifts": self.filtration_shifts,
            "twist_test_passed": self.twist_test_passed,
            "peel_failure": None if self.peel is None else self.peel.failure,
            "length_matches_d_e": (None if not self.in_thick_subcategory
                                   else 2 * len(self.filtration_shifts) == self.d_e_total),
        }


def thick_membership(e: TwistedComplex, g: TwistedComplex, d: int | None = None,
                     seed: int = 0) -> MembershipReport:
    """g lies in <e> iff twist(e, g) ~= g[1-d]."""
    d = e.algebra.cy_dimension if d is None else d
    _require_d(d)
    _require_spherical(e, d)
    total = d_e(e, g)
    passed = bool(is_isomorphic(twist(e, g), shift(g, 1 - d), seed=seed))
    peel = peel_filtration(e, g, d)
    if passed:
        if not peel.success:
            raise TheoremViolation(f"twist test passed but peeling failed: {peel.message}")
        return MembershipReport(e, g, True, total, peel.shifts, True, peel)
    return MembershipReport(e, g, False, total, None, False, peel)


# -- commutation -------------------------------------------------------------

class Commute(enum.Enum):
    COMMUTE_ORTHOGONAL = "COMMUTE_ORTHOGONAL"
    COMMUTE_EQUAL = "COMMUTE_EQUAL"
    NOT_COMMUTE = "NOT_COMMUTE"


@dataclass
class CommuteReport:
    verdict: Commute
    generators: list
    witness_shift: Optional[int] = None
    witness_generator: Optional[int] = None
    lhs: Optional[TwistedComplex] = None
    rhs: Optional[TwistedComplex] = None

    def as_dict(self, names=None):
        out = {"verdict": self.verdict.value,
               "generators": names or [g.describe() for g in self.generators]}
        if self.verdict is Commute.COMMUTE_EQUAL:
            out["witness_shift"] = self.witness_shift
        if self.verdict is Commute.NOT_COMMUTE:
            gi = self.witness_generator
            out["witness"] = {
                "generator": (names[gi] if names else self.generators[gi].describe()),
                "e_after_f": self.lhs.describe(),
                "f_after_e": self.rhs.describe(),
            }
        return out


def shift_witness(e: TwistedComplex, f: TwistedComplex, seed: int = 0) -> Optional[int]:
    """Return s with f ~= e[s], if one exists."""
    me, mf = minimize(e), minimize(f)
    if me.is_zero or mf.is_zero:
        return 0 if me.is_zero and mf.is_zero else None
    if sorted(v for v, _ in me.summands) != sorted(v for v, _ in mf.summands):
        return None
    s = min(t for _, t in mf.summands) - min(t for _, t in me.summands)
    return s if is_isomorphic(f, shift(e, s), seed=seed) else None


def commute_classify(e: TwistedComplex, f: TwistedComplex,
                     generators: Sequence[TwistedComplex] | None = None,
                     d: int | None = None, seed: int = 0) -> CommuteReport:
    alg = e.algebra
    d = alg.cy_dimension if d is None else d
    _require_spherical(e, d, "e")
    _require_spherical(f, d, "f")
    if generators is None:
        generators = [projective(alg, v) for v in alg.idempotents]
    generators = list(generators)
    for i, g in enumerate(generators):
        lhs = twist(e, twist(f, g))
        rhs = twist(f, twist(e, g))
        if not is_isomorphic(lhs, rhs, seed=seed):
            return CommuteReport(Commute.NOT_COMMUTE, generators, witness_generator=i,
                                 lhs=lhs, rhs=rhs)
    s = shift_witness(e, f, seed)
    if s is not None:
        return CommuteReport(Commute.COMMUTE_EQUAL, generators, witness_shift=s)
    if not is_orthogonal(e, f):
        raise TheoremViolation("twists commute on all generators but e, f are neither "
                               "orthogonal nor shifts of each other")
    return CommuteReport(Commute.COMMUTE_ORTHOGONAL, generators)
