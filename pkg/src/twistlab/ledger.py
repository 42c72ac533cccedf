"""Dimension bookkeeping over long exact sequences of Ext groups.

A problem holds entities, short exact sequences, parameter bounds and
facts.  Every short exact sequence ``A -> B -> C`` and every entity ``T``
yield two long exact sequences, ``Ext*(-, T)`` and ``Ext*(T, -)``.  The
unknowns are slot dimensions ``dim Ext^i(X, Y)`` (shared between all
sequences) and one rank per arrow.  Exactness makes each interior slot
the sum of its two neighbouring ranks.

``propagate`` combines exact elimination of the linear equalities
(right-hand sides are linear in the declared parameters) with interval
tightening of the bounds ``0 <= rank <= dim``.  Every row and bound
carries the set of events it was derived from, which is what a
derivation trace reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional


class LedgerError(ValueError):
    def __init__(self, msg, line: int | None = None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


class Contradiction(LedgerError):
    def __init__(self, msg, chain=(), line=None):
        super().__init__(msg, line)
        self.chain = list(chain)


# -- symbolic values -------------------------------------------------------

@dataclass(frozen=True)
class LinExpr:
    """const + sum of coeff * param, with rational coefficients."""

    const: Fraction = Fraction(0)
    terms: tuple = ()  # sorted (param, coeff) pairs, coeff != 0

    @staticmethod
    def of(x) -> "LinExpr":
        if isinstance(x, LinExpr):
            return x
        if isinstance(x, str):
            return LinExpr(Fraction(0), ((x, Fraction(1)),))
        return LinExpr(Fraction(x))

    @staticmethod
    def _build(const, coeffs: dict) -> "LinExpr":
        return LinExpr(Fraction(const), tuple(sorted((p, c) for p, c in coeffs.items() if c)))

    def coeff(self, p) -> Fraction:
        return dict(self.terms).get(p, Fraction(0))

    def __add__(self, other):
        other = LinExpr.of(other)
        c = dict(self.terms)
        for p, v in other.terms:
            c[p] = c.get(p, 0) + v
        return LinExpr._build(self.const + other.const, c)

    __radd__ = __add__

    def __neg__(self):
        return LinExpr(-self.const, tuple((p, -c) for p, c in self.terms))

    def __sub__(self, other):
        return self + (-LinExpr.of(other))

    def __rsub__(self, other):
        return LinExpr.of(other) - self

    def __mul__(self, k):
        k = Fraction(k)
        return LinExpr._build(self.const * k, {p: c * k for p, c in self.terms})

    __rmul__ = __mul__

    def __truediv__(self, k):
        return self * (1 / Fraction(k))

    @property
    def is_const(self) -> bool:
        return not self.terms

    @property
    def is_zero(self) -> bool:
        return not self.terms and self.const == 0

    def format(self, order: Iterable[str] = ()) -> str:
        rank = {p: i for i, p in enumerate(order)}
        parts = []
        for p, c in sorted(self.terms, key=lambda t: (rank.get(t[0], len(rank)), t[0])):
            mag = abs(c)
            body = p if mag == 1 else f"{_fmt(mag)}*{p}"
            parts.append(("-" if c < 0 else "+", body))
        if self.const or not parts:
            parts.append(("-" if self.const < 0 else "+", _fmt(abs(self.const))))
        sign, first = parts[0]
        out = ("-" if sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __str__(self):
        return self.format()


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass
class ParamBox:
    """Integer parameters with optional lower and upper bounds."""

    names: list = field(default_factory=list)
    lo: dict = field(default_factory=dict)
    hi: dict = field(default_factory=dict)
    events: dict = field(default_factory=dict)  # param -> event ids of its bounds

    def minimum(self, e: LinExpr) -> Optional[Fraction]:
        """Minimum over the box, None for -infinity."""
        out = e.const
        for p, c in e.terms:
            b = self.lo.get(p) if c > 0 else self.hi.get(p)
            if b is None:
                return None
            out += c * b
        return out

    def maximum(self, e: LinExpr) -> Optional[Fraction]:
        m = self.minimum(-e)
        return None if m is None else -m

    def le(self, a: LinExpr, b: LinExpr) -> bool:
        """a <= b everywhere in the box."""
        m = self.maximum(a - b)
        return m is not None and m <= 0

    def lt(self, a: LinExpr, b: LinExpr) -> bool:
        m = self.maximum(a - b)
        return m is not None and m < 0


# -- slots, sequences, events ----------------------------------------------

ZERO_ENTITY = "0"
LOCAL_BASE = 1 << 30


@dataclass(frozen=True)
class Slot:
    """dim Ext^degree(source, target)."""

    source: str
    target: str
    degree: int

    def __str__(self):
        if self.degree == 0:
            return f"hom({self.source},{self.target})"
        return f"ext{self.degree}({self.source},{self.target})"


@dataclass(frozen=True)
class Rank:
    les: str
    position: int

    def __str__(self):
        return f"rank[{self.les}#{self.position}]"


@dataclass(frozen=True)
class SESDecl:
    name: str
    sub: str
    mid: str
    quo: str
    max_degree: int = 3


@dataclass
class LESDecl:
    name: str
    ses: str
    direction: str  # "hom_into" | "hom_from"
    test: str
    slots: list
    ranks: list  # ranks[k] is the arrow slots[k] -> slots[k+1]

    def arrows(self):
        for k, r in enumerate(self.ranks):
            yield self.slots[k], self.slots[k + 1], r


def derive_les(ses: SESDecl, direction: str, test: str, max_degree: int | None = None) -> LESDecl:
    """The long exact sequence of ``ses`` under Ext*(-, test) or Ext*(test, -)."""
    n = ses.max_degree if max_degree is None else max_degree
    if n < 1:
        raise LedgerError("max_degree must be at least 1")
    slots = []
    for i in range(n + 1):
        if direction == "hom_into":
            slots += [Slot(ses.quo, test, i), Slot(ses.mid, test, i), Slot(ses.sub, test, i)]
        elif direction == "hom_from":
            slots += [Slot(test, ses.sub, i), Slot(test, ses.mid, i), Slot(test, ses.quo, i)]
        else:
            raise LedgerError(f"unknown direction {direction!r}")
    name = f"{ses.name}:{'Ext(-,' + test + ')' if direction == 'hom_into' else 'Ext(' + test + ',-)'}"
    ranks = [Rank(name, k) for k in range(len(slots) - 1)]
    return LESDecl(name, ses.name, direction, test, slots, ranks)


@dataclass(frozen=True)
class Event:
    id: int
    kind: str  # assume | fact | map | les | shift | bounds | derived
    text: str
    line: Optional[int] = None
    premises: frozenset = frozenset()

    def render(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return f"[{self.kind}] {where}{self.text}"


@dataclass(frozen=True)
class Predicate:
    op: str  # > < = >= <=
    bound: LinExpr

    def __str__(self):
        return f"i{self.op}{self.bound}"


ANNOTATIONS = ("injective", "surjective", "zero", "nonzero")


@dataclass(frozen=True)
class Fact:
    source: str
    target: str
    degree: Optional[int]  # None: use predicates
    predicates: tuple
    op: str  # = >= <=
    value: LinExpr
    event: int


@dataclass(frozen=True)
class MapFact:
    src: Slot
    tgt: Slot
    annotation: str
    event: int


# -- the problem --------------------------------------------------------------

class LedgerProblem:
    def __init__(self):
        self.box = ParamBox()
        self.entities: list = []
        self.aliases: dict = {}  # name -> (base, shift)
        self.ses: list = []
        self.facts: list = []
        self.maps: list = []
        self.events: list = []
        self.derived: list = []  # event ids of earlier derivations
        self.ses_events: dict = {}

    # declarations
    def _event(self, kind, text, line=None, premises=frozenset()) -> int:
        ev = Event(len(self.events), kind, text, line, frozenset(premises))
        self.events.append(ev)
        return ev.id

    def add_param(self, name: str, line=None):
        if name in self.box.names:
            raise LedgerError(f"parameter {name} declared twice", line)
        self.box.names.append(name)
        self.box.events[name] = []

    def bound_param(self, name: str, op: str, value, line=None, text=None):
        if name not in self.box.names:
            raise LedgerError(f"unknown parameter {name}", line)
        v = Fraction(value)
        ev = self._event("assume", text or f"{name} {op} {_fmt(v)}", line)
        self.box.events[name].append(ev)
        lo, hi = self.box.lo.get(name), self.box.hi.get(name)
        if op in (">", ">="):
            new = v + 1 if op == ">" else v
            new = Fraction(-((-new.numerator) // new.denominator))  # ceil
            self.box.lo[name] = new if lo is None else max(lo, new)
        elif op in ("<", "<="):
            new = v - 1 if op == "<" else v
            new = Fraction(new.numerator // new.denominator)
            self.box.hi[name] = new if hi is None else min(hi, new)
        elif op == "=":
            self.box.lo[name] = v if lo is None else max(lo, v)
            self.box.hi[name] = v if hi is None else min(hi, v)
        else:
            raise LedgerError(f"bad comparison {op}", line)
        lo, hi = self.box.lo.get(name), self.box.hi.get(name)
        if lo is not None and hi is not None and lo > hi:
            raise Contradiction(f"parameter {name} has empty range [{lo}, {hi}]", line=line)

    def add_entity(self, name: str, line=None):
        if name in self.entities or name in self.aliases or name == ZERO_ENTITY:
            raise LedgerError(f"entity {name} declared twice", line)
        self.entities.append(name)

    def add_alias(self, name: str, base: str, shift: int, line=None):
        if name in self.entities or name in self.aliases:
            raise LedgerError(f"entity {name} declared twice", line)
        self._require_entity(base, line)
        b, s = self.aliases.get(base, (base, 0))
        self.aliases[name] = (b, s + shift)

    def add_ses(self, name, sub, mid, quo, max_degree=3, line=None):
        if any(s.name == name for s in self.ses):
            raise LedgerError(f"sequence {name} declared twice", line)
        for e in (sub, mid, quo):
            if e != ZERO_ENTITY:
                self._require_entity(e, line)
                if e in self.aliases:
                    raise LedgerError(f"sequence terms must be plain entities, {e} is a shift", line)
        if max_degree < 1:
            raise LedgerError("max degree must be at least 1", line)
        self.ses.append(SESDecl(name, sub, mid, quo, max_degree))
        self.ses_events[name] = self._event("les", f"exactness of the long exact sequences of {name}: {sub} -> {mid} -> {quo}", line)

    def _require_entity(self, e, line=None):
        if e != ZERO_ENTITY and e not in self.entities and e not in self.aliases:
            raise LedgerError(f"unknown entity {e}", line)

    def canonical(self, slot: Slot) -> Optional[Slot]:
        """Resolve shift aliases; None when the slot is zero for degree reasons."""
        a, sa = self.aliases.get(slot.source, (slot.source, 0))
        b, sb = self.aliases.get(slot.target, (slot.target, 0))
        i = slot.degree - sa + sb
        if i < 0:
            return None
        return Slot(a, b, i)

    def assert_fact(self, source, target, degree, op, value, predicates=(), line=None,
                    because=None, text=None) -> int:
        self._require_entity(source, line)
        self._require_entity(target, line)
        value = LinExpr.of(value)
        for p, _ in value.terms:
            if p not in self.box.names:
                raise LedgerError(f"unknown parameter {p}", line)
        if op not in ("=", ">=", "<="):
            raise LedgerError(f"bad comparison {op}", line)
        if degree is not None and op == "=":
            self._check_clash(source, target, degree, value, line)
        desc = text or f"{Slot(source, target, degree or 0) if degree is not None else f'ext({source},{target},' + ','.join(map(str, predicates)) + ')'} {op} {value}"
        if because:
            desc += f" (because {because})"
        ev = self._event("fact", desc, line)
        self.facts.append(Fact(source, target, degree, tuple(predicates), op, value, ev))
        return ev

    def _check_clash(self, source, target, degree, value, line):
        key = self.canonical(Slot(source, target, degree))
        for f in self.facts:
            if f.degree is None or f.op != "=":
                continue
            if self.canonical(Slot(f.source, f.target, f.degree)) == key and (f.value - value).is_const \
                    and not (f.value - value).is_zero:
                raise Contradiction(
                    f"{key} asserted as {value} but already exact at {f.value}",
                    [self.events[f.event].render()], line)

    def assert_map(self, src: Slot, tgt: Slot, annotation: str, line=None, because=None) -> int:
        if annotation not in ANNOTATIONS:
            raise LedgerError(f"unknown map annotation {annotation!r}", line)
        for s in (src, tgt):
            self._require_entity(s.source, line)
            self._require_entity(s.target, line)
        desc = f"{src} -> {tgt} is {annotation}"
        if because:
            desc += f" (because {because})"
        ev = self._event("map", desc, line)
        self.maps.append(MapFact(src, tgt, annotation, ev))
        return ev

    def sequences(self) -> list:
        tests = list(self.entities)
        out = []
        for s in self.ses:
            for t in tests:
                out.append(derive_les(s, "hom_into", t))
                out.append(derive_les(s, "hom_from", t))
        return out


# -- propagation --------------------------------------------------------------

@dataclass
class _Row:
    coeffs: dict  # var -> Fraction
    rhs: LinExpr
    prov: frozenset


class Solution:
    """Fixed point of propagation: an eliminated equality system plus bounds."""

    def __init__(self, problem: LedgerProblem):
        self.problem = problem
        self.box = problem.box
        self.local_events: list = []  # ids start at LOCAL_BASE
        self.pivots: dict = {}  # var -> _Row with that pivot (fully reduced)
        self.lo: dict = {}
        self.hi: dict = {}
        self.ineqs: list = []  # (small, big, prov)
        self.variables: set = set()
        self.slot_vars: set = set()
        self.iterations = 0

    # events
    def _event(self, kind, text, premises=frozenset()) -> int:
        ev = Event(LOCAL_BASE + len(self.local_events), kind, text, None, frozenset(premises))
        self.local_events.append(ev)
        return ev.id

    def event(self, i: int) -> Event:
        if i >= LOCAL_BASE:
            return self.local_events[i - LOCAL_BASE]
        return self.problem.events[i]

    # equalities
    def _reduce(self, coeffs, rhs, prov):
        coeffs = dict(coeffs)
        for v in [v for v in coeffs if v in self.pivots]:
            c = coeffs.get(v)
            if not c:
                continue
            r = self.pivots[v]
            for u, cu in r.coeffs.items():
                nv = coeffs.get(u, 0) - c * cu
                if nv:
                    coeffs[u] = nv
                else:
                    coeffs.pop(u, None)
            rhs = rhs - r.rhs * c
            prov = prov | r.prov
        return coeffs, rhs, prov

    def add_equation(self, coeffs: dict, rhs: LinExpr, prov: frozenset) -> bool:
        coeffs = {v: Fraction(c) for v, c in coeffs.items() if c}
        self.variables.update(coeffs)
        coeffs, rhs, prov = self._reduce(coeffs, rhs, prov)
        if not coeffs:
            if rhs.is_zero:
                return False
            lo, hi = self.box.minimum(rhs), self.box.maximum(rhs)
            if (lo is not None and lo > 0) or (hi is not None and hi < 0):
                raise Contradiction(f"inconsistent equations: 0 = {rhs.format(self.box.names)}",
                                    self._chain(prov))
            return False
        pv = min(coeffs, key=_var_order)
        c = coeffs[pv]
        row = _Row({u: cu / c for u, cu in coeffs.items()}, rhs / c, prov)
        for v, other in list(self.pivots.items()):
            k = other.coeffs.get(pv)
            if k:
                nc = dict(other.coeffs)
                for u, cu in row.coeffs.items():
                    nv = nc.get(u, 0) - k * cu
                    if nv:
                        nc[u] = nv
                    else:
                        nc.pop(u, None)
                self.pivots[v] = _Row(nc, other.rhs - row.rhs * k, other.prov | row.prov)
        self.pivots[pv] = row
        return True

    def express(self, coeffs: dict):
        """Reduce a linear form: returns (residual coeffs, value, provenance)."""
        return self._reduce({v: Fraction(c) for v, c in coeffs.items() if c}, LinExpr(), frozenset())

    # bounds
    def _lo(self, v):
        return self.lo.get(v, (LinExpr(), frozenset()))

    def _hi(self, v):
        return self.hi.get(v, (None, frozenset()))

    def _tighten(self, v, side, val: Optional[LinExpr], prov) -> bool:
        if val is None:
            return False
        if val.is_const:
            q = val.const
            val = LinExpr(Fraction(q.numerator // q.denominator) if side == "hi"
                          else Fraction(-((-q.numerator) // q.denominator)))
        if side == "hi":
            old = self.hi.get(v)
            if old is not None and (old[0] == val or not self.box.le(val, old[0])):
                return False
            self.hi[v] = (val, prov)
        else:
            old = self._lo(v)
            if old[0] == val or not self.box.le(old[0], val):
                return False
            self.lo[v] = (val, prov)
        lo, hi = self._lo(v), self._hi(v)
        if hi[0] is not None and self.box.lt(hi[0], lo[0]):
            raise Contradiction(
                f"{v} has empty range [{lo[0].format(self.box.names)}, {hi[0].format(self.box.names)}]",
                self._chain(lo[1] | hi[1]))
        return True

    def _row_bounds(self, row_coeffs, rhs, prov) -> bool:
        changed = False
        for v, cv in row_coeffs.items():
            # cv * v = rhs - sum(others)
            up, down = rhs, rhs  # upper / lower bound of the right-hand side
            pu, pd = prov, prov
            for u, cu in row_coeffs.items():
                if u == v:
                    continue
                lo, hi = self._lo(u), self._hi(u)
                if cu > 0:
                    down = None if down is None or hi[0] is None else down - hi[0] * cu
                    pd = pd | hi[1]
                    up = None if up is None else up - lo[0] * cu
                    pu = pu | lo[1]
                else:
                    up = None if up is None or hi[0] is None else up - hi[0] * cu
                    pu = pu | hi[1]
                    down = None if down is None else down - lo[0] * cu
                    pd = pd | lo[1]
            if cv > 0:
                changed |= self._tighten(v, "hi", None if up is None else up / cv, pu)
                changed |= self._tighten(v, "lo", None if down is None else down / cv, pd)
            else:
                changed |= self._tighten(v, "hi", None if down is None else down / cv, pd)
                changed |= self._tighten(v, "lo", None if up is None else up / cv, pu)
        return changed

    def _chain(self, prov) -> list:
        return [self.event(i).render() for i in sorted(self.closure(prov))]

    def closure(self, prov) -> set:
        out, todo = set(), list(prov)
        while todo:
            i = todo.pop()
            if i in out:
                continue
            out.add(i)
            todo.extend(self.event(i).premises)
        return out

    # the loop
    def run(self, max_iterations: int = 200):
        forced = set()
        for it in range(max_iterations):
            self.iterations = it + 1
            changed = False
            for v, row in list(self.pivots.items()):
                changed |= self._row_bounds(row.coeffs, row.rhs, row.prov)
            for small, big, prov in self.ineqs:
                hb = self._hi(big)
                if hb[0] is not None:
                    changed |= self._tighten(small, "hi", hb[0], hb[1] | prov)
                ls = self._lo(small)
                changed |= self._tighten(big, "lo", ls[0], ls[1] | prov)
            for v in sorted(self.variables, key=_var_order):
                if v in forced:
                    continue
                lo, hi = self._lo(v), self._hi(v)
                if hi[0] is None or lo[0] != hi[0]:
                    continue
                row = self.pivots.get(v)
                if row is not None and len(row.coeffs) == 1:
                    forced.add(v)
                    continue
                ev = self._event("bounds", f"{v} = {lo[0].format(self.box.names)} from its bounds",
                                 lo[1] | hi[1])
                forced.add(v)
                changed |= self.add_equation({v: 1}, lo[0], frozenset({ev}))
            if not changed:
                return self
        raise LedgerError(f"propagation did not reach a fixed point in {max_iterations} rounds")

    # queries
    def interval(self, v):
        row = self.pivots.get(v)
        if row is not None and len(row.coeffs) == 1:
            return row.rhs, row.rhs
        return self._lo(v)[0], self._hi(v)[0]

    def unbounded_slots(self) -> list:
        return sorted((v for v in self.slot_vars if self.interval(v)[1] is None), key=_var_order)


def _var_order(v):
    if isinstance(v, Slot):
        return (0, v.degree, v.source, v.target, "", 0)
    return (1, 0, "", "", v.les, v.position)


def _pred_holds(box: ParamBox, preds, i) -> Optional[bool]:
    """Decide a conjunction of degree predicates at degree i over the box."""
    for p in preds:
        diff = LinExpr.of(i) - p.bound  # i - k
        lo, hi = box.minimum(diff), box.maximum(diff)
        ok = {">": lo is not None and lo > 0, ">=": lo is not None and lo >= 0,
              "<": hi is not None and hi < 0, "<=": hi is not None and hi <= 0,
              "=": diff.is_zero}[p.op]
        bad = {">": hi is not None and hi <= 0, ">=": hi is not None and hi < 0,
               "<": lo is not None and lo >= 0, "<=": lo is not None and lo > 0,
               "=": diff.is_const and not diff.is_zero}[p.op]
        if bad:
            return False
        if not ok:
            return None
    return True


def propagate(problem: LedgerProblem) -> Solution:
    sol = Solution(problem)
    les_event = problem.ses_events
    seqs = problem.sequences()
    max_deg = max([s.max_degree for s in problem.ses], default=0)

    def var(slot: Slot):
        c = problem.canonical(slot)
        if c is not None and (c.source == ZERO_ENTITY or c.target == ZERO_ENTITY):
            return None
        if c is not None:
            sol.slot_vars.add(c)
            sol.variables.add(c)
        return c

    zero_ev = None
    for les in seqs:
        prov = frozenset({les_event[les.ses]})
        for k, slot in enumerate(les.slots):
            left = les.ranks[k - 1] if k > 0 else None
            right = les.ranks[k] if k < len(les.ranks) else None
            v = var(slot)
            if right is None:
                if left is not None and v is not None:
                    sol.ineqs.append((left, v, prov))
                elif left is not None:
                    sol.add_equation({left: 1}, LinExpr(), prov)
                continue
            coeffs = {r: -1 for r in (left, right) if r is not None}
            if v is not None:
                coeffs[v] = coeffs.get(v, 0) + 1
            sol.add_equation(coeffs, LinExpr(), prov)
            if v is not None:
                for r in (left, right):
                    if r is not None:
                        sol.ineqs.append((r, v, prov))
        sol.variables.update(les.ranks)

    for f in problem.facts:
        degrees = [f.degree] if f.degree is not None else range(0, max_deg + 1)
        for i in degrees:
            prem = {f.event}
            if f.degree is None:
                holds = _pred_holds(problem.box, f.predicates, i)
                if not holds:
                    continue
                for p in f.predicates:
                    for name, _ in p.bound.terms:
                        prem.update(problem.box.events.get(name, []))
            v = var(Slot(f.source, f.target, i))
            if v is None:
                if f.op == "=" and not f.value.is_zero:
                    raise Contradiction(f"fact on a zero slot: {Slot(f.source, f.target, i)} = {f.value}",
                                        [problem.events[f.event].render()])
                continue
            if f.op == "=":
                sol.add_equation({v: 1}, f.value, frozenset(prem))
            elif f.op == ">=":
                sol._tighten(v, "lo", f.value, frozenset(prem))
            else:
                sol._tighten(v, "hi", f.value, frozenset(prem))

    for m in problem.maps:
        src, tgt = problem.canonical(m.src), problem.canonical(m.tgt)
        hits = [(les, r) for les in seqs for s, t, r in les.arrows()
                if problem.canonical(s) == src and problem.canonical(t) == tgt]
        if not hits:
            raise LedgerError(f"no long exact sequence has an arrow {m.src} -> {m.tgt}",
                              problem.events[m.event].line)
        prov = frozenset({m.event})
        for les, r in hits:
            if m.annotation == "zero":
                sol.add_equation({r: 1}, LinExpr(), prov)
            elif m.annotation == "nonzero":
                sol._tighten(r, "lo", LinExpr.of(1), prov)
            else:
                end = src if m.annotation == "injective" else tgt
                if end is None:
                    continue
                sol.add_equation({r: 1, end: -1}, LinExpr(), prov)
    return sol.run()


# -- derivations --------------------------------------------------------------

@dataclass
class DeriveResult:
    expression: str
    exact: bool
    value: Optional[LinExpr]
    lo: Optional[LinExpr]
    hi: Optional[LinExpr]
    relation: Optional[str]
    trace: list
    event: Optional[int] = None

    def format_value(self, order=()) -> str:
        if self.exact:
            return self.value.format(order)
        hi = "inf" if self.hi is None else self.hi.format(order)
        lo = "-inf" if self.lo is None else self.lo.format(order)
        return f"[{lo}, {hi}]"

    def as_dict(self, order=()):
        out = {"expression": self.expression, "exact": self.exact,
               "value": self.format_value(order)}
        if self.relation:
            out["relation"] = self.relation
        out["trace"] = self.trace
        return out


def _form_text(coeffs: dict) -> str:
    parts = []
    for v, c in sorted(coeffs.items(), key=lambda t: _var_order(t[0])):
        body = str(v) if abs(c) == 1 else f"{_fmt(abs(c))}*{v}"
        parts.append(("-" if c < 0 else "+", body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for s, b in parts[1:]:
        out += f" {s} {b}"
    return out


def derive(problem: LedgerProblem, sol: Solution, form: dict, text: str | None = None,
           record: bool = True) -> DeriveResult:
    """Evaluate a linear form in slot dimensions against a propagated problem."""
    canon: dict = {}
    for slot, c in form.items():
        v = problem.canonical(slot)
        if v is None or ZERO_ENTITY in (v.source, v.target):
            continue
        if v not in sol.variables:
            raise LedgerError(f"unknown slot {slot}")
        canon[v] = canon.get(v, 0) + Fraction(c)
    canon = {v: c for v, c in canon.items() if c}
    text = text or _form_text(canon)
    residual, value, prov = sol.express(canon)
    order = problem.box.names
    if not residual:
        exact, lo, hi = True, -value, -value
        val = -value
        relation = None
    else:
        exact, val = False, None
        # the determined part is -value; the rest is bounded by intervals
        lo, hi = -value, -value
        for v, c in residual.items():
            vlo, vhi = sol.interval(v)
            if c > 0:
                lo = lo + vlo * c
                hi = None if hi is None or vhi is None else hi + vhi * c
            else:
                lo = None if lo is None or vhi is None else lo + vhi * c
                hi = None if hi is None else hi + vlo * c
            lp, hp = sol._lo(v)[1], sol._hi(v)[1]
            prov = prov | lp | hp
        if len(residual) == 1:
            (v, c), = residual.items()
            vlo, vhi = sol.interval(v)
            if vhi is not None and vlo == vhi:
                exact, val = True, -value + vlo * c
                lo = hi = val
        if exact:
            relation = None
        else:
            rest = _form_text(residual)
            relation = f"{text} = {rest}" if value.is_zero else \
                f"{text} = {(-value).format(order)} + {rest}".replace("+ -", "- ")
    closure = sol.closure(prov)
    trace_ids = set(closure)
    for did in problem.derived:
        ev = problem.events[did]
        if ev.premises and set(ev.premises) <= closure:
            trace_ids.add(did)
    trace = [sol.event(i).render() for i in sorted(trace_ids)]
    res = DeriveResult(text, exact, val, lo, hi, relation, trace)
    if record and exact:
        desc = f"{text} = {val.format(order)}"
        res.event = problem._event("derived", desc, premises=frozenset(
            i for i in closure if i < LOCAL_BASE))
        problem.derived.append(res.event)
    return res
