"""Scenario files: one algebra, named objects and maps, expectations.

::

    field QQ
    cy 2
    graph A3 path 3
    algebra zigzag
    object P1 = P(1)
    map f: P(1)[-1] -> P(2) = a12
    object C = cone(f)
    object M = P1 + P(3)[2]
    collection G = {P1, P(3)}
    expect spherical P1 = true
    expect ext P1 P(2) = {1:1}
    ledger sec3 {
      ...ledger lines...
    }

Names must be declared before they are used.  Object expressions are
``P(v)``, names, ``X[n]``, ``A + B``, ``cone(f)``, ``twist(E, G)``,
``twist_inv(E, G)``, ``scramble(X, seed)`` and ``zero``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dfield
from fractions import Fraction
from typing import Optional

from .algebra import AlgebraError, GraphSpec, build_zigzag, path_graph
from .complexes import ChainMap, ComplexError, cone, direct_sum, projective, shift, zero_complex
from .ledger_dsl import LedgerProgram, LedgerSyntaxError, parse_ledger
from .linalg import QQ, FieldSpec

KEYWORDS = ("field", "cy", "graph", "algebra", "object", "map", "collection", "expect", "ledger")
EXPECT_KINDS = ("spherical", "ext", "commute", "member", "iso", "strongly_spherical",
                "summands", "class", "ledger")
VERDICTS = ("COMMUTE_ORTHOGONAL", "COMMUTE_EQUAL", "NOT_COMMUTE")


class ScenarioError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = "" if line is None else (f"{line}:{col}: " if col else f"{line}: ")
        super().__init__(where + msg)
        self.line, self.col, self.msg = line, col, msg


_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#.*)
  | (?P<arrow>->)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[()\[\]{},:;=+\-*/])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    col: int


def _tokens(text: str, lineno: int) -> list:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ScenarioError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        if m.lastgroup not in ("ws", "comment"):
            out.append(Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return out


# -- AST ------------------------------------------------------------------------

@dataclass(frozen=True)
class GraphDecl:
    name: str
    path: Optional[int] = None
    vertices: tuple = ()
    edges: tuple = ()  # (a, b, deg_ab or None, deg_ba or None)

    def render(self) -> list:
        if self.path is not None:
            return [f"graph {self.name} path {self.path}"]
        out = [f"graph {self.name} {{", "  vertices " + " ".join(self.vertices)]
        for a, b, x, y in self.edges:
            out.append(f"  edge {a} {b}" + ("" if x is None else f" degrees {x} {y}"))
        return out + ["}"]

    def spec(self, d: int) -> GraphSpec:
        if self.path is not None:
            return path_graph(self.path, d)
        degs = {}
        for a, b, x, y in self.edges:
            x = 1 if x is None else x
            y = d - x if y is None else y
            degs[(a, b)], degs[(b, a)] = x, y
        return GraphSpec(tuple(self.vertices), tuple((a, b) for a, b, _, _ in self.edges), degs)


def render_expr(e) -> str:
    k = e[0]
    if k == "proj":
        return f"P({e[1]})"
    if k == "ref":
        return e[1]
    if k == "zero":
        return "zero"
    if k == "shift":
        inner = render_expr(e[1])
        if e[1][0] == "sum":
            inner = f"({inner})"
        return f"{inner}[{e[2]}]"
    if k == "sum":
        return " + ".join(render_expr(x) for x in e[1])
    if k == "cone":
        return f"cone({e[1]})"
    if k in ("twist", "twist_inv"):
        return f"{k}({render_expr(e[1])}, {render_expr(e[2])})"
    if k == "scramble":
        return f"scramble({render_expr(e[1])}, {e[2]})"
    raise ValueError(k)


def _render_elem(terms) -> str:
    out = ""
    for c, name in terms:
        mag = abs(c)
        q = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
        body = name if mag == 1 else f"{q}*{name}"
        out = (("-" if c < 0 else "") + body) if not out else f"{out} {'-' if c < 0 else '+'} {body}"
    return out or "0"


@dataclass(frozen=True)
class Decl:
    kind: str  # object | map | collection
    name: str
    args: tuple
    line: int = dfield(default=0, compare=False)

    def render(self) -> str:
        if self.kind == "object":
            return f"object {self.name} = {render_expr(self.args[0])}"
        if self.kind == "collection":
            return f"collection {self.name} = {{{', '.join(render_expr(x) for x in self.args[0])}}}"
        src, tgt, entries = self.args
        if len(entries) == 1 and entries[0][:2] == (0, 0):
            body = _render_elem(entries[0][2])
        else:
            body = "[" + "; ".join(f"{j},{k}: {_render_elem(t)}" for j, k, t in entries) + "]"
        return f"map {self.name}: {render_expr(src)} -> {render_expr(tgt)} = {body}"


@dataclass(frozen=True)
class Expect:
    kind: str
    args: tuple
    value: object
    line: int = dfield(default=0, compare=False)

    def render(self) -> str:
        a = " ".join(render_expr(x) if isinstance(x, tuple) else str(x) for x in self.args)
        v = self.value
        if self.kind == "ext":
            v = "{" + ", ".join(f"{k}:{n}" for k, n in sorted(v.items())) + "}"
        elif self.kind == "class":
            v = "(" + ", ".join(map(str, v)) + ")"
        elif isinstance(v, bool):
            v = "true" if v else "false"
        return f"expect {self.kind} {a} = {v}"

    def describe(self) -> str:
        return self.render()[len("expect "):]


@dataclass(frozen=True)
class LedgerBlock:
    name: str
    program: LedgerProgram
    line: int = dfield(default=0, compare=False)


@dataclass
class Scenario:
    field: tuple = ("QQ",)
    cy: Optional[int] = None
    graph: Optional[GraphDecl] = None
    algebra: Optional[str] = None
    decls: list = dfield(default_factory=list)
    expects: list = dfield(default_factory=list)
    ledgers: list = dfield(default_factory=list)
    source: str = dfield(default="", compare=False)

    def field_spec(self) -> FieldSpec:
        return QQ if self.field[0] == "QQ" else FieldSpec.prime(self.field[1])

    def names(self, kind=None) -> list:
        return [d.name for d in self.decls if kind is None or d.kind == kind]

    def render(self) -> str:
        out = ["field QQ" if self.field[0] == "QQ" else f"field GF({self.field[1]})"]
        if self.cy is not None:
            out.append(f"cy {self.cy}")
        if self.graph is not None:
            out += self.graph.render()
        if self.algebra is not None:
            out.append(f"algebra {self.algebra}")
        out += [d.render() for d in self.decls]
        out += [e.render() for e in self.expects]
        for lb in self.ledgers:
            out.append(f"ledger {lb.name} {{")
            out += ["  " + s.render() for s in lb.program.statements]
            out.append("}")
        return "\n".join(out) + "\n"


# -- parser -------------------------------------------------------------------

class _P:
    def __init__(self, toks, line, end_col, sc: Scenario):
        self.toks, self.i, self.line, self.end, self.sc = toks, 0, line, end_col, sc

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ScenarioError(msg, self.line, tok.col if tok else self.end)

    def next(self, kind=None, text=None, what=None) -> Tok:
        t = self.peek()
        if t is None or (kind and t.kind != kind) or (text and t.text != text):
            got = "end of line" if t is None else repr(t.text)
            self.fail(f"expected {what or text or kind}, got {got}", t)
        self.i += 1
        return t

    def accept(self, text) -> bool:
        t = self.peek()
        if t is not None and t.text == text:
            self.i += 1
            return True
        return False

    def done(self):
        if self.peek() is not None:
            self.fail(f"unexpected {self.peek().text!r}")

    def integer(self, what="integer") -> int:
        neg = self.accept("-")
        if not neg:
            self.accept("+")
        return int(self.next("int", what=what).text) * (-1 if neg else 1)

    def vertex(self) -> str:
        t = self.peek()
        if t is None or t.kind not in ("int", "name"):
            self.fail("expected a vertex name")
        self.i += 1
        return t.text

    # object expressions
    def expr(self):
        parts = [self.postfix()]
        while self.accept("+"):
            parts.append(self.postfix())
        return parts[0] if len(parts) == 1 else ("sum", tuple(parts))

    def postfix(self):
        e = self.atom()
        while self.accept("["):
            n = self.integer("shift")
            self.next(text="]")
            e = ("shift", e, n)
        return e

    def atom(self):
        t = self.peek()
        if t is None:
            self.fail("expected an object expression")
        if t.text == "(":
            self.next()
            e = self.expr()
            self.next(text=")")
            return e
        t = self.next("name", what="object expression")
        if t.text == "P" and self.peek() is not None and self.peek().text == "(":
            self.next(text="(")
            vt = self.peek()
            v = self.vertex()
            if self.sc.graph is not None and self.sc.graph.path is None and v not in self.sc.graph.vertices:
                self.fail(f"unknown vertex {v!r}", vt)
            if self.sc.graph is not None and self.sc.graph.path is not None and \
                    not (v.isdigit() and 1 <= int(v) <= self.sc.graph.path):
                self.fail(f"unknown vertex {v!r}", vt)
            self.next(text=")")
            return ("proj", v)
        if t.text == "zero":
            return ("zero",)
        if t.text == "cone":
            self.next(text="(")
            m = self.next("name", what="map name")
            if m.text not in self.sc.names("map"):
                self.fail(f"unknown map {m.text!r}", m)
            self.next(text=")")
            return ("cone", m.text)
        if t.text in ("twist", "twist_inv"):
            self.next(text="(")
            a = self.expr()
            self.next(text=",")
            b = self.expr()
            self.next(text=")")
            return (t.text, a, b)
        if t.text == "scramble":
            self.next(text="(")
            a = self.expr()
            self.next(text=",")
            s = self.integer("seed")
            self.next(text=")")
            return ("scramble", a, s)
        if t.text not in self.sc.names("object"):
            self.fail(f"unknown object {t.text!r}", t)
        return ("ref", t.text)

    def elem(self):
        terms = []
        sign = -1 if self.accept("-") else 1
        while True:
            c = Fraction(1)
            t = self.peek()
            if t is not None and t.kind == "int":
                c = Fraction(int(self.next().text))
                if self.accept("/"):
                    c /= int(self.next("int", what="denominator").text)
                self.next(text="*")
            name = self.next("name", what="basis element name").text
            terms.append((sign * c, name))
            t = self.peek()
            if t is None or t.text not in "+-" or t.kind != "punct":
                return tuple(terms)
            self.next()
            sign = -1 if t.text == "-" else 1


def parse_scenario(text: str) -> Scenario:
    sc = Scenario(source=text)
    lines = text.splitlines()
    i = 0
    seen = set()
    while i < len(lines):
        lineno = i + 1
        raw = lines[i]
        toks = _tokens(raw, lineno)
        i += 1
        if not toks:
            continue
        p = _P(toks, lineno, len(raw) + 1, sc)
        kw = p.next("name", what="keyword")
        if kw.text not in KEYWORDS:
            p.fail(f"unknown keyword {kw.text!r}; expected one of {', '.join(KEYWORDS)}", kw)
        k = kw.text
        if k in ("field", "cy", "graph", "algebra"):
            if k in seen:
                p.fail(f"{k} declared twice (one file is one algebra context)", kw)
            seen.add(k)
        if k == "field":
            t = p.next("name", what="QQ or GF(p)")
            if t.text == "QQ":
                sc.field = ("QQ",)
            elif t.text == "GF":
                p.next(text="(")
                pt = p.peek()
                q = int(p.next("int", what="prime").text)
                try:
                    FieldSpec.prime(q)
                except ValueError as exc:
                    p.fail(str(exc), pt)
                p.next(text=")")
                sc.field = ("GF", q)
            else:
                p.fail("expected QQ or GF(p)", t)
            p.done()
        elif k == "cy":
            t = p.peek()
            sc.cy = p.integer("Calabi-Yau dimension")
            if sc.cy < 2:
                p.fail("cy must be at least 2", t)
            p.done()
        elif k == "graph":
            name = p.next("name", what="graph name").text
            if p.accept("path"):
                n = int(p.next("int", what="number of vertices").text)
                if n < 1:
                    p.fail("path needs at least one vertex")
                p.done()
                sc.graph = GraphDecl(name, path=n)
            else:
                p.next(text="{")
                p.done()
                verts, edges = [], []
                while True:
                    if i >= len(lines):
                        raise ScenarioError("unterminated graph block", lineno, len(raw) + 1)
                    ln = i + 1
                    sub = _tokens(lines[i], ln)
                    i += 1
                    if not sub:
                        continue
                    q = _P(sub, ln, len(lines[ln - 1]) + 1, sc)
                    if q.accept("}"):
                        q.done()
                        break
                    w = q.next("name", what="vertices or edge").text
                    if w == "vertices":
                        while q.peek() is not None:
                            verts.append(q.vertex())
                    elif w == "edge":
                        at = q.peek()
                        a, b = q.vertex(), q.vertex()
                        for v in (a, b):
                            if v not in verts:
                                q.fail(f"unknown vertex {v!r}", at)
                        x = y = None
                        if q.accept("degrees"):
                            x = int(q.next("int").text)
                            y = int(q.next("int").text)
                        q.done()
                        edges.append((a, b, x, y))
                    else:
                        q.fail(f"expected vertices or edge, got {w!r}", sub[0])
                sc.graph = GraphDecl(name, None, tuple(verts), tuple(edges))
        elif k == "algebra":
            t = p.next("name", what="algebra kind")
            if t.text != "zigzag":
                p.fail(f"unknown algebra kind {t.text!r}; only zigzag is supported", t)
            if sc.graph is None:
                p.fail("algebra needs a graph declared above it", t)
            p.done()
            sc.algebra = "zigzag"
        elif k in ("object", "map", "collection"):
            if sc.algebra is None:
                p.fail(f"{k} needs an algebra declared above it", kw)
            nt = p.next("name", what=f"{k} name")
            if nt.text in sc.names() or nt.text in ("P", "zero", "cone", "twist", "twist_inv", "scramble"):
                p.fail(f"name {nt.text!r} is already used", nt)
            if k == "object":
                p.next(text="=")
                sc.decls.append(Decl("object", nt.text, (p.expr(),), lineno))
            elif k == "collection":
                p.next(text="=")
                p.next(text="{")
                items = [p.expr()]
                while p.accept(","):
                    items.append(p.expr())
                p.next(text="}")
                sc.decls.append(Decl("collection", nt.text, (tuple(items),), lineno))
            else:
                p.next(text=":")
                src = p.expr()
                p.next("arrow", what="'->'")
                tgt = p.expr()
                p.next(text="=")
                if p.accept("["):
                    entries = []
                    while True:
                        j = int(p.next("int", what="row index").text)
                        p.next(text=",")
                        kk = int(p.next("int", what="column index").text)
                        p.next(text=":")
                        entries.append((j, kk, p.elem()))
                        if not p.accept(";"):
                            break
                    p.next(text="]")
                else:
                    entries = [(0, 0, p.elem())]
                sc.decls.append(Decl("map", nt.text, (src, tgt, tuple(entries)), lineno))
            p.done()
        elif k == "expect":
            sc.expects.append(_parse_expect(p, lineno))
        elif k == "ledger":
            name = p.next("name", what="ledger name").text
            p.next(text="{")
            p.done()
            body, start = [], i + 1
            while True:
                if i >= len(lines):
                    raise ScenarioError("unterminated ledger block", lineno, len(raw) + 1)
                if lines[i].strip() == "}":
                    i += 1
                    break
                body.append(lines[i])
                i += 1
            try:
                prog = parse_ledger("\n".join(body), first_line=start)
            except LedgerSyntaxError as exc:
                raise ScenarioError(exc.msg, exc.line, exc.col) from None
            sc.ledgers.append(LedgerBlock(name, prog, lineno))
    if sc.decls and sc.cy is None:
        raise ScenarioError("missing cy declaration", 1, 1)
    return sc


def _parse_expect(p: _P, lineno: int) -> Expect:
    kt = p.next("name", what="expectation kind")
    k = kt.text
    if k not in EXPECT_KINDS:
        p.fail(f"unknown expectation {k!r}; expected one of {', '.join(EXPECT_KINDS)}", kt)
    if k == "ledger":
        name = p.next("name", what="ledger name").text
        p.next(text="=")
        ok = p.next("name", what="ok").text
        if ok != "ok":
            p.fail("ledger expectations read `= ok`")
        p.done()
        return Expect(k, (name,), "ok", lineno)
    if k in ("strongly_spherical",):
        ct = p.next("name", what="collection name")
        if ct.text not in p.sc.names("collection"):
            p.fail(f"unknown collection {ct.text!r}", ct)
        args = (ct.text,)
    elif k in ("spherical", "summands", "class"):
        args = (p.expr(),)
    else:
        args = (p.expr(), p.expr())
    p.next(text="=")
    if k == "ext":
        p.next(text="{")
        v = {}
        if not p.accept("}"):
            while True:
                deg = p.integer("degree")
                p.next(text=":")
                v[deg] = int(p.next("int", what="dimension").text)
                if not p.accept(","):
                    break
            p.next(text="}")
    elif k == "commute":
        t = p.next("name", what="verdict")
        if t.text not in VERDICTS:
            p.fail(f"unknown verdict {t.text!r}", t)
        v = t.text
    elif k == "summands":
        v = int(p.next("int", what="count").text)
    elif k == "class":
        p.next(text="(")
        v = [p.integer("coordinate")]
        while p.accept(","):
            v.append(p.integer("coordinate"))
        p.next(text=")")
        v = tuple(v)
    else:
        t = p.next("name", what="true or false")
        if t.text not in ("true", "false"):
            p.fail("expected true or false", t)
        v = t.text == "true"
    p.done()
    return Expect(k, args, v, lineno)


# -- evaluation ---------------------------------------------------------------

class Context:
    """Evaluated scenario: the algebra plus memoised objects and maps."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        if sc.algebra is None:
            raise ScenarioError("scenario declares no algebra")
        try:
            self.algebra = build_zigzag(sc.graph.spec(sc.cy), sc.field_spec(), sc.cy)
        except AlgebraError as exc:
            raise ScenarioError(str(exc), self._line("graph")) from None
        self.decls = {d.name: d for d in sc.decls}
        self._objects: dict = {}
        self._maps: dict = {}

    def _line(self, kw):
        for n, ln in enumerate(self.sc.source.splitlines(), 1):
            if ln.strip().startswith(kw):
                return n
        return None

    def object(self, name: str):
        if name not in self._objects:
            d = self.decls.get(name)
            if d is None or d.kind != "object":
                raise ScenarioError(f"unknown object {name!r}")
            try:
                self._objects[name] = self.eval(d.args[0])
            except ComplexError as exc:
                raise ScenarioError(f"object {name}: {exc}", d.line) from None
        return self._objects[name]

    def map(self, name: str) -> ChainMap:
        if name not in self._maps:
            d = self.decls[name]
            src, tgt = self.eval(d.args[0]), self.eval(d.args[1])
            A = self.algebra
            mat = {}
            for j, k, terms in d.args[2]:
                if j >= len(tgt.summands) or k >= len(src.summands):
                    raise ScenarioError(f"map {name}: entry ({j},{k}) is outside the matrix", d.line)
                el = {}
                for c, b in terms:
                    if b not in A.index:
                        raise ScenarioError(f"map {name}: unknown basis element {b!r}", d.line)
                    el[A.index[b]] = el.get(A.index[b], 0) + A.field(c)
                el = {i: c for i, c in el.items() if c}
                if el:
                    mat[(j, k)] = el
            try:
                self._maps[name] = ChainMap(src, tgt, 0, mat)
            except ComplexError as exc:
                raise ScenarioError(f"map {name}: {exc}", d.line) from None
        return self._maps[name]

    def collection(self, name: str):
        from .twists import SphericalCollection

        d = self.decls[name]
        objs = [self.eval(e) for e in d.args[0]]
        return SphericalCollection(objs, self.sc.cy, [render_expr(e) for e in d.args[0]])

    def eval(self, e):
        from .decompose import scramble
        from .twists import inverse_twist, twist

        k = e[0]
        if k == "proj":
            return projective(self.algebra, e[1])
        if k == "ref":
            return self.object(e[1])
        if k == "zero":
            return zero_complex(self.algebra)
        if k == "shift":
            return shift(self.eval(e[1]), e[2])
        if k == "sum":
            return direct_sum([self.eval(x) for x in e[1]], self.algebra)
        if k == "cone":
            return cone(self.map(e[1]))
        if k == "twist":
            return twist(self.eval(e[1]), self.eval(e[2]))
        if k == "twist_inv":
            return inverse_twist(self.eval(e[1]), self.eval(e[2]))
        if k == "scramble":
            return scramble(self.eval(e[1]), e[2])
        raise ScenarioError(f"bad expression {e!r}")

    def resolve(self, text: str):
        """Evaluate an object expression given on the command line."""
        p = _P(_tokens(text, 0), 0, len(text) + 1, self.sc)
        try:
            e = p.expr()
            p.done()
        except ScenarioError as exc:
            raise ScenarioError(f"in {text!r}: {exc.msg}") from None
        return self.eval(e)


def load(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
