"""Line-oriented ledger programs.

::

    params r2 d
    assume d > 2
    entity F EH Ox
    entity Fc = F[1]
    ses S1: F -> EH -> Ox max 3
    fact ext(EH, Ox, i>0) = 0
    fact hom(EH, EH) = r2
    map boundary(hom(F,F) -> ext1(Ox,F)) nonzero
    derive ext1(F,F) - hom(F,F)
    expect ext1(F,F) = d

Statements run in order; ``derive`` and ``expect`` see only the lines
above them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .ledger import (
    ANNOTATIONS,
    LedgerError,
    LedgerProblem,
    LinExpr,
    Predicate,
    Slot,
    derive,
    propagate,
)

KEYWORDS = ("params", "assume", "entity", "ses", "fact", "map", "derive", "expect")
COMPARISONS = (">=", "<=", ">", "<", "=")


class LedgerSyntaxError(LedgerError):
    def __init__(self, msg, line, col):
        ValueError.__init__(self, f"{line}:{col}: {msg}")
        self.line, self.col, self.msg = line, col, msg


_TOKEN = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#.*)
  | (?P<string>"[^"]*")
  | (?P<arrow>->)
  | (?P<cmp>>=|<=|>|<|=)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<punct>[()\[\],:+\-*])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(line_text: str, lineno: int, col0: int = 1) -> list:
    out, pos = [], 0
    while pos < len(line_text):
        m = _TOKEN.match(line_text, pos)
        if not m:
            raise LedgerSyntaxError(f"unexpected character {line_text[pos]!r}", lineno, col0 + pos)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(Tok(kind, m.group(), lineno, col0 + pos))
        pos = m.end()
    return out


class _Cursor:
    def __init__(self, toks, lineno, end_col):
        self.toks, self.i, self.lineno, self.end_col = toks, 0, lineno, end_col

    def peek(self, k=0) -> Optional[Tok]:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        col = tok.col if tok else self.end_col
        raise LedgerSyntaxError(msg, self.lineno, col)

    def next(self, kind=None, text=None, what=None) -> Tok:
        t = self.peek()
        if t is None or (kind and t.kind != kind) or (text and t.text != text):
            want = what or text or kind
            got = "end of line" if t is None else repr(t.text)
            self.fail(f"expected {want}, got {got}", t)
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


# -- statements ---------------------------------------------------------------

@dataclass(frozen=True)
class SlotRef:
    source: str
    target: str
    degree: Optional[int]
    predicates: tuple = ()

    def __str__(self):
        if self.degree is None:
            preds = ", ".join(f"i{p.op}{p.bound}" for p in self.predicates)
            return f"ext({self.source}, {self.target}, {preds})"
        if self.degree == 0:
            return f"hom({self.source}, {self.target})"
        return f"ext{self.degree}({self.source}, {self.target})"

    def slot(self) -> Slot:
        return Slot(self.source, self.target, self.degree)


@dataclass(frozen=True)
class Statement:
    kind: str
    line: int
    args: tuple
    because: Optional[str] = None

    def render(self) -> str:
        k, a = self.kind, self.args
        if k == "params":
            s = "params " + " ".join(a)
        elif k == "assume":
            s = f"assume {a[0]} {a[1]} {_q(a[2])}"
        elif k == "entity":
            s = "entity " + " ".join(a)
        elif k == "alias":
            s = f"entity {a[0]} = {a[1]}[{a[2]}]"
        elif k == "ses":
            s = f"ses {a[0]}: {a[1]} -> {a[2]} -> {a[3]} max {a[4]}"
        elif k == "fact":
            s = f"fact {a[0]} {a[1]} {a[2]}"
        elif k == "map":
            s = f"map {a[0]} -> {a[1]} {a[2]}"
        elif k == "derive":
            s = f"derive {_form(a[0])}"
        elif k == "expect":
            s = f"expect {_form(a[0])} = {a[1]}"
        else:
            raise ValueError(k)
        if self.because:
            s += f' because "{self.because}"'
        return s


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _form(terms) -> str:
    out = ""
    for c, ref in terms:
        mag = abs(c)
        body = str(ref) if mag == 1 else f"{_q(mag)}*{ref}"
        if not out:
            out = ("-" if c < 0 else "") + body
        else:
            out += f" {'-' if c < 0 else '+'} {body}"
    return out


@dataclass
class LedgerProgram:
    statements: list = field(default_factory=list)

    def render(self) -> str:
        return "\n".join(s.render() for s in self.statements) + "\n"

    def __eq__(self, other):
        if not isinstance(other, LedgerProgram):
            return NotImplemented
        strip = lambda p: [(s.kind, s.args, s.because) for s in p.statements]
        return strip(self) == strip(other)


# -- parsing ------------------------------------------------------------------

def _lin(c: _Cursor, stop=()) -> LinExpr:
    out = LinExpr()
    sign = 1
    first = True
    while True:
        t = c.peek()
        if t is not None and t.text in "+-" and t.kind == "punct":
            c.next()
            sign = -1 if t.text == "-" else 1
        elif not first:
            break
        t = c.peek()
        if t is None:
            c.fail("expected a number or parameter")
        if t.kind == "int":
            c.next()
            n = Fraction(int(t.text))
            if c.accept("*"):
                p = c.next("name", what="parameter name")
                out = out + LinExpr.of(p.text) * (sign * n)
            else:
                out = out + sign * n
        elif t.kind == "name":
            c.next()
            out = out + LinExpr.of(t.text) * sign
        else:
            c.fail(f"expected a number or parameter, got {t.text!r}")
        first = False
        sign = 1
        nt = c.peek()
        if nt is None or nt.text not in "+-" or nt.kind != "punct":
            break
    return out


_EXT = re.compile(r"ext(\d+)$")


def _slot(c: _Cursor, allow_predicates: bool) -> SlotRef:
    head = c.next("name", what="hom(...) or ext(...)")
    m = _EXT.match(head.text)
    if head.text == "hom":
        deg = 0
    elif m:
        deg = int(m.group(1))
    elif head.text == "ext":
        deg = None
    else:
        c.fail(f"expected hom(...) or ext(...), got {head.text!r}", head)
    c.next(text="(")
    a = _entity(c)
    c.next(text=",")
    b = _entity(c)
    preds = []
    if deg is None:
        if not allow_predicates:
            c.fail("a degree predicate is only allowed in facts; write extN(A,B)")
        c.next(text=",", what="',' before the degree predicate")
        while True:
            iv = c.next("name", what="degree predicate i>k, i<k or i=k")
            if iv.text != "i":
                c.fail("degree predicates use the variable i", iv)
            op = c.next("cmp", what="comparison").text
            preds.append(Predicate(op, _lin(c)))
            if not c.accept(","):
                break
    c.next(text=")")
    return SlotRef(a, b, deg, tuple(preds))


def _entity(c: _Cursor) -> str:
    t = c.peek()
    if t is not None and t.kind == "int" and t.text == "0":
        c.next()
        return "0"
    return c.next("name", what="entity name").text


def _because(c: _Cursor) -> Optional[str]:
    if c.accept("because"):
        return c.next("string", what="quoted text").text[1:-1]
    return None


def _form_terms(c: _Cursor):
    terms = []
    sign = 1
    if c.peek() is not None and c.peek().text == "-":
        c.next()
        sign = -1
    while True:
        coef = Fraction(1)
        t = c.peek()
        if t is not None and t.kind == "int":
            coef = Fraction(int(c.next().text))
            c.next(text="*")
        terms.append((sign * coef, _slot(c, False)))
        t = c.peek()
        if t is None or t.text not in "+-":
            return tuple(terms)
        c.next()
        sign = -1 if t.text == "-" else 1


def parse_statement(tokens: list, lineno: int, end_col: int) -> Optional[Statement]:
    if not tokens:
        return None
    c = _Cursor(tokens, lineno, end_col)
    kw = c.next("name", what="keyword")
    if kw.text not in KEYWORDS:
        c.fail(f"unknown keyword {kw.text!r}; expected one of {', '.join(KEYWORDS)}", kw)
    k = kw.text
    if k == "params":
        names = []
        while c.peek() is not None:
            names.append(c.next("name", what="parameter name").text)
        if not names:
            c.fail("params needs at least one name")
        st = Statement("params", lineno, tuple(names))
    elif k == "assume":
        name = c.next("name", what="parameter name").text
        op = c.next("cmp", what="comparison").text
        val = _lin(c)
        if not val.is_const:
            c.fail("assume bounds a parameter by a number")
        st = Statement("assume", lineno, (name, op, val.const))
    elif k == "entity":
        first = c.next("name", what="entity name").text
        if c.accept("="):
            base = c.next("name", what="entity name").text
            c.next(text="[")
            sign = -1 if c.accept("-") else 1
            if c.peek() is not None and c.peek().text == "+":
                c.next()
            n = int(c.next("int", what="shift").text) * sign
            c.next(text="]")
            st = Statement("alias", lineno, (first, base, n))
        else:
            names = [first]
            while c.peek() is not None:
                names.append(c.next("name", what="entity name").text)
            st = Statement("entity", lineno, tuple(names))
    elif k == "ses":
        name = c.next("name", what="sequence name").text
        c.next(text=":")
        a = _entity(c)
        c.next("arrow", what="'->'")
        b = _entity(c)
        c.next("arrow", what="'->'")
        q = _entity(c)
        mx = 3
        if c.accept("max"):
            mx = int(c.next("int", what="maximum degree").text)
        st = Statement("ses", lineno, (name, a, b, q, mx))
    elif k == "fact":
        t = c.peek()
        if t is not None and t.kind == "name" and (c.peek(1) is not None and c.peek(1).kind == "cmp"):
            name = c.next().text
            op = c.next("cmp").text
            val = _lin(c)
            if not val.is_const:
                c.fail("a parameter fact bounds it by a number")
            st = Statement("assume", lineno, (name, op, val.const), _because(c))
        else:
            ref = _slot(c, True)
            op = c.next("cmp", what="comparison").text
            if op in (">", "<"):
                c.fail("slot facts use =, >= or <=")
            val = _lin(c)
            st = Statement("fact", lineno, (ref, op, val), _because(c))
    elif k == "map":
        boundary = c.accept("boundary")
        if boundary:
            c.next(text="(")
        src = _slot(c, False)
        c.next("arrow", what="'->'")
        tgt = _slot(c, False)
        if boundary:
            c.next(text=")")
        ann = c.next("name", what="annotation").text
        if ann not in ANNOTATIONS:
            c.fail(f"unknown annotation {ann!r}; expected one of {', '.join(ANNOTATIONS)}",
                   c.toks[c.i - 1])
        st = Statement("map", lineno, (src, tgt, ann), _because(c))
    elif k == "derive":
        st = Statement("derive", lineno, (_form_terms(c),))
    else:
        terms = _form_terms(c)
        c.next("cmp", text="=", what="'='")
        st = Statement("expect", lineno, (terms, _lin(c)))
    c.done()
    return st


def parse_ledger(text: str, first_line: int = 1) -> LedgerProgram:
    prog = LedgerProgram()
    for off, raw in enumerate(text.splitlines()):
        lineno = first_line + off
        st = parse_statement(tokenize(raw, lineno), lineno, len(raw) + 1)
        if st is not None:
            prog.statements.append(st)
    return prog


# -- running ------------------------------------------------------------------

@dataclass
class ExpectResult:
    text: str
    line: int
    expected: str
    actual: str
    ok: bool


@dataclass
class LedgerReport:
    params: list
    derivations: list  # (line, DeriveResult)
    expectations: list
    unbounded: list

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.expectations)

    def as_dict(self):
        return {
            "derivations": [dict(line=ln, **r.as_dict(self.params)) for ln, r in self.derivations],
            "expectations": [{"line": e.line, "expression": e.text, "expected": e.expected,
                              "actual": e.actual, "ok": e.ok} for e in self.expectations],
            "unbounded_slots": self.unbounded,
            "ok": self.ok,
        }

    def format_text(self) -> str:
        lines = []
        width = max([len(r.expression) for _, r in self.derivations] + [10])
        for ln, r in self.derivations:
            lines.append(f"line {ln:<4} {r.expression:<{width}}  = {r.format_value(self.params)}")
            if r.relation:
                lines.append(f"          relation: {r.relation}")
            for t in r.trace:
                lines.append(f"          . {t}")
        for e in self.expectations:
            mark = "ok  " if e.ok else "FAIL"
            lines.append(f"{mark} line {e.line}: {e.text} = {e.expected} (got {e.actual})")
        if self.unbounded:
            lines.append(f"unbounded slots: {', '.join(self.unbounded)}")
        return "\n".join(lines) + "\n"


def _form_dict(terms):
    out: dict = {}
    for c, ref in terms:
        s = ref.slot()
        out[s] = out.get(s, 0) + c
    return out


def run_program(prog: LedgerProgram) -> LedgerReport:
    P = LedgerProblem()
    derivations, expectations = [], []
    sol, version, sol_version = None, 0, -1

    def current():
        nonlocal sol, sol_version
        if sol_version != version:
            sol, sol_version = propagate(P), version
        return sol

    for st in prog.statements:
        k, a, ln = st.kind, st.args, st.line
        if k not in ("derive", "expect"):
            version += 1
        if k == "params":
            for n in a:
                P.add_param(n, ln)
        elif k == "assume":
            P.bound_param(a[0], a[1], a[2], ln,
                          text=f"{a[0]} {a[1]} {_q(a[2])}" + (f" (because {st.because})" if st.because else ""))
        elif k == "entity":
            for n in a:
                P.add_entity(n, ln)
        elif k == "alias":
            P.add_alias(a[0], a[1], a[2], ln)
        elif k == "ses":
            P.add_ses(a[0], a[1], a[2], a[3], a[4], ln)
        elif k == "fact":
            ref, op, val = a
            P.assert_fact(ref.source, ref.target, ref.degree, op, val, ref.predicates, ln,
                          because=st.because, text=f"{ref} {op} {val.format(P.box.names)}")
        elif k == "map":
            P.assert_map(a[0].slot(), a[1].slot(), a[2], ln, because=st.because)
        elif k == "derive":
            r = derive(P, current(), _form_dict(a[0]), _form(a[0]))
            derivations.append((ln, r))
        elif k == "expect":
            r = derive(P, current(), _form_dict(a[0]), _form(a[0]), record=False)
            want = a[1].format(P.box.names)
            got = r.format_value(P.box.names)
            expectations.append(ExpectResult(_form(a[0]), ln, want, got, r.exact and r.value == a[1]))
    final = current() if P.ses else None
    unbounded = [str(s) for s in final.unbounded_slots()] if final else []
    return LedgerReport(list(P.box.names), derivations, expectations, unbounded)


def run_ledger(text: str, first_line: int = 1) -> LedgerReport:
    return run_program(parse_ledger(text, first_line))
