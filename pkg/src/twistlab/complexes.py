"""Twisted complexes over a graded algebra.

A twisted complex is a formal direct sum of shifted projectives
``P_v[s]`` with a square-zero differential whose entries are algebra
elements.  Entry ``(j, k)`` of a degree-``m`` map ``X -> Y`` sends summand
``k`` of ``X`` to summand ``j`` of ``Y`` and is homogeneous of degree
``t_j - s_k + m``; the differential is the degree-1 case with ``X = Y``.

Hom complexes use ``D(f) = dY f - (-1)^m f dX``.
"""

from __future__ import annotations

import contextvars
import random
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

from . import kernels
from .algebra import AlgebraSpec
from .linalg import DEFAULT_PRIME, Matrix, ModInt, kernel_basis, rank_of_rows, span_complement

_MAX_SHIFT = contextvars.ContextVar("twistlab_max_shift", default=16)


class ComplexError(ValueError):
    pass


class WindowError(ComplexError):
    """An object left the bounded shift window."""


def set_max_shift(w: int):
    """Set the boundedness window for the current context; returns a reset token."""
    return _MAX_SHIFT.set(w)


def reset_max_shift(token) -> None:
    _MAX_SHIFT.reset(token)


def max_shift() -> int:
    return _MAX_SHIFT.get()


# -- sparse matrices of algebra elements ----------------------------------

def _freeze(mat: dict) -> tuple:
    return tuple(sorted((jk, tuple(sorted(e.items()))) for jk, e in mat.items() if e))


def mat_mul(alg: AlgebraSpec, g: dict, f: dict) -> dict:
    """Composite ``g . f`` of sparse algebra matrices."""
    by_row: dict = {}
    for (l, k), e in f.items():
        by_row.setdefault(l, []).append((k, e))
    out: dict = {}
    for (j, l), ge in g.items():
        for k, fe in by_row.get(l, ()):
            prod = alg.mul(ge, fe)
            if not prod:
                continue
            cur = out.get((j, k))
            if cur is None:
                out[(j, k)] = prod
            else:
                _add_into(cur, prod, 1)
                if not cur:
                    del out[(j, k)]
    return out


def _add_into(acc: dict, e: dict, c) -> None:
    for b, v in e.items():
        nv = acc.get(b, 0) + c * v
        if nv:
            acc[b] = nv
        else:
            acc.pop(b, None)


def mat_add(a: dict, b: dict, cb=1) -> dict:
    out = {jk: dict(e) for jk, e in a.items()}
    for jk, e in b.items():
        cur = out.setdefault(jk, {})
        _add_into(cur, e, cb)
        if not cur:
            del out[jk]
    return out


def mat_scale(a: dict, c) -> dict:
    if not c:
        return {}
    return {jk: {b: c * v for b, v in e.items()} for jk, e in a.items() if e}


def mat_identity(alg: AlgebraSpec, summands: Sequence) -> dict:
    one = alg.field.one
    return {(i, i): {alg.idempotent_index[v]: one} for i, (v, _) in enumerate(summands)}


# -- objects and maps -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwistedComplex:
    algebra: AlgebraSpec
    summands: tuple  # of (vertex, shift)
    differential: dict  # (j, k) -> element; treat as read-only

    def __post_init__(self):
        object.__setattr__(self, "summands", tuple((v, int(s)) for v, s in self.summands))
        object.__setattr__(self, "differential",
                           {jk: dict(e) for jk, e in self.differential.items() if e})

    @cached_property
    def _key(self):
        return (self.summands, _freeze(self.differential))

    def __eq__(self, other):
        return (isinstance(other, TwistedComplex) and self.algebra is other.algebra
                and self._key == other._key)

    def __hash__(self):
        return hash(self._key)

    def __len__(self):
        return len(self.summands)

    @property
    def is_zero(self) -> bool:
        return not self.summands

    def summand_multiset(self) -> Counter:
        return Counter(self.summands)

    def check(self) -> None:
        """Raise ComplexError unless the entry constraints and d^2 = 0 hold."""
        _check_entries(self.algebra, self.summands, self.summands, self.differential, 1, "differential")
        sq = mat_mul(self.algebra, self.differential, self.differential)
        if sq:
            raise ComplexError(f"differential does not square to zero: {sorted(sq)}")

    def check_window(self, window: int | None = None) -> None:
        w = max_shift() if window is None else window
        for v, s in self.summands:
            if abs(s) > w:
                raise WindowError(f"summand P{v}[{s}] is outside the shift window +-{w}")

    def describe(self) -> str:
        if not self.summands:
            return "0"
        parts = [f"P{v}[{s}]" if s else f"P{v}" for v, s in self.summands]
        return " + ".join(parts) + ("" if not self.differential else
                                    f"  (d: {len(self.differential)} entries)")

    def __repr__(self):
        return f"TwistedComplex({self.describe()})"


def _check_entries(alg, src, tgt, mat, degree, what):
    for (j, k), e in mat.items():
        if not (0 <= j < len(tgt) and 0 <= k < len(src)):
            raise ComplexError(f"{what} entry ({j},{k}) out of range")
        want = tgt[j][1] - src[k][1] + degree
        for b in e:
            be = alg.basis[b]
            if be.degree != want or be.source != src[k][0] or be.target != tgt[j][0]:
                raise ComplexError(
                    f"{what} entry ({j},{k}) contains {be.name} "
                    f"(P{be.source}->P{be.target}, degree {be.degree}); expected "
                    f"P{src[k][0]}->P{tgt[j][0]} of degree {want}")


def make_complex(algebra: AlgebraSpec, summands: Iterable, differential: dict | None = None,
                 check: bool = True) -> TwistedComplex:
    x = TwistedComplex(algebra, tuple(summands), differential or {})
    if check:
        x.check()
    return x


def zero_complex(algebra: AlgebraSpec) -> TwistedComplex:
    return TwistedComplex(algebra, (), {})


@dataclass(frozen=True, eq=False)
class ChainMap:
    source: TwistedComplex
    target: TwistedComplex
    degree: int
    matrix: dict

    def __post_init__(self):
        object.__setattr__(self, "matrix", {jk: dict(e) for jk, e in self.matrix.items() if e})
        _check_entries(self.source.algebra, self.source.summands, self.target.summands,
                       self.matrix, self.degree, "map")

    def differential(self) -> dict:
        """``D(f) = dY f - (-1)^m f dX`` as a sparse matrix."""
        alg = self.source.algebra
        left = mat_mul(alg, self.target.differential, self.matrix)
        right = mat_mul(alg, self.matrix, self.source.differential)
        sign = -1 if self.degree % 2 == 0 else 1
        return mat_add(left, right, sign)

    @property
    def is_closed(self) -> bool:
        return not self.differential()

    @property
    def is_zero(self) -> bool:
        return not self.matrix

    def __repr__(self):
        return f"ChainMap({self.source.describe()} -> {self.target.describe()}, deg {self.degree})"


def identity_map(x: TwistedComplex) -> ChainMap:
    return ChainMap(x, x, 0, mat_identity(x.algebra, x.summands))


def compose(g: ChainMap, f: ChainMap) -> ChainMap:
    if f.target != g.source:
        raise ComplexError("maps are not composable")
    return ChainMap(f.source, g.target, f.degree + g.degree,
                    mat_mul(f.source.algebra, g.matrix, f.matrix))


# -- hom complexes ----------------------------------------------------------

class HomComplex:
    """Graded morphism space Hom(x, y) with its differential, per degree."""

    def __init__(self, x: TwistedComplex, y: TwistedComplex):
        if x.algebra is not y.algebra:
            raise ComplexError("objects live over different algebras")
        self.x, self.y = x, y
        self.alg = x.algebra
        self._bases: dict = {}
        self._dmat: dict = {}
        self._kernel: dict = {}
        self._rank: dict = {}

    @cached_property
    def degree_range(self) -> range:
        if not self.x.summands or not self.y.summands:
            return range(0)
        diffs = [s - t for _, s in self.x.summands for _, t in self.y.summands]
        return range(min(diffs), max(diffs) + self.alg.max_degree + 1)

    def basis(self, m: int) -> list:
        """Admissible (j, k, basis index) triples of degree m."""
        if m not in self._bases:
            out = []
            for j, (w, t) in enumerate(self.y.summands):
                for k, (v, s) in enumerate(self.x.summands):
                    for b in self.alg.hom_basis(v, w, t - s + m):
                        out.append((j, k, b))
            self._bases[m] = out
        return self._bases[m]

    def vector_to_matrix(self, m: int, vec: Sequence) -> dict:
        out: dict = {}
        for (j, k, b), c in zip(self.basis(m), vec):
            if c:
                out.setdefault((j, k), {})[b] = c
        return out

    def matrix_to_vector(self, m: int, mat: dict) -> list:
        z = self.alg.field.zero
        return [mat.get((j, k), {}).get(b, z) for (j, k, b) in self.basis(m)]

    def to_map(self, m: int, vec: Sequence) -> ChainMap:
        return ChainMap(self.x, self.y, m, self.vector_to_matrix(m, vec))

    def d_rows(self, m: int) -> list[list]:
        """Matrix of D: Hom^m -> Hom^{m+1} as rows (target coordinates)."""
        if m in self._dmat:
            return self._dmat[m]
        alg = self.alg
        src = self.basis(m)
        tgt = self.basis(m + 1)
        tindex = {t: i for i, t in enumerate(tgt)}
        zero = alg.field.zero
        cols = []
        dy_by_col: dict = {}
        for (i, j), e in self.y.differential.items():
            dy_by_col.setdefault(j, []).append((i, e))
        dx_by_row: dict = {}
        for (k, l), e in self.x.differential.items():
            dx_by_row.setdefault(k, []).append((l, e))
        sign = -1 if m % 2 == 0 else 1
        for (j, k, b) in src:
            col = {}
            be = {b: 1}
            for i, e in dy_by_col.get(j, ()):
                for bb, c in alg.mul(e, be).items():
                    key = tindex[(i, k, bb)]
                    col[key] = col.get(key, 0) + c
            for l, e in dx_by_row.get(k, ()):
                for bb, c in alg.mul(be, e).items():
                    key = tindex[(j, l, bb)]
                    col[key] = col.get(key, 0) + sign * c
            cols.append(col)
        rows = [[zero] * len(src) for _ in tgt]
        F = alg.field
        for ci, col in enumerate(cols):
            for ri, c in col.items():
                if c:
                    rows[ri][ci] = F(c)
        self._dmat[m] = rows
        return rows

    def d_matrix(self, m: int) -> Matrix:
        return Matrix.from_rows(self.d_rows(m), self.alg.field, len(self.basis(m)))

    def rank_d(self, m: int) -> int:
        if m not in self._rank:
            if not self.basis(m) or not self.basis(m + 1):
                self._rank[m] = 0
            else:
                self._rank[m] = rank_of_rows(self.d_rows(m), self.alg.field)
        return self._rank[m]

    def cocycles(self, m: int) -> list[list]:
        if m not in self._kernel:
            n = len(self.basis(m))
            if not self.basis(m + 1):
                F = self.alg.field
                self._kernel[m] = [[F.one if i == j else F.zero for i in range(n)] for j in range(n)]
            else:
                self._kernel[m] = kernel_basis(self.d_matrix(m))
        return self._kernel[m]

    def coboundaries(self, m: int) -> list[list]:
        """Spanning set (columns of D_{m-1}) of the image in degree m."""
        prev = self.basis(m - 1)
        if not prev or not self.basis(m):
            return []
        rows = self.d_rows(m - 1)
        return [[rows[i][c] for i in range(len(rows))] for c in range(len(prev))]

    def homology_dim(self, m: int) -> int:
        n = len(self.basis(m))
        if n == 0:
            return 0
        return n - self.rank_d(m) - self.rank_d(m - 1)

    def homology_basis(self, m: int) -> list[list]:
        """Cocycle vectors whose classes form a basis of H^m."""
        if self.homology_dim(m) == 0:
            return []
        bnd = [v for v in self.coboundaries(m) if any(v)]
        return span_complement(bnd, self.cocycles(m), self.alg.field)

    def ext_table(self) -> "ExtTable":
        return ExtTable({m: h for m in self.degree_range if (h := self.homology_dim(m))})


class ExtTable(dict):
    """Mapping i -> dim Hom(X, Y[i]), nonzero entries only."""

    @property
    def total(self) -> int:
        return sum(self.values())

    def euler(self) -> int:
        return sum((-1) ** i * v for i, v in self.items())

    def __repr__(self):
        return "{" + ", ".join(f"{k}: {v}" for k, v in sorted(self.items())) + "}"


_HOM_CACHE: dict = {}


def hom_complex(x: TwistedComplex, y: TwistedComplex) -> HomComplex:
    key = (id(x.algebra), id(y.algebra), x._key, y._key)
    h = _HOM_CACHE.get(key)
    if h is None or h.x.algebra is not x.algebra or h.y.algebra is not y.algebra:
        if len(_HOM_CACHE) > 4096:
            _HOM_CACHE.clear()
        h = _HOM_CACHE[key] = HomComplex(x, y)
    return h


def ext_table(x: TwistedComplex, y: TwistedComplex) -> ExtTable:
    return hom_complex(x, y).ext_table()


# -- constructions ------------------------------------------------------------

def shift(x: TwistedComplex, n: int) -> TwistedComplex:
    summands = tuple((v, s + n) for v, s in x.summands)
    diff = x.differential if n % 2 == 0 else mat_scale(x.differential, -1)
    out = TwistedComplex(x.algebra, summands, diff)
    out.check_window()
    return out


def shift_map(f: ChainMap, n: int) -> ChainMap:
    """The map f[n] between shifted objects (entries unchanged)."""
    return ChainMap(shift(f.source, n), shift(f.target, n), f.degree, f.matrix)


def direct_sum(xs: Sequence[TwistedComplex], algebra: AlgebraSpec | None = None) -> TwistedComplex:
    if not xs:
        if algebra is None:
            raise ComplexError("direct sum of nothing needs an explicit algebra")
        return zero_complex(algebra)
    alg = xs[0].algebra
    if any(x.algebra is not alg for x in xs):
        raise ComplexError("direct sum across different algebras")
    summands, diff, off = [], {}, 0
    for x in xs:
        summands.extend(x.summands)
        for (j, k), e in x.differential.items():
            diff[(j + off, k + off)] = e
        off += len(x.summands)
    return TwistedComplex(alg, tuple(summands), diff)


def cone(f: ChainMap, check_closed: bool = True) -> TwistedComplex:
    """Cone with differential [[-dX, 0], [f, dY]] on X[1] + Y."""
    if f.degree != 0:
        raise ComplexError(f"cone needs a degree-0 map, got degree {f.degree}")
    if check_closed and not f.is_closed:
        raise ComplexError("cone of a non-closed map")
    x, y = f.source, f.target
    n = len(x.summands)
    summands = tuple((v, s + 1) for v, s in x.summands) + y.summands
    diff = {}
    for (j, k), e in x.differential.items():
        diff[(j, k)] = {b: -c for b, c in e.items()}
    for (j, k), e in y.differential.items():
        diff[(j + n, k + n)] = e
    for (j, k), e in f.matrix.items():
        diff[(j + n, k)] = e
    out = TwistedComplex(x.algebra, summands, diff)
    out.check_window()
    return out


def projective(algebra: AlgebraSpec, v: str, s: int = 0) -> TwistedComplex:
    if v not in algebra.idempotents:
        raise ComplexError(f"unknown vertex {v!r}")
    out = TwistedComplex(algebra, ((v, s),), {})
    out.check_window()
    return out


# -- minimal models -----------------------------------------------------------

def _unit_entry(x: TwistedComplex):
    for (j, k), e in sorted(x.differential.items()):
        if x.summands[j][1] == x.summands[k][1] - 1 and x.summands[j][0] == x.summands[k][0]:
            if e:
                return j, k, next(iter(e.values()))
    return None


def minimize(x: TwistedComplex) -> TwistedComplex:
    """Gaussian elimination of unit (degree-0) entries of the differential."""
    alg = x.algebra
    cur = x
    while True:
        hit = _unit_entry(cur)
        if hit is None:
            return cur
        j, k, c = hit
        inv = alg.field.one / c
        d = cur.differential
        col_k = {a: e for (a, kk), e in d.items() if kk == k and a not in (j, k)}
        row_j = {b: e for (jj, b), e in d.items() if jj == j and b not in (j, k)}
        keep = [i for i in range(len(cur.summands)) if i not in (j, k)]
        pos = {old: new for new, old in enumerate(keep)}
        nd: dict = {}
        for (a, b), e in d.items():
            if a in pos and b in pos:
                nd[(pos[a], pos[b])] = dict(e)
        for a, ea in col_k.items():
            for b, eb in row_j.items():
                corr = alg.mul(ea, eb)
                if corr:
                    key = (pos[a], pos[b])
                    acc = nd.setdefault(key, {})
                    _add_into(acc, corr, -inv)
                    if not acc:
                        del nd[key]
        cur = TwistedComplex(alg, tuple(cur.summands[i] for i in keep), nd)


def is_minimal(x: TwistedComplex) -> bool:
    return _unit_entry(x) is None


# -- isomorphism --------------------------------------------------------------

def _degree0_blocks(alg, src, tgt, mat):
    """Scalar degree-0 blocks of a degree-0 map, keyed by (vertex, shift) class."""
    classes = sorted(set(src) | set(tgt))
    blocks = {}
    for cls in classes:
        rows = [j for j, st in enumerate(tgt) if st == cls]
        cols = [k for k, st in enumerate(src) if st == cls]
        e = alg.idempotent_index[cls[0]]
        z = alg.field.zero
        blocks[cls] = (rows, cols,
                       [[mat.get((j, k), {}).get(e, z) for k in cols] for j in rows])
    return blocks


def _invert_block(block, F):
    n = len(block)
    m = Matrix.from_rows(block, F, n) if n else None
    if n == 0:
        return []
    from .linalg import inverse
    inv = inverse(m)
    return None if inv is None else inv.to_rows()


def invert_degree0(f: ChainMap) -> Optional[ChainMap]:
    """Exact inverse of a degree-0 map whose scalar part is invertible, else None.

    The non-scalar remainder is nilpotent, so the Neumann series terminates.
    """
    alg = f.source.algebra
    F = alg.field
    src, tgt = f.source.summands, f.target.summands
    if Counter(src) != Counter(tgt):
        return None
    g0: dict = {}
    for cls, (rows, cols, block) in _degree0_blocks(alg, src, tgt, f.matrix).items():
        inv = _invert_block(block, F)
        if inv is None:
            return None
        e = alg.idempotent_index[cls[0]]
        # inverse maps target summands (rows) back to source summands (cols)
        for a, k in enumerate(cols):
            for b, j in enumerate(rows):
                if inv[a][b]:
                    g0[(k, j)] = {e: inv[a][b]}
    ident_src = mat_identity(alg, src)
    # g = sum_k (1 - g0 f)^k g0
    r = mat_add(ident_src, mat_mul(alg, g0, f.matrix), -1)
    term = g0
    g = dict(g0)
    for _ in range(4 * (alg.max_degree + 2) * (len(src) + 1) + 8):
        term = mat_mul(alg, r, term)
        if not term:
            break
        g = mat_add(g, term)
    else:
        raise ComplexError("Neumann series did not terminate")
    return ChainMap(f.target, f.source, 0, g)


@dataclass
class IsoResult:
    isomorphic: bool
    witness: Optional[ChainMap] = None
    inverse: Optional[ChainMap] = None
    reason: str = ""
    seed: int = 0

    def __bool__(self):
        return self.isomorphic


def _rand_coeffs(rng, n, F):
    if F.is_prime:
        return [F(rng.randrange(1, F.characteristic)) for _ in range(n)]
    return [F(rng.randrange(-50, 51) or 1) for _ in range(n)]


def _blocks_invertible_modp(blocks, p):
    for rows, cols, block in blocks.values():
        n = len(rows)
        if n != len(cols):
            return False
        if n == 0:
            continue
        try:
            ints = [[int(x) if isinstance(x, ModInt) else
                     (x.numerator * pow(x.denominator, -1, p)) % p for x in r] for r in block]
        except ValueError:
            return None
        if len(kernels.rref_mod_p(ints, n, p, False)[2]) < n:
            return False
    return True


def verify_isomorphism(f: ChainMap, g: ChainMap) -> bool:
    """Exact check that f and g are closed, degree 0, and mutually inverse."""
    if f.degree or g.degree or not f.is_closed or not g.is_closed:
        return False
    alg = f.source.algebra
    return (mat_mul(alg, g.matrix, f.matrix) == mat_identity(alg, f.source.summands)
            and mat_mul(alg, f.matrix, g.matrix) == mat_identity(alg, f.target.summands))


def is_isomorphic(x: TwistedComplex, y: TwistedComplex, seed: int = 0,
                  trials: int = 4) -> IsoResult:
    """Decide x ~= y in the homotopy category (minimal models compared)."""
    if x.algebra is not y.algebra:
        raise ComplexError("objects live over different algebras")
    mx, my = minimize(x), minimize(y)
    if mx.summand_multiset() != my.summand_multiset():
        return IsoResult(False, reason="summand multisets differ", seed=seed)
    if mx.is_zero:
        return IsoResult(True, ChainMap(mx, my, 0, {}), ChainMap(my, mx, 0, {}),
                         reason="both contractible", seed=seed)
    if mx == my:
        ident = identity_map(mx)
        return IsoResult(True, ident, ident, reason="identical minimal models", seed=seed)
    h = hom_complex(mx, my)
    Z = h.cocycles(0)
    if not Z:
        return IsoResult(False, reason="no closed degree-0 maps", seed=seed)
    alg = x.algebra
    F = alg.field
    p = F.characteristic if F.is_prime else DEFAULT_PRIME
    rng = random.Random(seed)
    for _ in range(trials):
        coeffs = _rand_coeffs(rng, len(Z), F)
        vec = [sum((c * z[i] for c, z in zip(coeffs, Z) if z[i]), F.zero) for i in range(len(Z[0]))]
        mat = h.vector_to_matrix(0, vec)
        blocks = _degree0_blocks(alg, mx.summands, my.summands, mat)
        ok = _blocks_invertible_modp(blocks, p)
        if ok is False:
            continue
        f = ChainMap(mx, my, 0, mat)
        g = invert_degree0(f)
        if g is not None and verify_isomorphism(f, g):
            return IsoResult(True, f, g, reason="invertible closed map found", seed=seed)
    return IsoResult(False, reason="no invertible closed degree-0 map found", seed=seed)
