"""Exact linear algebra over the rationals and prime fields.

Scalars are ``fractions.Fraction`` for the rationals and :class:`ModInt`
for a prime field.  Matrices are immutable row-major tuples.  Row
reduction over a prime field is delegated to the compiled kernel in
:mod:`twistlab.kernels` when it is available.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import kernels

DEFAULT_PRIME = 32003


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class ModInt:
    """Element of Z/pZ.  Arithmetic with plain ints is allowed."""

    __slots__ = ("v", "p")

    def __init__(self, v: int, p: int):
        self.p = p
        self.v = v % p

    def _coerce(self, other):
        if isinstance(other, ModInt):
            if other.p != self.p:
                raise ValueError("mixing different prime fields")
            return other.v
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModInt(self.v + o, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModInt(self.v - o, self.p)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModInt(o - self.v, self.p)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModInt(self.v * o, self.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if o % self.p == 0:
            raise ZeroDivisionError("division by zero in prime field")
        return ModInt(self.v * pow(o, -1, self.p), self.p)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return ModInt(o * pow(self.v, -1, self.p), self.p)

    def __neg__(self):
        return ModInt(-self.v, self.p)

    def __pos__(self):
        return self

    def __eq__(self, other):
        if isinstance(other, ModInt):
            return self.p == other.p and self.v == other.v
        if isinstance(other, int):
            return (self.v - other) % self.p == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.v, self.p))

    def __bool__(self):
        return self.v != 0

    def __int__(self):
        return self.v

    def __repr__(self):
        return f"{self.v} (mod {self.p})"

    def __str__(self):
        return str(self.v)


@dataclass(frozen=True)
class FieldSpec:
    """Either the rationals (``characteristic=None``) or F_p."""

    kind: str = "rationals"
    characteristic: Optional[int] = None

    def __post_init__(self):
        if self.kind == "rationals":
            if self.characteristic is not None:
                raise ValueError("the rationals have no characteristic to set")
        elif self.kind == "prime-field":
            if self.characteristic is None or not _is_prime(self.characteristic):
                raise ValueError(f"characteristic must be prime, got {self.characteristic}")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls("rationals")

    @classmethod
    def prime(cls, p: int = DEFAULT_PRIME) -> "FieldSpec":
        return cls("prime-field", p)

    @property
    def is_prime(self) -> bool:
        return self.kind == "prime-field"

    def __call__(self, x):
        """Coerce ``x`` (int, Fraction, str "p/q", ModInt) into the field."""
        if self.kind == "rationals":
            if isinstance(x, ModInt):
                raise TypeError("cannot coerce a prime-field element to the rationals")
            return Fraction(x)
        p = self.characteristic
        if isinstance(x, ModInt):
            return ModInt(x.v, p)
        x = Fraction(x)
        if x.denominator % p == 0:
            raise ZeroDivisionError(f"denominator divisible by {p}")
        return ModInt(x.numerator * pow(x.denominator, -1, p), p)

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def __str__(self):
        return "Q" if self.kind == "rationals" else f"F_{self.characteristic}"


QQ = FieldSpec.rationals()


@dataclass(frozen=True)
class Matrix:
    rows: int
    cols: int
    entries: tuple
    field: FieldSpec = QQ

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries, "
                f"got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], field: FieldSpec = QQ, cols: int | None = None):
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), cols, tuple(field(x) for r in rows for x in r), field)

    @classmethod
    def zeros(cls, rows: int, cols: int, field: FieldSpec = QQ):
        z = field.zero
        return cls(rows, cols, (z,) * (rows * cols), field)

    @classmethod
    def identity(cls, n: int, field: FieldSpec = QQ):
        z, o = field.zero, field.one
        return cls(n, n, tuple(o if i == j else z for i in range(n) for j in range(n)), field)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> list:
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def to_rows(self) -> list[list]:
        return [self.row(i) for i in range(self.rows)]

    def column(self, j: int) -> list:
        return [self.entries[i * self.cols + j] for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows,
                      tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)),
                      self.field)

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch in product")
            z = self.field.zero
            out = []
            ocols = [other.column(j) for j in range(other.cols)]
            for i in range(self.rows):
                r = self.row(i)
                for c in ocols:
                    s = z
                    for a, b in zip(r, c):
                        if a and b:
                            s = s + a * b
                    out.append(s)
            return Matrix(self.rows, other.cols, tuple(out), self.field)
        vec = list(other)
        if len(vec) != self.cols:
            raise ValueError("shape mismatch in matrix-vector product")
        return [sum((a * b for a, b in zip(self.row(i), vec) if a and b), self.field.zero)
                for i in range(self.rows)]

    def is_zero(self) -> bool:
        return not any(self.entries)

    def __str__(self):
        return "\n".join("[" + " ".join(str(x) for x in self.row(i)) + "]" for i in range(self.rows))


class DimensionMismatch(ValueError):
    """Raised for shape errors, which are distinct from 'no solution'."""


def _rref_rows(rows: list[list], field: FieldSpec, track: bool):
    """In-place style RREF on a list of rows; returns (rows, transform, pivots)."""
    n = len(rows)
    ncols = len(rows[0]) if rows else 0
    if field.is_prime and kernels.HAVE_FIELD_KERNEL:
        p = field.characteristic
        ints = [[int(x) for x in r] for r in rows]
        red, t, piv = kernels.rref_mod_p(ints, ncols, p, track)
        conv = lambda M: [[ModInt(x, p) for x in r] for r in M]
        return conv(red), (conv(t) if track else None), piv
    one, zero = field.one, field.zero
    rows = [list(r) for r in rows]
    t = [[one if i == j else zero for j in range(n)] for i in range(n)] if track else None
    pivots = []
    r = 0
    for c in range(ncols):
        if r == n:
            break
        piv = next((i for i in range(r, n) if rows[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
            if track:
                t[r], t[piv] = t[piv], t[r]
        inv = one / rows[r][c]
        if inv != 1:
            rows[r] = [x * inv for x in rows[r]]
            if track:
                t[r] = [x * inv for x in t[r]]
        prow = rows[r]
        nz = [j for j in range(c, ncols) if prow[j]]
        for i in range(n):
            if i != r and rows[i][c]:
                f = rows[i][c]
                ri = rows[i]
                for j in nz:
                    ri[j] = ri[j] - f * prow[j]
                if track:
                    ti, tr = t[i], t[r]
                    for j in range(n):
                        if tr[j]:
                            ti[j] = ti[j] - f * tr[j]
        pivots.append(c)
        r += 1
    return rows, t, pivots


def row_reduce(m: Matrix) -> tuple[Matrix, Matrix, int]:
    """Return ``(reduced, basis_change, rank)`` with ``basis_change @ m == reduced``."""
    if m.rows == 0:
        return m, Matrix.identity(0, m.field), 0
    rows, t, pivots = _rref_rows(m.to_rows(), m.field, True)
    red = Matrix.from_rows(rows, m.field, m.cols)
    return red, Matrix.from_rows(t, m.field, m.rows), len(pivots)


def pivots_of(m: Matrix) -> list[int]:
    if m.rows == 0 or m.cols == 0:
        return []
    return _rref_rows(m.to_rows(), m.field, False)[2]


def rank(m: Matrix) -> int:
    return len(pivots_of(m))


def rank_of_rows(rows: list[list], field: FieldSpec) -> int:
    """Rank of a matrix given as a list of rows (skips building a Matrix)."""
    if not rows or not rows[0]:
        return 0
    return len(_rref_rows(rows, field, False)[2])


def kernel_basis(m: Matrix) -> list[list]:
    """Basis of ``{v : m v = 0}`` read off the reduced row-echelon form."""
    f = m.field
    if m.rows == 0:
        return [[f.one if i == j else f.zero for i in range(m.cols)] for j in range(m.cols)]
    rows, _, pivots = _rref_rows(m.to_rows(), f, False)
    pset = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pset:
            continue
        v = [f.zero] * m.cols
        v[free] = f.one
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][free]
        basis.append(v)
    return basis


def solve(m: Matrix, b: Sequence) -> Optional[list]:
    """A solution ``x`` of ``m x = b``, or None when b is outside the column span."""
    if len(b) != m.rows:
        raise DimensionMismatch(f"right-hand side has length {len(b)}, matrix has {m.rows} rows")
    f = m.field
    if m.rows == 0:
        return [f.zero] * m.cols
    aug = [m.row(i) + [f(b[i])] for i in range(m.rows)]
    rows, _, pivots = _rref_rows(aug, f, False)
    if pivots and pivots[-1] == m.cols:
        return None
    x = [f.zero] * m.cols
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][m.cols]
    return x


def span_complement(subspace: list[list], vectors: Iterable[list], field: FieldSpec) -> list[list]:
    """Greedily pick vectors extending ``subspace`` to a larger independent set.

    Returns only the chosen new vectors; these represent a basis of
    span(subspace + vectors) / span(subspace).
    """
    chosen = []
    current = [list(v) for v in subspace]
    r = rank_of_rows(current, field) if current else 0
    for v in vectors:
        trial = current + [list(v)]
        r2 = rank_of_rows(trial, field)
        if r2 > r:
            chosen.append(list(v))
            current = trial
            r = r2
    return chosen


def determinant(m: Matrix):
    """Determinant by elimination (square matrices only)."""
    if m.rows != m.cols:
        raise DimensionMismatch("determinant of a non-square matrix")
    f = m.field
    rows = m.to_rows()
    n = m.rows
    det = f.one
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c]), None)
        if piv is None:
            return f.zero
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            det = -det
        det = det * rows[c][c]
        inv = f.one / rows[c][c]
        for i in range(c + 1, n):
            if rows[i][c]:
                fac = rows[i][c] * inv
                rows[i] = [a - fac * b for a, b in zip(rows[i], rows[c])]
    return det


def inverse(m: Matrix) -> Optional[Matrix]:
    if m.rows != m.cols:
        raise DimensionMismatch("inverse of a non-square matrix")
    red, t, r = row_reduce(m)
    if r < m.rows:
        return None
    return t
