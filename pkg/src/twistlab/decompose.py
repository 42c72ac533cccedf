"""Splitting objects into indecomposable summands via idempotents.

Everything runs on minimal models.  There the null-homotopic maps and
the positive-degree part of a degree-0 endomorphism have no scalar
component, so reducing an endomorphism to its scalar blocks is an
algebra map with nilpotent kernel.  An idempotent of the scalar image
lifts by ``e <- 3e^2 - 2e^3``, and a strict idempotent splits the complex
after conjugating it to a coordinate projection.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

import sympy

from .analysis import Commute, commute_classify, is_spherical, is_strongly_spherical, shift_witness
from .complexes import (
    ChainMap,
    ComplexError,
    TwistedComplex,
    _degree0_blocks,
    direct_sum,
    hom_complex,
    is_isomorphic,
    mat_add,
    mat_identity,
    mat_mul,
    mat_scale,
    minimize,
)
from .linalg import Matrix, inverse, kernel_basis, solve, span_complement
from .twists import SphericalCollection

MAX_LIFT_STEPS = 64


class SplitBudgetExceeded(ComplexError):
    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


@dataclass
class EndAlgebra:
    """Degree-0 homology of Hom(x, x) for a minimal x.

    ``basis`` holds cocycle matrices (identity first); ``constants[i][j]``
    is the coordinate vector of ``basis[i] . basis[j]`` modulo
    null-homotopic maps.
    """

    obj: TwistedComplex
    basis: list
    constants: list

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def element(self, coeffs) -> dict:
        F = self.obj.algebra.field
        out: dict = {}
        for c, b in zip(coeffs, self.basis):
            if c:
                out = mat_add(out, b, F(c))
        return out


def endomorphism_algebra(m: TwistedComplex) -> EndAlgebra:
    x = minimize(m)
    h = hom_complex(x, x)
    F = x.algebra.field
    ident = h.matrix_to_vector(0, mat_identity(x.algebra, x.summands))
    if not x.summands:
        return EndAlgebra(x, [], [])
    bnd = [v for v in h.coboundaries(0) if any(v)]
    reps = span_complement(bnd, [ident] + h.cocycles(0), F)
    basis = [h.vector_to_matrix(0, v) for v in reps]
    n = len(reps)
    # coordinates modulo coboundaries: solve [reps | bnd] c = v
    cols = reps + bnd
    M = Matrix.from_rows([[c[i] for c in cols] for i in range(len(ident))], F, len(cols))
    consts = []
    for a in basis:
        row = []
        for b in basis:
            v = h.matrix_to_vector(0, mat_mul(x.algebra, a, b))
            sol = solve(M, v)
            if sol is None:
                raise ComplexError("product left the cocycle space")
            row.append(tuple(sol[:n]))
        consts.append(row)
    return EndAlgebra(x, basis, consts)


# -- idempotents -------------------------------------------------------------

def _scalar_matrix(x: TwistedComplex, mat: dict):
    """Block-diagonal scalar part as one dense matrix over the field."""
    alg = x.algebra
    blocks = _degree0_blocks(alg, x.summands, x.summands, mat)
    F = alg.field
    n = len(x.summands)
    out = [[F.zero] * n for _ in range(n)]
    for rows, cols, block in blocks.values():
        for a, j in enumerate(rows):
            for b, k in enumerate(cols):
                out[j][k] = block[a][b]
    return out


def _dense_mul(a, b, F):
    n = len(a)
    return [[sum((a[i][k] * b[k][j] for k in range(n) if a[i][k] and b[k][j]), F.zero)
             for j in range(n)] for i in range(n)]


def _minimal_polynomial(M, F):
    """Coefficients (low to high, monic) of the minimal polynomial of M."""
    n = len(M)
    ident = [[F.one if i == j else F.zero for j in range(n)] for i in range(n)]
    powers = [ident]
    flat = lambda A: [x for r in A for x in r]
    while True:
        cur = _dense_mul(powers[-1], M, F)
        cols = [flat(P) for P in powers]
        A = Matrix.from_rows([[c[i] for c in cols] for i in range(n * n)], F, len(cols))
        sol = solve(A, flat(cur))
        if sol is not None:
            return [-c for c in sol] + [F.one]
        powers.append(cur)


def _to_sympy(c, F):
    return sympy.Rational(c.numerator, c.denominator) if not F.is_prime else int(c)


def _split_polynomial(coeffs, F):
    """Return an idempotent-producing polynomial h (low-to-high) or None.

    h(x) is 1 modulo one primary factor of the minimal polynomial and 0
    modulo the rest.
    """
    t = sympy.Symbol("t")
    kw = {"modulus": F.characteristic} if F.is_prime else {"domain": sympy.QQ}
    p = sympy.Poly([_to_sympy(c, F) for c in reversed(coeffs)], t, **kw)
    _, factors = p.factor_list()
    if len(factors) < 2:
        return None
    q = factors[0][0] ** factors[0][1]
    r = sympy.Poly(sympy.prod([f.as_expr() ** k for f, k in factors[1:]]), t, **kw)
    s, u, g = sympy.gcdex(q, r)
    if g.as_expr() != 1:
        s, u = s / g.LC(), u / g.LC()
    h = (u * r).rem(p)
    out = []
    for c in reversed(h.all_coeffs()):
        if F.is_prime:
            out.append(F(int(c)))
        else:
            c = sympy.Rational(c)
            out.append(F(f"{c.p}/{c.q}"))
    return out


def _eval_poly(x: TwistedComplex, coeffs, mat):
    alg = x.algebra
    ident = mat_identity(alg, x.summands)
    out: dict = {}
    for c in reversed(coeffs):
        out = mat_mul(alg, out, mat)
        if c:
            out = mat_add(out, ident, c)
    return out


def lift_idempotent(x: TwistedComplex, e: dict) -> tuple[dict, int]:
    """Iterate e <- 3e^2 - 2e^3 until e is a strict idempotent."""
    alg = x.algebra
    for step in range(MAX_LIFT_STEPS):
        e2 = mat_mul(alg, e, e)
        if e2 == e:
            return e, step
        e3 = mat_mul(alg, e2, e)
        e = mat_add(mat_scale(e2, 3), e3, -2)
    raise ComplexError(f"idempotent lifting did not converge in {MAX_LIFT_STEPS} steps")


def _is_trivial(x, e):
    return not e or e == mat_identity(x.algebra, x.summands)


def find_idempotent(a: EndAlgebra, seed: int = 0, tries: int = 12) -> Optional[dict]:
    """A non-trivial strict idempotent of End(x), or None if none was found.

    Candidates are the basis elements, then seeded random combinations.
    """
    x = a.obj
    F = x.algebra.field
    if a.dimension <= 1:
        return None
    rng = random.Random(seed)
    cands = list(range(1, a.dimension))
    order = cands[:]
    rng.shuffle(order)
    vecs = [[F.one if i == j else F.zero for i in range(a.dimension)] for j in order]
    for _ in range(tries):
        vecs.append([F(rng.randrange(-5, 6)) for _ in range(a.dimension)])
    for v in vecs:
        el = a.element(v)
        M = _scalar_matrix(x, el)
        h = _split_polynomial(_minimal_polynomial(M, F), F)
        if h is None:
            continue
        e0 = _eval_poly(x, h, el)
        e, _ = lift_idempotent(x, e0)
        if not _is_trivial(x, e):
            return e
    return None


# -- splitting -----------------------------------------------------------------

def _neumann_inverse(alg, summands, u):
    """Inverse of u = 1 + nilpotent."""
    ident = mat_identity(alg, summands)
    n = mat_add(u, ident, -1)
    term, out = ident, dict(ident)
    for _ in range(MAX_LIFT_STEPS * 4):
        term = mat_scale(mat_mul(alg, n, term), -1)
        if not term:
            return out
        out = mat_add(out, term)
    raise ComplexError("Neumann series did not terminate")


def split_by_idempotent(x: TwistedComplex, e: dict) -> tuple[TwistedComplex, TwistedComplex]:
    """Split x ~= image(e) + image(1 - e) for a strict closed idempotent e."""
    alg = x.algebra
    F = alg.field
    blocks = _degree0_blocks(alg, x.summands, x.summands, e)
    img_summ, ker_summ, qcols = [], [], []  # qcols: (is_image, class, column vector over rows)
    for cls, (rows, cols, block) in sorted(blocks.items()):
        if not rows:
            continue
        n = len(rows)
        colvecs = [[block[i][k] for i in range(n)] for k in range(n)]
        im = span_complement([], colvecs, F)
        kb = kernel_basis(Matrix.from_rows(block, F, n))
        for v in im:
            img_summ.append(cls)
            qcols.append((True, cls, rows, v))
        for v in kb:
            ker_summ.append(cls)
            qcols.append((False, cls, rows, v))
    new_summ = img_summ + ker_summ
    ordered = [c for c in qcols if c[0]] + [c for c in qcols if not c[0]]
    Q: dict = {}
    for knew, (_, cls, rows, v) in enumerate(ordered):
        ei = alg.idempotent_index[cls[0]]
        for jj, c in zip(rows, v):
            if c:
                Q[(jj, knew)] = {ei: c}
    # block-wise inverse of Q
    Qi: dict = {}
    for cls in sorted(set(new_summ)):
        newk = [k for k, s in enumerate(new_summ) if s == cls]
        oldj = [j for j, s in enumerate(x.summands) if s == cls]
        blk = [[Q.get((j, k), {}).get(alg.idempotent_index[cls[0]], F.zero) for k in newk] for j in oldj]
        inv = inverse(Matrix.from_rows(blk, F, len(newk))).to_rows()
        ei = alg.idempotent_index[cls[0]]
        for a, k in enumerate(newk):
            for b, j in enumerate(oldj):
                if inv[a][b]:
                    Qi[(k, j)] = {ei: inv[a][b]}
    e1 = mat_mul(alg, Qi, mat_mul(alg, e, Q))
    k_img = len(img_summ)
    eps = {(i, i): {alg.idempotent_index[new_summ[i][0]]: F.one} for i in range(k_img)}
    ident = mat_identity(alg, new_summ)
    one_minus = lambda m: mat_add(ident, m, -1)
    u = mat_add(mat_mul(alg, e1, eps), mat_mul(alg, one_minus(e1), one_minus(eps)))
    ui = _neumann_inverse(alg, new_summ, u)
    T = mat_mul(alg, Q, u)
    Ti = mat_mul(alg, ui, Qi)
    nd = mat_mul(alg, Ti, mat_mul(alg, x.differential, T))
    for (j, k) in nd:
        if (j < k_img) != (k < k_img):
            raise ComplexError("conjugated differential is not block diagonal")
    img_d = {(j, k): v for (j, k), v in nd.items() if j < k_img}
    ker_d = {(j - k_img, k - k_img): v for (j, k), v in nd.items() if j >= k_img}
    return (TwistedComplex(alg, tuple(img_summ), img_d),
            TwistedComplex(alg, tuple(ker_summ), ker_d))


@dataclass
class SummandReport:
    pieces: list  # (object, multiplicity, spherical flag)
    orthogonality: list  # orthogonality[i][j] for distinct pieces
    all_pieces: list
    verified: bool
    splits: int = 0
    complete: bool = True

    def as_dict(self):
        return {
            "pieces": [{"object": p.describe(), "multiplicity": m, "spherical": s}
                       for p, m, s in self.pieces],
            "orthogonality": self.orthogonality,
            "verified": self.verified,
            "complete": self.complete,
        }


def _split_all(x, seed, budget, counter):
    x = minimize(x)
    if x.is_zero:
        return []
    counter[0] += 1
    if counter[0] > budget:
        raise SplitBudgetExceeded(f"split budget {budget} exhausted", [x])
    e = find_idempotent(endomorphism_algebra(x), seed=seed)
    if e is None:
        return [x]
    a, b = split_by_idempotent(x, e)
    out = []
    for i, part in enumerate((a, b)):
        try:
            out.extend(_split_all(part, seed * 7 + i + 1, budget, counter))
        except SplitBudgetExceeded as exc:
            rest = [] if i else [minimize(b)]
            raise SplitBudgetExceeded(str(exc), out + exc.partial + rest) from None
    return out


def split_summands(m: TwistedComplex, seed: int = 0, budget: int = 64) -> SummandReport:
    from .analysis import is_orthogonal

    alg = m.algebra
    d = alg.cy_dimension
    counter = [0]
    complete = True
    try:
        pieces = _split_all(m, seed, budget, counter)
    except SplitBudgetExceeded as exc:
        pieces, complete = exc.partial, False
    pieces.sort(key=lambda p: (len(p.summands), sorted(p.summands)))
    groups: list = []
    for p in pieces:
        for g in groups:
            if is_isomorphic(g[0], p, seed=seed):
                g[1] += 1
                break
        else:
            groups.append([p, 1])
    rep = [(g[0], g[1], is_spherical(g[0], d)) for g in groups]
    orth = [[i == j or is_orthogonal(a[0], b[0]) for j, b in enumerate(rep)]
            for i, a in enumerate(rep)]
    verified = bool(is_isomorphic(direct_sum(pieces, alg), m, seed=seed))
    return SummandReport(rep, orth, pieces, verified, counter[0], complete)


@dataclass
class RecoveryResult:
    ok: bool
    collection: Optional[SphericalCollection] = None
    multiplicities: list = field(default_factory=list)
    strongly_spherical: bool = False
    pairwise: list = field(default_factory=list)
    diagnostic: Optional[str] = None
    violation: Optional[tuple] = None
    report: Optional[SummandReport] = None

    def as_dict(self):
        out = {"ok": self.ok, "strongly_spherical": self.strongly_spherical}
        if self.collection is not None:
            out["collection"] = [o.describe() for o in self.collection.objects]
            out["multiplicities"] = self.multiplicities
            out["pairwise"] = self.pairwise
        if self.diagnostic:
            out["diagnostic"] = self.diagnostic
        if self.violation:
            out["violation"] = list(self.violation)
        return out


def recover_collection(m: TwistedComplex, d: int | None = None, seed: int = 0) -> RecoveryResult:
    alg = m.algebra
    d = alg.cy_dimension if d is None else d
    rep = split_summands(m, seed=seed)
    members: list = []  # [object, multiplicity]
    for p, mult, _ in rep.pieces:
        for g in members:
            if shift_witness(g[0], p, seed) is not None:
                g[1] += mult
                break
        else:
            members.append([p, mult])
    for p, _ in members:
        if not is_spherical(p, d):
            return RecoveryResult(False, diagnostic=f"piece not spherical: {p.describe()}",
                                  report=rep)
    names = [f"S{i + 1}" for i in range(len(members))]
    gamma = SphericalCollection([p for p, _ in members], d, names)
    ok, violations = is_strongly_spherical(gamma)
    if not ok:
        return RecoveryResult(False, diagnostic="orthogonality violation",
                              violation=violations[0], report=rep)
    pairwise = []
    for i in range(len(members)):
        for j in range(i + 1, len(members)):
            verdict = commute_classify(gamma.objects[i], gamma.objects[j], d=d, seed=seed).verdict
            pairwise.append((names[i], names[j], verdict.value))
            if verdict is not Commute.COMMUTE_ORTHOGONAL:
                return RecoveryResult(False, diagnostic=f"members {names[i]}, {names[j]} give {verdict.value}",
                                      report=rep)
    return RecoveryResult(True, gamma, [mult for _, mult in members], True, pairwise, report=rep)


def random_automorphism(x: TwistedComplex, seed: int = 0) -> dict:
    """A seeded degree-0 automorphism of the underlying graded module of x.

    Scalar blocks are random invertible matrices; every positive-degree
    entry allowed by the shifts gets a random coefficient.
    """
    alg = x.algebra
    F = alg.field
    rng = random.Random(seed)
    mat: dict = {}
    for j, (w, t) in enumerate(x.summands):
        for k, (v, s) in enumerate(x.summands):
            if t <= s:
                continue
            entry = {}
            for b in alg.hom_basis(v, w, t - s):
                c = rng.randrange(-3, 4)
                if c:
                    entry[b] = F(c)
            if entry:
                mat[(j, k)] = entry
    # force invertible scalar blocks: unitriangular times diagonal
    for cls, (rows, cols, _) in _degree0_blocks(alg, x.summands, x.summands, {}).items():
        ei = alg.idempotent_index[cls[0]]
        for a, j in enumerate(rows):
            for b, k in enumerate(cols):
                if a == b:
                    mat[(j, k)] = {ei: F(rng.choice([1, 2, 3, -1, -2]))}
                elif a < b:
                    c = rng.randrange(-3, 4)
                    if c:
                        mat[(j, k)] = {ei: F(c)}
                    else:
                        mat.pop((j, k), None)
    return mat


def scramble(x: TwistedComplex, seed: int = 0) -> TwistedComplex:
    """An isomorphic copy of x with a contractible piece added and the
    differential conjugated by a random automorphism."""
    from .complexes import cone, identity_map, projective

    alg = x.algebra
    rng = random.Random(seed)
    v = rng.choice(list(alg.idempotents))
    s = rng.randrange(-1, 2)
    pad = cone(identity_map(projective(alg, v, s)))
    y = direct_sum([x, pad], alg)
    T = random_automorphism(y, seed)
    Ti = _inverse_automorphism(y, T)
    return TwistedComplex(alg, y.summands, mat_mul(alg, T, mat_mul(alg, y.differential, Ti)))


def _inverse_automorphism(y, T):
    alg = y.algebra
    D = {}
    blocks = _degree0_blocks(alg, y.summands, y.summands, T)
    F = alg.field
    for cls, (rows, cols, block) in blocks.items():
        inv = inverse(Matrix.from_rows(block, F, len(cols))).to_rows()
        ei = alg.idempotent_index[cls[0]]
        for a, j in enumerate(rows):
            for b, k in enumerate(cols):
                if inv[a][b]:
                    D[(j, k)] = {ei: inv[a][b]}
    # T = S (1 + N) with S the scalar part; invert 1 + S^-1 (T - S)
    u = mat_mul(alg, D, T)
    return mat_mul(alg, _neumann_inverse(alg, y.summands, u), D)
