from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from twistlab import kernels
from twistlab.linalg import (QQ, DimensionMismatch, FieldSpec, Matrix, determinant, inverse,
                             kernel_basis, rank, row_reduce, solve)

GF101 = FieldSpec.prime(101)


def mat(rows, field=QQ):
    return Matrix.from_rows(rows, field)


def is_rref(m):
    lead = -1
    seen_zero = False
    for i in range(m.rows):
        row = m.row(i)
        nz = [j for j, x in enumerate(row) if x]
        if not nz:
            seen_zero = True
            continue
        assert not seen_zero
        j = nz[0]
        assert j > lead and row[j] == 1
        assert all(not m[k, j] for k in range(m.rows) if k != i)
        lead = j
    return True


matrices = st.integers(0, 5).flatmap(
    lambda r: st.integers(0, 5).flatmap(
        lambda c: st.lists(st.lists(st.integers(-4, 4), min_size=c, max_size=c),
                           min_size=r, max_size=r).map(lambda rows: (r, c, rows))))


def build(spec, field):
    r, c, rows = spec
    if r == 0:
        return Matrix.zeros(0, c, field)
    return Matrix.from_rows(rows, field, cols=c)


# examples

def test_identity_rank():
    red, t, r = row_reduce(Matrix.identity(2))
    assert r == 2 and red == Matrix.identity(2)


def test_zero_rank():
    assert rank(Matrix.zeros(3, 4)) == 0


def test_hand_rank_one():
    red, t, r = row_reduce(mat([[1, 2], [2, 4]]))
    assert r == 1
    assert red.to_rows() == [[1, 2], [0, 0]]


def test_kernel_examples():
    assert kernel_basis(Matrix.identity(3)) == []
    assert len(kernel_basis(Matrix.zeros(2, 3))) == 3
    (v,) = kernel_basis(mat([[1, 2], [2, 4]]))
    assert v[0] == -2 * v[1] and v[1] != 0


def test_solve_examples():
    assert solve(Matrix.identity(2), [5, 7]) == [5, 7]
    assert solve(Matrix.zeros(2, 2), [1, 0]) is None
    assert solve(mat([[1, 1], [0, 1]]), [3, 1]) == [2, 1]


def test_solve_dimension_mismatch_is_distinct():
    with pytest.raises(DimensionMismatch):
        solve(Matrix.identity(2), [1, 2, 3])


def test_canonical_forms():
    assert mat([[Fraction(2, 4)]])[0, 0] == Fraction(1, 2)
    assert Matrix.from_rows([[-1, 205]], GF101).row(0) == [GF101(100), GF101(3)]


def test_field_spec_rejects_composite():
    with pytest.raises(ValueError):
        FieldSpec.prime(100)


def test_determinant_and_inverse():
    m = mat([[2, 1], [1, 1]])
    assert determinant(m) == 1
    assert inverse(m) @ m == Matrix.identity(2)
    assert inverse(mat([[1, 2], [2, 4]])) is None


# invariants

@pytest.mark.parametrize("field", [QQ, GF101], ids=str)
@given(spec=matrices)
def test_rank_transpose(field, spec):
    m = build(spec, field)
    assert rank(m) == rank(m.transpose())


@pytest.mark.parametrize("field", [QQ, GF101], ids=str)
@given(spec=matrices)
def test_rank_nullity_and_kernel(field, spec):
    m = build(spec, field)
    ker = kernel_basis(m)
    assert m.cols == rank(m) + len(ker)
    for v in ker:
        assert not any(m @ v)
    if ker:
        assert rank(Matrix.from_rows(ker, field)) == len(ker)


@pytest.mark.parametrize("field", [QQ, GF101], ids=str)
@given(spec=matrices)
def test_row_reduce_contract(field, spec):
    m = build(spec, field)
    red, t, r = row_reduce(m)
    assert is_rref(red)
    assert t @ m == red
    assert r == sum(1 for i in range(red.rows) if any(red.row(i)))
    assert row_reduce(red)[0] == red


@pytest.mark.parametrize("field", [QQ, GF101], ids=str)
@given(spec=matrices, data=st.data())
def test_solve_image(field, spec, data):
    m = build(spec, field)
    x = [field(v) for v in data.draw(st.lists(st.integers(-5, 5), min_size=m.cols, max_size=m.cols))]
    b = m @ x
    y = solve(m, b)
    assert y is not None and m @ y == b


@pytest.mark.skipif(not kernels.COMPILED_AVAILABLE, reason="compiled kernel not built")
@given(spec=matrices)
def test_backends_agree(spec):
    m = build(spec, GF101)
    out = {}
    for name in ("python", "cython"):
        kernels.use_backend(name)
        try:
            out[name] = row_reduce(m)
        finally:
            kernels.use_backend("cython")
    assert out["python"] == out["cython"]
