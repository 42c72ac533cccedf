# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled row reduction over Z/pZ (p < 2**31)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef int64_t _inv(int64_t a, int64_t p):
    cdef int64_t t = 0, newt = 1, r = p, newr = a, q, tmp
    while newr != 0:
        q = r // newr
        tmp = t - q * newt
        t = newt
        newt = tmp
        tmp = r - q * newr
        r = newr
        newr = tmp
    if t < 0:
        t += p
    return t


def rref_mod_p(rows, Py_ssize_t ncols, int64_t p, bint track):
    cdef Py_ssize_t n = len(rows)
    if p >= 2 ** 31:
        raise OverflowError("compiled kernel needs p < 2**31")
    cdef Py_ssize_t width = ncols + (n if track else 0)
    arr = np.zeros((n, width), dtype=np.int64)
    cdef int64_t[:, ::1] a = arr
    cdef Py_ssize_t i, j, c, r = 0, piv
    cdef int64_t inv, f, x
    for i in range(n):
        row = rows[i]
        for j in range(ncols):
            a[i, j] = (<int64_t> row[j]) % p
            if a[i, j] < 0:
                a[i, j] += p
        if track:
            a[i, ncols + i] = 1
    pivots = []
    for c in range(ncols):
        if r == n:
            break
        piv = -1
        for i in range(r, n):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(width):
                x = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = x
        inv = _inv(a[r, c], p)
        if inv != 1:
            for j in range(c, width):
                a[r, j] = (a[r, j] * inv) % p
        for i in range(n):
            if i != r:
                f = a[i, c]
                if f != 0:
                    for j in range(c, width):
                        if a[r, j] != 0:
                            a[i, j] = (a[i, j] - f * a[r, j]) % p
                            if a[i, j] < 0:
                                a[i, j] += p
        pivots.append(c)
        r += 1
    red = arr[:, :ncols].tolist()
    t = arr[:, ncols:].tolist() if track else None
    return red, t, pivots
