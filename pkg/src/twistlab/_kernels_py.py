"""Pure-Python row reduction over Z/pZ on plain int rows."""


def rref_mod_p(rows, ncols, p, track):
    n = len(rows)
    rows = [[x % p for x in r] for r in rows]
    t = [[1 if i == j else 0 for j in range(n)] for i in range(n)] if track else None
    pivots = []
    r = 0
    for c in range(ncols):
        if r == n:
            break
        piv = -1
        for i in range(r, n):
            if rows[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
            if track:
                t[r], t[piv] = t[piv], t[r]
        inv = pow(rows[r][c], -1, p)
        if inv != 1:
            rows[r] = [(x * inv) % p for x in rows[r]]
            if track:
                t[r] = [(x * inv) % p for x in t[r]]
        prow = rows[r]
        nz = [j for j in range(c, ncols) if prow[j]]
        for i in range(n):
            if i != r:
                f = rows[i][c]
                if f:
                    ri = rows[i]
                    for j in nz:
                        ri[j] = (ri[j] - f * prow[j]) % p
                    if track:
                        ti, tr = t[i], t[r]
                        for j in range(n):
                            if tr[j]:
                                ti[j] = (ti[j] - f * tr[j]) % p
        pivots.append(c)
        r += 1
    return rows, t, pivots
