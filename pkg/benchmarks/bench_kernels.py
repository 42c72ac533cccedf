"""Compare the compiled and pure-Python F_p row-reduction kernels.

Run with ``python benchmarks/bench_kernels.py [--sizes 40 80 160] [--repeat 3]``.
Besides raw kernel timings it times an end-to-end Ext computation over
GF(32003), where the kernel is the inner loop.
"""

import argparse
import random
import time

from twistlab import kernels
from twistlab.algebra import build_zigzag, path_graph
from twistlab.complexes import ChainMap, cone, direct_sum, ext_table, projective
from twistlab.linalg import FieldSpec

P = 32003


def random_rows(n, m, seed):
    rng = random.Random(seed)
    return [[rng.randrange(P) if rng.random() < 0.6 else 0 for _ in range(m)] for _ in range(n)]


def time_kernel(backend, rows, ncols, repeat):
    kernels.use_backend(backend)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        kernels.rref_mod_p([list(r) for r in rows], ncols, P, True)
        best = min(best, time.perf_counter() - t)
    return best


def ext_workload():
    A = build_zigzag(path_graph(4), FieldSpec.prime(P), d=2)
    p = {v: projective(A, v) for v in A.idempotents}
    c = cone(ChainMap(p["1"], projective(A, "2", 1), 0, {(0, 0): {A.index["a12"]: A.field(1)}}))
    x = direct_sum([c, p["3"], projective(A, "4", 1), c] * 4, A)
    y = direct_sum([p["2"], c, projective(A, "3", -1)] * 4, A)
    return ext_table(x, y)


def time_ext(backend, repeat):
    from twistlab import complexes

    kernels.use_backend(backend)
    best = float("inf")
    for _ in range(repeat):
        complexes._HOM_CACHE.clear()
        t = time.perf_counter()
        ext_workload()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[40, 80, 160])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if kernels.COMPILED_AVAILABLE else [])
    if len(backends) == 1:
        print("compiled kernel not built; timing the Python fallback only")
    print(f"{'workload':<24}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for n in args.sizes:
        rows = random_rows(n, n + n // 2, n)
        ts = [time_kernel(b, rows, n + n // 2, args.repeat) for b in backends]
        sp = f"{ts[0] / ts[-1]:>9.1f}x" if len(ts) > 1 else ""
        print(f"{f'rref {n}x{n + n // 2}':<24}" + "".join(f"{t * 1e3:>10.2f}ms" for t in ts) + sp)
    ts = [time_ext(b, args.repeat) for b in backends]
    sp = f"{ts[0] / ts[-1]:>9.1f}x" if len(ts) > 1 else ""
    print(f"{'ext_table A4 GF(p)':<24}" + "".join(f"{t * 1e3:>10.2f}ms" for t in ts) + sp)
    kernels.use_backend(backends[-1])


if __name__ == "__main__":
    main()
