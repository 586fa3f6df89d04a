"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 2000] [--p 20] [--m 100]

Checks that both backends return the same result on every case, then
prints the best-of-repeat time per call and the speedup.
"""

import argparse
import timeit

import numpy as np

from mmiboost import _pykernels

try:
    from mmiboost import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def split_case(rng, n, p, m):
    bins = np.ascontiguousarray(rng.integers(0, m + 1, size=(n, p)).astype(np.uint16))
    y = rng.random(n) < 0.5
    D = rng.random(n)
    D /= D.sum()
    return (bins, np.where(y, D, 0.0), np.where(y, 0.0, D), np.arange(n, dtype=np.intp), m)


def pivot_case(rng, rows, cols):
    return rng.standard_normal((rows, cols))


def best_time(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=2000, help="observations for best_split")
    ap.add_argument("--p", type=int, default=20, help="features for best_split")
    ap.add_argument("--m", type=int, default=100, help="thresholds for best_split")
    ap.add_argument("--rows", type=int, default=600, help="tableau rows for pivot")
    ap.add_argument("--cols", type=int, default=1200, help="tableau columns for pivot")
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; only the fallback is available")
        return 1

    rng = np.random.default_rng(0)
    sargs = split_case(rng, args.n, args.p, args.m)
    assert _ckernels.best_split(*sargs) == _pykernels.best_split(*sargs)
    M = pivot_case(rng, args.rows, args.cols)
    a, b = M.copy(), M.copy()
    _pykernels.pivot(a, 1, 2)
    _ckernels.pivot(b, 1, 2)
    assert np.allclose(a, b, rtol=0, atol=1e-12)

    rows = []
    for name, py, cy, number in [
        (f"best_split n={args.n} p={args.p} m={args.m}",
         lambda: _pykernels.best_split(*sargs), lambda: _ckernels.best_split(*sargs), 20),
        (f"pivot {args.rows}x{args.cols}",
         lambda: _pykernels.pivot(M.copy(), 1, 2), lambda: _ckernels.pivot(M.copy(), 1, 2), 20),
    ]:
        tp = best_time(py, args.repeat, number)
        tc = best_time(cy, args.repeat, number)
        rows.append((name, tp, tc))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'python (ms)':>12}  {'cython (ms)':>12}  {'speedup':>8}")
    for name, tp, tc in rows:
        print(f"{name:<{width}}  {tp * 1e3:12.3f}  {tc * 1e3:12.3f}  {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
