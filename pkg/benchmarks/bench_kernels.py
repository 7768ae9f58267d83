"""Compiled vs pure-numpy timings for the hot kernels.

Run with ``python benchmarks/bench_kernels.py``.  Each kernel is timed on
both paths by toggling ``SEMIWEYL_NUMBA`` in-process (the dispatch is read
at call time), after one warm-up call that also absorbs JIT compilation.
"""

import argparse
import os
import time

import numpy as np

from semiweyl import kernels
from semiweyl._accel import HAVE_NUMBA


def _laplacian(n, h=0.01):
    x = np.linspace(-3, 3, n)
    d = 2.0 * h**2 / (x[1] - x[0]) ** 2 + x**2 - 1.0
    e2 = np.full(n - 1, (h**2 / (x[1] - x[0]) ** 2) ** 2)
    return d, e2


def _time(fn, repeat):
    fn()
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n):
    d, e2 = _laplacian(n)
    energies = np.linspace(-0.5, 0.5, 64)
    k = int(kernels.sturm_counts(d, e2, [0.0])[0])
    idx = np.arange(min(k, 64))
    rng = np.random.default_rng(0)
    freqs = np.arange(1, 33, dtype=float)
    acos, bsin = rng.standard_normal(32), rng.standard_normal(32)
    x = np.linspace(0, 2 * np.pi, 4 * n)
    G = rng.standard_normal((1024, 512)) + 1j * rng.standard_normal((1024, 512))
    return {
        "sturm_counts": lambda: kernels.sturm_counts(d, e2, energies),
        "bisect_eigenvalues": lambda: kernels.bisect_eigenvalues(d, e2, idx, 1e-12),
        "trig_eval": lambda: kernels.trig_eval(freqs, acos, bsin, x, 1),
        "weyl_gather": lambda: kernels.weyl_gather(G, kernels.ROW_MID),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("-n", type=int, default=8192, help="tridiagonal size")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    old = os.environ.get("SEMIWEYL_NUMBA")
    rows = []
    try:
        for name, fn in cases(args.n).items():
            os.environ["SEMIWEYL_NUMBA"] = "0"
            t_np = _time(fn, args.repeat)
            t_nb = float("nan")
            if HAVE_NUMBA:
                os.environ["SEMIWEYL_NUMBA"] = "1"
                t_nb = _time(fn, args.repeat)
            rows.append((name, t_np, t_nb))
    finally:
        if old is None:
            os.environ.pop("SEMIWEYL_NUMBA", None)
        else:
            os.environ["SEMIWEYL_NUMBA"] = old
    print(f"{'kernel':<20}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, a, b in rows:
        print(f"{name:<20}{1e3 * a:12.2f}{1e3 * b:12.2f}{a / b:10.1f}")


if __name__ == "__main__":
    main()
