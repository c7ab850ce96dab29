#!/usr/bin/env python3
"""Self-benchmark of the trace engine and a full two-sample test.

Times tr_cov_sq over a doubling sequence of dimensions (expected to scale
linearly in p for fixed n) and one large scale-invariant two-sample run.

Example:
    python3 scripts/run_bench.py --n 40 --p 10000 20000 40000
"""
import argparse
import sys
import time

import numpy as np

from hdnr.matrix_core import DataMatrix, center, tr_cov_sq
from hdnr.two_sample import TWO_SAMPLE_TESTS, TwoSampleInput


def best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--p", nargs="+", type=int,
                    default=[10_000, 20_000, 40_000])
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    prev = None
    for p in args.p:
        z = center(DataMatrix(rng.standard_normal((args.n, p))))
        dt = best_of(lambda: tr_cov_sq(z), args.reps)
        ratio = "" if prev is None else f"  ratio vs previous: {dt / prev:.2f}"
        print(f"tr_cov_sq  n={args.n}  p={p:<7d}  {dt * 1e3:8.2f} ms{ratio}")
        prev = dt

    p = args.p[-1]
    x1 = DataMatrix(rng.standard_normal((18, p)))
    x2 = DataMatrix(rng.standard_normal((18, p)))
    t0 = time.perf_counter()
    rep = TWO_SAMPLE_TESTS["skk2013"](TwoSampleInput(x1, x2))
    dt = time.perf_counter() - t0
    print(f"skk2013    n=(18,18)  p={p}  {dt * 1e3:8.2f} ms  "
          f"(p-value {rep.p_value:.4g})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
