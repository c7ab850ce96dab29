"""Command-line interface.

Exit codes: 0 success, 1 data/numeric failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .chi2mix import (ApproxError, ChiSquareMixture, CumulantTriple,
                      mixture_cumulant, pvalue, threec_match, ws_match)
from .glht import GLHT_TESTS, glht_z3_regression
from .io import load_contrast, load_matrix
from .matrix_core import CenteredFactor, DataError, DataMatrix, tr_cov_sq
from .report import TestReport, render_text, to_json
from .simulate import (CovarianceSpec, SizeStudyConfig, empirical_size,
                       mixture_mc_tail)
from .two_sample import TWO_SAMPLE_TESTS, TwoSampleInput


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("HDNR_THREADS", "1")))
    except ValueError:
        return 1


def _write_json(path: str | None, payload) -> None:
    if path:
        with open(path, "w") as fh:
            if isinstance(payload, TestReport):
                fh.write(to_json(payload) + "\n")
            else:
                json.dump(payload, fh, indent=2)
                fh.write("\n")


class _UsageError(Exception):
    pass


def _check_test_id(tid: str, registry: dict) -> None:
    if tid not in registry:
        raise _UsageError(
            f"unknown test id {tid!r}; valid ids: "
            + ", ".join(sorted(registry)))


def cmd_twosample(args) -> int:
    _check_test_id(args.test, TWO_SAMPLE_TESTS)
    x1 = load_matrix(args.group1, eps=args.eps)
    x2 = load_matrix(args.group2, eps=args.eps)
    inp = TwoSampleInput(x1, x2)
    if args.test == "zzz2023":
        report = TWO_SAMPLE_TESTS[args.test](inp, cutoff=args.cutoff)
    else:
        report = TWO_SAMPLE_TESTS[args.test](inp)
    print(render_text(report))
    _write_json(args.json, report)
    return 0


def cmd_glht(args) -> int:
    _check_test_id(args.test, GLHT_TESTS)
    if args.design or args.coef:
        if args.test != "z3":
            raise _UsageError(
                "regression form (--design/--coef) only applies to test z3")
        if not (args.design and args.coef and len(args.data) == 1):
            raise _UsageError(
                "regression form needs one --data file, --design and --coef")
        y = load_matrix(args.data[0], eps=args.eps)
        x = load_contrast(args.design)
        c = load_contrast(args.coef)
        t, df, p_value = glht_z3_regression(y.values, x, c)
        report = TestReport(
            test_id="z3", test_name="Zhu et al. (2022)'s test",
            statistic_name="T[ZZZ]", statistic=t, p_value=p_value,
            approx_method="2-c matched chi^2-approximation",
            params={"df": df}, n=(y.n,), p=y.p,
            null_text="The general linear hypothesis is true",
            alt_text="The general linear hypothesis is not true",
            data_name="Y")
    else:
        if not args.contrast:
            raise _UsageError("--contrast is required for the k-sample form")
        if len(args.data) < 2:
            raise _UsageError("k-sample form needs at least 2 --data files")
        groups = [load_matrix(f, eps=args.eps) for f in args.data]
        contrast = load_contrast(args.contrast)
        report = GLHT_TESTS[args.test](groups, contrast)
    print(render_text(report))
    _write_json(args.json, report)
    return 0


def cmd_size_sim(args) -> int:
    registry = TWO_SAMPLE_TESTS if args.family == "twosample" else GLHT_TESTS
    for tid in args.test:
        _check_test_id(tid, registry)
    contrast = None
    if args.contrast:
        contrast = tuple(map(tuple, load_contrast(args.contrast)))
    if args.data:
        cfg = SizeStudyConfig(
            tests=tuple(args.test), nrep=args.nrep,
            alphas=tuple(args.alpha), seed=args.seed, family=args.family,
            mode="split", split_size=args.split_size)
        data = load_matrix(args.data)
    else:
        if args.p is None or not args.ns:
            raise _UsageError(
                "generator mode needs --p and --ns (or use --data)")
        cfg = SizeStudyConfig(
            tests=tuple(args.test), ns=tuple(args.ns),
            cov=CovarianceSpec(args.cov, args.p, rho=args.rho),
            dist=args.dist, nrep=args.nrep, alphas=tuple(args.alpha),
            seed=args.seed, family=args.family, contrast=contrast)
        data = None
    result = empirical_size(cfg, threads=args.threads, data=data)

    header = ["test"] + [f"size@{a:g}" for a in cfg.alphas] + ["mean params"]
    print("  ".join(header))
    for tid in cfg.tests:
        mp = result.mean_params[tid]
        mp_text = ", ".join(f"{k}={v:.4f}" for k, v in mp.items()) or "-"
        cells = [tid] + [f"{result.sizes[tid][a]:.4f}" for a in cfg.alphas]
        print("  ".join(cells) + "  " + mp_text)
    print(f"# rng={result.rng_algorithm} seed={cfg.seed} nrep={cfg.nrep}")
    _write_json(args.json, {
        "tests": list(cfg.tests),
        "alphas": list(cfg.alphas),
        "sizes": {t: {str(a): s for a, s in result.sizes[t].items()}
                  for t in cfg.tests},
        "rejection_counts": {
            t: {str(a): c for a, c in result.rejection_counts[t].items()}
            for t in cfg.tests},
        "mean_params": result.mean_params,
        "seed": cfg.seed, "nrep": cfg.nrep,
        "rng": result.rng_algorithm,
    })
    return 0


def cmd_oracle(args) -> int:
    m = load_contrast(args.mixture)
    if m.ndim != 2 or m.shape[1] != 2:
        raise _UsageError(
            "mixture file must have two columns: coefficient, df")
    mix = ChiSquareMixture(m[:, 0], m[:, 1].astype(int))
    phat, se = mixture_mc_tail(mix, args.t, args.draws, args.seed)
    k1 = mixture_cumulant(mix, 1)
    k2 = mixture_cumulant(mix, 2)
    k3 = mixture_cumulant(mix, 3)
    out = {"t": args.t, "draws": args.draws, "seed": args.seed,
           "mc_tail": phat, "mc_se": se}
    if np.all(mix.coeffs >= 0):
        out["ws_tail"] = pvalue(args.t, ws_match(k1, k2))
    out["threec_tail"] = pvalue(
        args.t, threec_match(CumulantTriple(k1, k2, k3)))
    for k, v in out.items():
        print(f"{k} = {v}")
    _write_json(args.json, out)
    return 0


def cmd_bench(args) -> int:
    rng = np.random.default_rng(args.seed)
    timings = []
    if args.op == "tr-cov-sq":
        z = CenteredFactor(rng.standard_normal((args.n, args.p)), args.n - 1)
        for _ in range(args.reps):
            start = time.perf_counter()
            tr_cov_sq(z)
            timings.append(time.perf_counter() - start)
        label = f"tr_cov_sq n={args.n} p={args.p}"
    else:
        _check_test_id(args.test, TWO_SAMPLE_TESTS)
        inp = TwoSampleInput(
            DataMatrix(rng.standard_normal((args.n1, args.p))),
            DataMatrix(rng.standard_normal((args.n2, args.p))))
        fn = TWO_SAMPLE_TESTS[args.test]
        for _ in range(args.reps):
            start = time.perf_counter()
            fn(inp)
            timings.append(time.perf_counter() - start)
        label = f"{args.test} n1={args.n1} n2={args.n2} p={args.p}"
    mean_s = sum(timings) / len(timings)
    print(f"{label}: mean {mean_s:.4f} s over {args.reps} runs")
    _write_json(args.json, {"label": label, "mean_seconds": mean_s,
                            "timings": timings})
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdnr",
        description="Normal-reference tests for high-dimensional means")
    sub = parser.add_subparsers(dest="command", required=True)

    ts = sub.add_parser("twosample", help="two-sample mean-vector test")
    ts.add_argument("--test", required=True)
    ts.add_argument("--group1", required=True)
    ts.add_argument("--group2", required=True)
    ts.add_argument(
        "--cutoff", type=float, default=1.2,
        help="zzz2023 only: apply the adjustment-coefficient division "
             "when tr(Rn^2)-hat/p^2 reaches this threshold (default 1.2)")
    ts.add_argument("--eps", type=float, default=1e-10,
                    help="stabilization constant for degenerate columns")
    ts.add_argument("--json")
    ts.set_defaults(func=cmd_twosample)

    gl = sub.add_parser("glht", help="general linear hypothesis test")
    gl.add_argument("--test", required=True)
    gl.add_argument("--data", nargs="+", required=True)
    gl.add_argument("--contrast")
    gl.add_argument("--design")
    gl.add_argument("--coef")
    gl.add_argument("--eps", type=float, default=1e-10)
    gl.add_argument("--json")
    gl.set_defaults(func=cmd_glht)

    ss = sub.add_parser("size-sim", help="empirical size study")
    ss.add_argument("--test", nargs="+", required=True)
    ss.add_argument("--family", choices=["twosample", "glht"],
                    default="twosample")
    ss.add_argument("--nrep", type=int, default=1000)
    ss.add_argument("--alpha", nargs="+", type=float, default=[0.05])
    ss.add_argument("--seed", type=int, default=0)
    ss.add_argument("--threads", type=int, default=_default_threads())
    ss.add_argument("--data", help="pooled sample CSV for split mode")
    ss.add_argument("--split-size", type=int)
    ss.add_argument("--ns", nargs="+", type=int, default=[])
    ss.add_argument("--p", type=int)
    ss.add_argument("--cov", choices=["ar1", "cs", "diag"], default="diag")
    ss.add_argument("--rho", type=float, default=0.0)
    ss.add_argument("--dist", default="normal")
    ss.add_argument("--contrast")
    ss.add_argument("--json")
    ss.set_defaults(func=cmd_size_sim)

    orc = sub.add_parser("oracle", help="Monte Carlo mixture tail")
    orc.add_argument("--mixture", required=True,
                     help="CSV with columns: coefficient, df")
    orc.add_argument("--t", type=float, required=True)
    orc.add_argument("--draws", type=int, default=1_000_000)
    orc.add_argument("--seed", type=int, default=0)
    orc.add_argument("--json")
    orc.set_defaults(func=cmd_oracle)

    be = sub.add_parser("bench", help="timing micro-benchmarks")
    be.add_argument("--op", choices=["test", "tr-cov-sq"], default="test")
    be.add_argument("--test", default="skk2013")
    be.add_argument("--n1", type=int, default=18)
    be.add_argument("--n2", type=int, default=18)
    be.add_argument("--n", type=int, default=40)
    be.add_argument("--p", type=int, default=2000)
    be.add_argument("--reps", type=int, default=10)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--json")
    be.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ApproxError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
