"""Tests for the general linear hypothesis on k-sample mean vectors.

The hypothesis G mu = 0 for a q-by-k contrast matrix G is rewritten with
the whitened contrast A = (G B G')^{-1/2} G, B = diag(1/n_i), so the test
statistic is the squared Frobenius norm of A applied to the group means.
One member (the scale-invariant regression test) works directly on a
design-matrix formulation and never forms a p-by-p matrix.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import chi2mix
from .chi2mix import (CumulantTriple, WSApprox, norm_sf, pvalue,
                      threec_match)
from .matrix_core import (CenteredFactor, DataError, DataMatrix, center,
                          sample_mean, tr_cov, tr_cov_cross, tr_cov_sq,
                          tr_cov_triple)
from .report import TestReport
from .trace_estimators import (est_tr_corr_sq, est_tr_sigma2, pooled_center,
                               trace_estimates)
from .two_sample import _method_and_params

NULL_TEXT = "The general linear hypothesis is true"
ALT_TEXT = "The general linear hypothesis is not true"

_RANK_TOL = 1e-12


def _sym_inv_sqrt(m: np.ndarray, what: str) -> np.ndarray:
    """Inverse symmetric square root, rejecting rank-deficient input."""
    w, v = np.linalg.eigh((m + m.T) / 2.0)
    if w[0] <= _RANK_TOL * max(w[-1], 1.0):
        raise DataError(f"{what} is rank deficient")
    return (v / np.sqrt(w)) @ v.T


def build_contrast(contrast: np.ndarray, ns: tuple[int, ...]) -> np.ndarray:
    """Whitened contrast A = (G B G')^{-1/2} G with B = diag(1/n_i)."""
    g = np.asarray(contrast, dtype=float)
    if g.ndim != 2 or g.shape[1] != len(ns):
        raise DataError(
            f"contrast must be q x {len(ns)}, got shape {g.shape}")
    if g.shape[0] > g.shape[1]:
        raise DataError("contrast has more rows than groups")
    b = np.diag(1.0 / np.asarray(ns, dtype=float))
    return _sym_inv_sqrt(g @ b @ g.T, "contrast Gram matrix") @ g


@dataclass
class _GlhtPrep:
    groups: list[DataMatrix]
    z: list[CenteredFactor]
    ns: tuple[int, ...]
    n: int
    k: int
    p: int
    q: int
    h: np.ndarray          # H = A'A, k x k
    t: float               # || A Ybar ||_F^2


def _prepare(groups: list[DataMatrix], contrast: np.ndarray) -> _GlhtPrep:
    if len(groups) < 2:
        raise DataError("need at least 2 groups")
    p = groups[0].p
    for i, g in enumerate(groups):
        if g.p != p:
            raise DataError(f"group {i} has dimension {g.p}, expected {p}")
        if g.n < 2:
            raise DataError(f"group {i} has fewer than 2 observations")
    ns = tuple(g.n for g in groups)
    a = build_contrast(contrast, ns)
    ybar = np.stack([sample_mean(g) for g in groups])
    au = a @ ybar
    return _GlhtPrep(
        groups=list(groups), z=[center(g) for g in groups], ns=ns,
        n=sum(ns), k=len(groups), p=p, q=a.shape[0], h=a.T @ a,
        t=float(np.sum(au * au)),
    )


def _report(test_id, test_name, stat_name, stat, p_value, method, params,
            prep: _GlhtPrep) -> TestReport:
    return TestReport(
        test_id=test_id, test_name=test_name, statistic_name=stat_name,
        statistic=float(stat), p_value=float(p_value), approx_method=method,
        params=dict(params), n=prep.ns, p=prep.p,
        null_text=NULL_TEXT, alt_text=ALT_TEXT, data_name="Y",
    )


def _pair_traces(prep: _GlhtPrep) -> np.ndarray:
    """Matrix of estimated tr(Sigma_i Sigma_j).

    Diagonal entries use the bias-corrected single-group estimator; cross
    entries are unbiased plug-ins already.
    """
    k = prep.k
    out = np.empty((k, k))
    for i in range(k):
        out[i, i] = est_tr_sigma2(tr_cov_sq(prep.z[i]), tr_cov(prep.z[i]),
                                  prep.z[i].df)
        for j in range(i + 1, k):
            out[i, j] = out[j, i] = tr_cov_cross(prep.z[i], prep.z[j])
    return out


def glht_zzg2022(groups: list[DataMatrix], contrast: np.ndarray) -> TestReport:
    prep = _prepare(groups, contrast)
    ns = np.asarray(prep.ns, dtype=float)
    hd = np.diag(prep.h)
    tr1 = np.array([tr_cov(z) for z in prep.z])
    pair = _pair_traces(prep)
    k1 = float(np.sum(hd * tr1 / ns))
    scaled = prep.h**2 * pair / np.outer(ns, ns)
    k2 = 2.0 * float(np.sum(scaled))
    params = chi2mix.ws_match(k1, k2)
    method, pdict = _method_and_params(params)
    return _report("zzg2022", "Zhang et al. (2022)'s test", "T[ZZG]",
                   prep.t, pvalue(prep.t, params), method, pdict, prep)


def glht_zgz2017(groups: list[DataMatrix], contrast: np.ndarray) -> TestReport:
    prep = _prepare(groups, contrast)
    zp = pooled_center(groups)
    est = trace_estimates(zp, with_third=False)
    df = prep.q * est.tr2S_hat / est.trS2_hat
    params = WSApprox(beta=prep.q * est.trS / df, df=df)
    method, pdict = _method_and_params(params)
    return _report("zgz2017", "Zhang et al. (2017)'s test", "T[ZGZ]",
                   prep.t, pvalue(prep.t, params), method, pdict, prep)


def glht_zz2022_homo(groups: list[DataMatrix],
                     contrast: np.ndarray) -> TestReport:
    prep = _prepare(groups, contrast)
    zp = pooled_center(groups)
    est = trace_estimates(zp)
    q, m = prep.q, zp.df
    t = prep.t - q * est.trS
    k2 = 2.0 * est.trS2_hat * (q + q**2 / m)
    k3 = 8.0 * est.trS3_hat * (q - q**3 / m**2)
    params = threec_match(CumulantTriple(0.0, k2, k3))
    method, pdict = _method_and_params(params)
    return _report("zz2022-homo", "Zhu and Zhang (2022)'s test", "T[ZZ]",
                   t, pvalue(t, params), method, pdict, prep)


def _bf_cumulants(prep: _GlhtPrep) -> tuple[float, float, float]:
    """Centered statistic and its second/third null cumulants under
    heteroscedastic covariances."""
    ns = np.asarray(prep.ns, dtype=float)
    hd = np.diag(prep.h)
    tr1 = np.array([tr_cov(z) for z in prep.z])
    ests = [trace_estimates(z) for z in prep.z]
    pair = _pair_traces(prep)

    t = prep.t - float(np.sum(hd * tr1 / ns))

    tr_omega2 = float(np.sum(prep.h**2 * pair / np.outer(ns, ns)))
    k2 = 2.0 * (tr_omega2 + float(np.sum(
        hd**2 * np.array([e.trS2_hat for e in ests])
        / (ns**2 * (ns - 1)))))

    # tr(S_i S_j S_l) plug-ins are symmetric in the index multiset
    triple_cache: dict[tuple[int, int, int], float] = {}

    def triple(i: int, j: int, l: int) -> float:
        key = tuple(sorted((i, j, l)))
        if key not in triple_cache:
            if key[0] == key[2]:
                triple_cache[key] = ests[key[0]].trS3_hat
            else:
                triple_cache[key] = tr_cov_triple(
                    prep.z[key[0]], prep.z[key[1]], prep.z[key[2]])
        return triple_cache[key]

    tr_omega3 = 0.0
    for i in range(prep.k):
        for j in range(prep.k):
            for l in range(prep.k):
                w = prep.h[i, j] * prep.h[j, l] * prep.h[l, i]
                if w != 0.0:
                    tr_omega3 += w * triple(i, j, l) / (ns[i] * ns[j] * ns[l])
    k3 = 8.0 * (tr_omega3 - float(np.sum(
        hd**3 * np.array([e.trS3_hat for e in ests])
        / (ns**3 * (ns - 1)**2))))
    return t, k2, k3


def glht_zz2022_bf(groups: list[DataMatrix],
                   contrast: np.ndarray) -> TestReport:
    prep = _prepare(groups, contrast)
    t, k2, k3 = _bf_cumulants(prep)
    params = threec_match(CumulantTriple(0.0, k2, k3))
    method, pdict = _method_and_params(params)
    return _report("zz2022-bf", "Zhang and Zhu (2022)'s test", "T[ZZ]",
                   t, pvalue(t, params), method, pdict, prep)


def glht_zhou2017(groups: list[DataMatrix],
                  contrast: np.ndarray) -> TestReport:
    prep = _prepare(groups, contrast)
    t, k2, _ = _bf_cumulants(prep)
    z = t / np.sqrt(k2)
    return _report("zhou2017", "Zhou et al. (2017)'s test", "T[ZGZ]",
                   t, norm_sf(z), "Normal approximation", {}, prep)


def glht_z3_regression(y: np.ndarray, x: np.ndarray,
                       c: np.ndarray) -> tuple[float, float, float]:
    """Scale-invariant GLHT test in regression form.

    y is the stacked n-by-p response, x the n-by-f design matrix, and c a
    q-by-f coefficient contrast testing C theta = 0. Returns the statistic,
    the approximating degrees of freedom, and the p-value. Only n-by-n and
    f-by-f products are formed.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    if y.ndim != 2 or x.ndim != 2 or y.shape[0] != x.shape[0]:
        raise DataError("response and design must share the row count")
    n, p = y.shape
    f = x.shape[1]
    if c.ndim != 2 or c.shape[1] != f:
        raise DataError(f"coefficient contrast must be q x {f}")
    if n - f < 3:
        raise DataError("need residual degrees of freedom >= 3")
    xtx = x.T @ x
    w, v = np.linalg.eigh(xtx)
    if w[0] <= _RANK_TOL * max(w[-1], 1.0):
        raise DataError("design matrix is rank deficient")
    xtx_inv = (v / w) @ v.T
    theta = xtx_inv @ (x.T @ y)
    resid = y - x @ theta
    ss = np.sum(resid * resid, axis=0)
    if np.any(ss <= 0):
        j = int(np.argmin(ss))
        raise DataError(
            f"zero residual variance in column {j}; stabilize() was skipped")

    q = c.shape[0]
    u = _sym_inv_sqrt(c @ xtx_inv @ c.T, "coefficient contrast Gram") \
        @ (c @ theta)
    m = n - f
    t = (m - 2) / (m * p * q) * float(np.sum(
        np.sum(u * u, axis=0) * m / ss))

    # tr(R_e^2) of the residual correlation matrix via the n-space Gram
    rt = CenteredFactor(resid / np.sqrt(ss), 1)
    tr_re2 = tr_cov_sq(rt)
    df = p**2 * q / est_tr_corr_sq(tr_re2, p, m)
    p_value = chi2mix.chi2_sf(df, t * df)
    return t, df, p_value


def _indicator_design(ns: tuple[int, ...]) -> np.ndarray:
    x = np.zeros((sum(ns), len(ns)))
    start = 0
    for i, ni in enumerate(ns):
        x[start:start + ni, i] = 1.0
        start += ni
    return x


def glht_z3(groups: list[DataMatrix], contrast: np.ndarray) -> TestReport:
    prep = _prepare(groups, contrast)
    y = np.vstack([g.values for g in prep.groups])
    t, df, p_value = glht_z3_regression(
        y, _indicator_design(prep.ns), np.asarray(contrast, dtype=float))
    return _report("z3", "Zhu et al. (2022)'s test", "T[ZZZ]",
                   t, p_value, "2-c matched chi^2-approximation",
                   {"df": df}, prep)


GLHT_TESTS = {
    "zgz2017": glht_zgz2017,
    "zzg2022": glht_zzg2022,
    "zz2022-homo": glht_zz2022_homo,
    "zz2022-bf": glht_zz2022_bf,
    "zhou2017": glht_zhou2017,
    "z3": glht_z3,
}

NORMAL_REFERENCE_TESTS = (
    "zgz2017", "zzg2022", "zz2022-homo", "zz2022-bf", "z3",
)

# Each entry maps a GLHT test at k = 2 with contrast (1, -1) to its
# two-sample counterpart; `scale` multiplies the two-sample statistic to
# give the GLHT one (p-values agree either way).
TWO_SAMPLE_REDUCTIONS = {
    "zgz2017": ("zgzc2020", "statistic"),
    "zzg2022": ("zzgz2021", "statistic"),
    "zz2022-homo": ("zz2022-ts", "statistic"),
    "zz2022-bf": ("zz2022-tsbf", "n1n2_over_n"),
    "zhou2017": ("cq2010", "normal_z"),
}
