"""Bias-corrected estimators of covariance trace functionals.

The corrections are the Wishart-moment ones, exact under normality, which
is the right family here: they only calibrate the parameters of a
normal-reference null distribution. Cross traces between independent
groups need no correction and are used as plain plug-ins.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matrix_core import (CenteredFactor, DataError, DataMatrix, tr_cov,
                          tr_cov_sq, tr_cov_triple)


def est_tr_sigma2(trS2_plugin: float, trS_plugin: float, m: int) -> float:
    """Unbiased (under normality) estimate of tr(Sigma^2) from plug-ins."""
    if m < 3:
        raise DataError(f"need at least 3 degrees of freedom, got {m}")
    val = m * (m * trS2_plugin - trS_plugin**2) / ((m - 1) * (m + 2))
    # noise floor: the population value is nonnegative
    return max(val, 1e-12 * trS_plugin**2)


def est_tr2_sigma(trS_plugin: float, trS2_unbiased: float, m: int) -> float:
    """Unbiased estimate of tr^2(Sigma); floored so that d-hat >= 1."""
    if m < 3:
        raise DataError(f"need at least 3 degrees of freedom, got {m}")
    val = trS_plugin**2 - 2.0 * trS2_unbiased / m
    return max(val, trS2_unbiased)


def est_tr_sigma3(trS3_plugin: float, trS2_plugin: float, trS_plugin: float,
                  m: int) -> float:
    """Bias-corrected estimate of tr(Sigma^3) from plug-in traces."""
    if m < 5:
        raise DataError(f"need at least 5 degrees of freedom, got {m}")
    c_m = m**4 / ((m - 1) * (m - 2) * (m + 2) * (m + 4))
    bracket = (trS3_plugin
               - 3.0 * trS_plugin * trS2_plugin / m
               + 2.0 * trS_plugin**3 / m**2)
    return c_m * bracket


def est_tr_corr_sq(trR2_plugin: float, p: int, m: int) -> float:
    """Corrected tr(R^2); tr(R^2) >= p for any correlation matrix."""
    if m < 3:
        raise DataError(f"need at least 3 degrees of freedom, got {m}")
    return max(trR2_plugin - p**2 / m, float(p))


def adjustment_cpn(trR2_plugin: float, p: int) -> float:
    """Convergence adjustment coefficient 1 + tr(R^2) / p^(3/2)."""
    if p < 1:
        raise DataError("dimension must be positive")
    return 1.0 + trR2_plugin * p ** (-1.5)


def pooled_center(groups: list[DataMatrix]) -> CenteredFactor:
    """Stack per-group-centered rows; covariance gets n - k df."""
    if len(groups) < 2:
        raise DataError("need at least 2 groups to pool")
    p = groups[0].p
    rows = []
    for i, g in enumerate(groups):
        if g.p != p:
            raise DataError(f"group {i} has dimension {g.p}, expected {p}")
        if g.n < 2:
            raise DataError(f"group {i} has fewer than 2 observations")
        rows.append(g.values - g.values.mean(axis=0))
    n = sum(g.n for g in groups)
    return CenteredFactor(np.vstack(rows), n - len(groups))


@dataclass(frozen=True)
class TraceEstimates:
    """Corrected trace functionals of one covariance matrix."""

    trS: float
    trS2_hat: float
    tr2S_hat: float
    trS3_hat: float
    m: int


def trace_estimates(zc: CenteredFactor, with_third: bool = True) -> TraceEstimates:
    t1 = tr_cov(zc)
    t2 = tr_cov_sq(zc)
    t2_hat = est_tr_sigma2(t2, t1, zc.df)
    t2sq_hat = est_tr2_sigma(t1, t2_hat, zc.df)
    if with_third:
        t3 = tr_cov_triple(zc, zc, zc)
        t3_hat = est_tr_sigma3(t3, t2, t1, zc.df)
    else:
        t3_hat = float("nan")
    return TraceEstimates(t1, t2_hat, t2sq_hat, t3_hat, zc.df)
