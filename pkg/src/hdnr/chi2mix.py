"""Cumulant matching for chi-square-type mixtures.

A mixture sum(c_r * A_r) with A_r ~ chi2(d_r) is the canonical null object
here. Its distribution is approximated by matching two cumulants (a scaled
chi-square), three cumulants (shifted scaled chi-square), an F ratio, or a
normal when the mixture is effectively symmetric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

# skewness threshold below which a three-cumulant fit degenerates to normal
_SYMMETRY_TOL = 1e-8


class ApproxError(ValueError):
    """Invalid cumulants or approximation parameters."""


@dataclass(frozen=True)
class ChiSquareMixture:
    coeffs: np.ndarray
    dfs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=float)
        dfs = np.asarray(self.dfs, dtype=int)
        if coeffs.shape != dfs.shape or coeffs.ndim != 1:
            raise ApproxError("coeffs and dfs must be 1-d of equal length")
        if np.any(dfs < 1):
            raise ApproxError("degrees of freedom must be >= 1")
        if not np.any(coeffs != 0):
            raise ApproxError("at least one coefficient must be nonzero")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "dfs", dfs)


@dataclass(frozen=True)
class CumulantTriple:
    k1: float
    k2: float
    k3: float

    def __post_init__(self):
        if self.k2 <= 0:
            raise ApproxError(f"second cumulant must be positive, got {self.k2}")


@dataclass(frozen=True)
class WSApprox:
    """Two-cumulant match: beta * chi2(df)."""

    beta: float
    df: float


@dataclass(frozen=True)
class ThreeCApprox:
    """Three-cumulant match: beta0 + beta1 * chi2(df).

    When fitted to the negated statistic (left-skewed mixture), `negated`
    flips the tail evaluated by `pvalue`.
    """

    beta0: float
    beta1: float
    df: float
    negated: bool = False


@dataclass(frozen=True)
class FApprox:
    df1: float
    df2: float


@dataclass(frozen=True)
class NormalApprox:
    mean: float
    var: float


ApproxParams = WSApprox | ThreeCApprox | FApprox | NormalApprox


def mixture_cumulant(mix: ChiSquareMixture, ell: int) -> float:
    """K_ell = 2^(ell-1) (ell-1)! sum(c_r^ell d_r)."""
    if ell not in (1, 2, 3):
        raise ApproxError(f"cumulant order must be 1, 2 or 3, got {ell}")
    return float(2 ** (ell - 1) * math.factorial(ell - 1)
                 * np.sum(self_pow(mix.coeffs, ell) * mix.dfs))


def self_pow(c: np.ndarray, ell: int) -> np.ndarray:
    return c if ell == 1 else c**ell


def ws_match(k1: float, k2: float) -> WSApprox:
    if k1 <= 0 or k2 <= 0:
        raise ApproxError(f"cumulants must be positive, got ({k1}, {k2})")
    return WSApprox(beta=k2 / (2.0 * k1), df=2.0 * k1**2 / k2)


def threec_match(k: CumulantTriple) -> ThreeCApprox | NormalApprox:
    skew = k.k3 / k.k2**1.5
    if abs(skew) <= _SYMMETRY_TOL:
        return NormalApprox(mean=k.k1, var=k.k2)
    if k.k3 > 0:
        k1, k3, negated = k.k1, k.k3, False
    else:
        # fit the mirrored statistic, which is right-skewed
        k1, k3, negated = -k.k1, -k.k3, True
    return ThreeCApprox(
        beta0=k1 - 2.0 * k.k2**2 / k3,
        beta1=k3 / (4.0 * k.k2),
        df=8.0 * k.k2**3 / k3**2,
        negated=negated,
    )


def f_match(k1_num: float, k2_num: float,
            k1_den: float, k2_den: float) -> FApprox:
    for v in (k1_num, k2_num, k1_den, k2_den):
        if v <= 0:
            raise ApproxError("all cumulants must be positive")
    return FApprox(df1=2.0 * k1_num**2 / k2_num,
                   df2=2.0 * k1_den**2 / k2_den)


def chi2_sf(d: float, x: float) -> float:
    if d <= 0:
        raise ApproxError(f"degrees of freedom must be positive, got {d}")
    if x < 0:
        raise ApproxError(f"chi-square support is nonnegative, got {x}")
    return float(stats.chi2.sf(x, d))


def f_sf(d1: float, d2: float, x: float) -> float:
    if d1 <= 0 or d2 <= 0:
        raise ApproxError("degrees of freedom must be positive")
    if x < 0:
        raise ApproxError(f"F support is nonnegative, got {x}")
    return float(stats.f.sf(x, d1, d2))


def norm_sf(z: float) -> float:
    return float(stats.norm.sf(z))


def pvalue(t: float, params: ApproxParams) -> float:
    """Upper-tail probability of the approximating distribution at t."""
    if isinstance(params, WSApprox):
        x = t / params.beta
        return 1.0 if x < 0 else chi2_sf(params.df, x)
    if isinstance(params, ThreeCApprox):
        if params.negated:
            # P(T >= t) = P(-T <= -t) under the mirrored fit
            x = (-t - params.beta0) / params.beta1
            return 0.0 if x < 0 else float(stats.chi2.cdf(x, params.df))
        x = (t - params.beta0) / params.beta1
        return 1.0 if x < 0 else chi2_sf(params.df, x)
    if isinstance(params, FApprox):
        return 1.0 if t < 0 else f_sf(params.df1, params.df2, t)
    if isinstance(params, NormalApprox):
        return norm_sf((t - params.mean) / math.sqrt(params.var))
    raise ApproxError(f"unknown approximation parameters: {params!r}")
