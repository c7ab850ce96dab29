"""Data model and the Gram-matrix trace engine.

All covariance trace functionals are evaluated from centered data factors,
picking whichever of the n-by-n or p-by-p Gram product is cheaper, so the
cost is O(min(n^2 p, n p^2)) and a p-by-p covariance matrix is never formed
when p > n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    """Invalid or degenerate input data."""


@dataclass(frozen=True)
class DataMatrix:
    """An n-by-p sample; rows are observations, columns are variables."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError(f"expected a 2-d array, got shape {values.shape}")
        if values.shape[0] < 1:
            raise DataError("need at least one observation")
        bad = ~np.isfinite(values)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise DataError(f"non-finite entry at row {i}, column {j}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CenteredFactor:
    """Column-centered data Z with the degrees of freedom of its covariance.

    The implied sample covariance is Z'Z / df; it is never materialized
    unless an operation explicitly benefits from the p-by-p Gram product.
    """

    Z: np.ndarray
    df: int

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def p(self) -> int:
        return self.Z.shape[1]


def stabilize(x: DataMatrix, eps: float = 1e-10) -> DataMatrix:
    """Add eps to the zero entries of any constant column.

    This is the ingestion-time guard that keeps diagonal-variance inverses
    defined when a variable is identically zero in the sample.
    """
    values = x.values
    constant = np.ptp(values, axis=0) == 0
    if not constant.any():
        return x
    values = values.copy()
    cols = np.flatnonzero(constant)
    zero = values[:, cols] == 0
    values[:, cols] += eps * zero
    return DataMatrix(values)


def sample_mean(x: DataMatrix) -> np.ndarray:
    return x.values.mean(axis=0)


def center(x: DataMatrix) -> CenteredFactor:
    """Center columns; the result carries n - 1 degrees of freedom."""
    if x.n < 2:
        raise DataError("centering requires at least 2 observations")
    return CenteredFactor(x.values - x.values.mean(axis=0), x.n - 1)


def tr_cov(zc: CenteredFactor) -> float:
    """tr of the sample covariance, O(np)."""
    return float(np.sum(zc.Z * zc.Z)) / zc.df


def tr_cov_sq(zc: CenteredFactor) -> float:
    """tr of the squared sample covariance via the cheaper Gram product."""
    z = zc.Z
    if zc.p <= zc.n:
        g = z.T @ z
    else:
        g = z @ z.T
    return float(np.sum(g * g)) / zc.df**2


def tr_cov_cross(za: CenteredFactor, zb: CenteredFactor) -> float:
    """tr(S_a S_b) for the two sample covariances, cheaper Gram path."""
    if za.p != zb.p:
        raise DataError(f"dimension mismatch: {za.p} vs {zb.p}")
    if za.n * zb.n <= za.p**2:
        m = za.Z @ zb.Z.T
        val = float(np.sum(m * m))
    else:
        val = float(np.sum((za.Z.T @ za.Z) * (zb.Z.T @ zb.Z)))
    return val / (za.df * zb.df)


def tr_cov_triple(za: CenteredFactor, zb: CenteredFactor,
                  zc: CenteredFactor) -> float:
    """tr(S_a S_b S_c) assembled from n-space cross products."""
    if not (za.p == zb.p == zc.p):
        raise DataError("dimension mismatch between factors")
    m_ab = za.Z @ zb.Z.T
    m_bc = zb.Z @ zc.Z.T
    m_ca = zc.Z @ za.Z.T
    val = float(np.einsum("ij,jk,ki->", m_ab, m_bc, m_ca))
    return val / (za.df * zb.df * zc.df)


def diag_cov(zc: CenteredFactor) -> np.ndarray:
    """Per-coordinate sample variances; requires prior stabilization."""
    d = np.sum(zc.Z * zc.Z, axis=0) / zc.df
    if np.any(d <= 0):
        j = int(np.argmin(d))
        raise DataError(
            f"zero sample variance in column {j}; stabilize() was skipped"
        )
    return d


def tr_corr_sq(zc: CenteredFactor, d: np.ndarray) -> float:
    """tr(R^2) for the correlation matrix implied by variances d."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DataError("nonpositive variance entry")
    scaled = CenteredFactor(zc.Z / np.sqrt(d), zc.df)
    return tr_cov_sq(scaled)
