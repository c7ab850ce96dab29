"""Monte Carlo machinery: data generation, mixture tails, size studies.

Size studies are reproducible across thread counts: replicate r always
uses the child stream SeedSequence(seed, spawn_key=(r,)) and writes into
its own slot of a preallocated array, so the reduction order is fixed no
matter how the replicates are scheduled.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .chi2mix import ChiSquareMixture
from .matrix_core import (DataError, DataMatrix, center, tr_cov, tr_cov_sq,
                          tr_cov_triple)
from .trace_estimators import est_tr_sigma2, est_tr2_sigma, est_tr_sigma3
from . import two_sample as ts_mod
from . import glht as glht_mod


@dataclass(frozen=True)
class CovarianceSpec:
    """Covariance model for generated data.

    kind: "ar1" (rho^|i-j|), "cs" (compound symmetry rho off-diagonal),
    or "diag" (identity scaled by sigma2).
    """

    kind: str
    p: int
    rho: float = 0.0
    sigma2: float = 1.0

    def matrix(self) -> np.ndarray:
        if self.p < 1:
            raise DataError("dimension must be positive")
        if self.kind == "ar1":
            idx = np.arange(self.p)
            return self.sigma2 * self.rho ** np.abs(
                idx[:, None] - idx[None, :])
        if self.kind == "cs":
            if not -1.0 / (self.p - 1) < self.rho < 1.0:
                raise DataError(f"compound symmetry needs valid rho, "
                                f"got {self.rho}")
            m = np.full((self.p, self.p), self.sigma2 * self.rho)
            np.fill_diagonal(m, self.sigma2)
            return m
        if self.kind == "diag":
            return self.sigma2 * np.eye(self.p)
        raise DataError(f"unknown covariance kind {self.kind!r}")

    def factor(self) -> np.ndarray:
        """Lower-triangular Gamma with Gamma Gamma' = Sigma."""
        if self.kind == "diag":
            return np.sqrt(self.sigma2) * np.eye(self.p)
        return np.linalg.cholesky(self.matrix())


def draw_innovations(rng: np.random.Generator, n: int, p: int,
                     dist: str) -> np.ndarray:
    """iid innovations with mean 0 and variance 1.

    dist: "normal", "exp" (centered Exp(1)), or "t<df>" (standardized).
    """
    if dist == "normal":
        return rng.standard_normal((n, p))
    if dist == "exp":
        return rng.exponential(1.0, (n, p)) - 1.0
    if dist.startswith("t"):
        df = float(dist[1:])
        if df <= 2:
            raise DataError("t innovations need df > 2 for unit variance")
        return rng.standard_t(df, (n, p)) / np.sqrt(df / (df - 2.0))
    raise DataError(f"unknown innovation distribution {dist!r}")


def icm_generate(rng: np.random.Generator, n: int, mu: np.ndarray,
                 gamma: np.ndarray, dist: str = "normal") -> DataMatrix:
    """Independent-component sample y = mu + Gamma z, z iid standardized."""
    mu = np.asarray(mu, dtype=float)
    p = gamma.shape[0]
    z = draw_innovations(rng, n, gamma.shape[1], dist)
    return DataMatrix(mu + z @ gamma.T)


def mixture_mc_tail(mix: ChiSquareMixture, t: float, draws: int,
                    seed: int, chunk: int = 200_000) -> tuple[float, float]:
    """Monte Carlo upper-tail probability of the mixture at t.

    Returns (estimate, standard error).
    """
    if draws < 1:
        raise DataError("need at least one draw")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    hits = 0
    done = 0
    while done < draws:
        m = min(chunk, draws - done)
        total = np.zeros(m)
        for c, d in zip(mix.coeffs, mix.dfs):
            if d == 1:
                total += c * rng.standard_normal(m) ** 2
            else:
                total += c * rng.chisquare(d, m)
        hits += int(np.count_nonzero(total > t))
        done += m
    phat = hits / draws
    se = np.sqrt(max(phat * (1.0 - phat), 1.0 / draws) / draws)
    return phat, se


@dataclass(frozen=True)
class SizeStudyConfig:
    """One empirical-size experiment under the null.

    Two data modes: "generate" draws fresh null samples from `cov`/`dist`
    per replicate; "split" resamples `split_size` rows without replacement
    from a single supplied sample, testing the two halves against each
    other.
    """

    tests: tuple[str, ...]
    ns: tuple[int, ...] = ()
    cov: CovarianceSpec | None = None
    dist: str = "normal"
    nrep: int = 1000
    alphas: tuple[float, ...] = (0.05,)
    seed: int = 0
    family: str = "twosample"          # or "glht"
    contrast: tuple[tuple[float, ...], ...] | None = None
    mode: str = "generate"             # or "split"
    split_size: int | None = None

    def __post_init__(self):
        if self.family not in ("twosample", "glht"):
            raise DataError(f"unknown family {self.family!r}")
        registry = (ts_mod.TWO_SAMPLE_TESTS if self.family == "twosample"
                    else glht_mod.GLHT_TESTS)
        unknown = [t for t in self.tests if t not in registry]
        if unknown:
            raise DataError(f"unknown test ids: {unknown}")
        if self.mode not in ("generate", "split"):
            raise DataError(f"unknown mode {self.mode!r}")
        if self.mode == "split" and self.family != "twosample":
            raise DataError("split mode is a two-sample resampling scheme")
        if self.mode == "generate":
            if self.cov is None:
                raise DataError("generate mode needs a covariance spec")
            if self.family == "twosample" and len(self.ns) != 2:
                raise DataError(
                    "two-sample study needs exactly 2 group sizes")
            if self.family == "glht" and self.contrast is None:
                raise DataError("glht study needs a contrast")
        if self.nrep < 1:
            raise DataError("nrep must be >= 1")
        if not all(0 < a < 1 for a in self.alphas):
            raise DataError("alpha levels must be in (0, 1)")


def _replicate_groups(cfg: SizeStudyConfig, gamma: np.ndarray | None,
                      data: DataMatrix | None,
                      rng: np.random.Generator) -> list[DataMatrix]:
    if cfg.mode == "generate":
        mu = np.zeros(cfg.cov.p)
        return [icm_generate(rng, n, mu, gamma, cfg.dist) for n in cfg.ns]
    half = cfg.split_size or data.n // 2
    sel = rng.choice(data.n, size=half, replace=False)
    mask = np.zeros(data.n, dtype=bool)
    mask[sel] = True
    return [DataMatrix(data.values[mask]), DataMatrix(data.values[~mask])]


def _replicate(cfg: SizeStudyConfig, gamma: np.ndarray | None,
               data: DataMatrix | None,
               rep: int) -> tuple[np.ndarray, list[dict[str, float]]]:
    rng = np.random.default_rng(
        np.random.SeedSequence(cfg.seed, spawn_key=(rep,)))
    groups = _replicate_groups(cfg, gamma, data, rng)
    pvals = np.empty(len(cfg.tests))
    params: list[dict[str, float]] = []
    if cfg.family == "twosample":
        inp = ts_mod.TwoSampleInput(groups[0], groups[1])
        for j, tid in enumerate(cfg.tests):
            rep_out = ts_mod.TWO_SAMPLE_TESTS[tid](inp)
            pvals[j] = rep_out.p_value
            params.append(rep_out.params)
    else:
        contrast = np.asarray(cfg.contrast, dtype=float)
        for j, tid in enumerate(cfg.tests):
            rep_out = glht_mod.GLHT_TESTS[tid](groups, contrast)
            pvals[j] = rep_out.p_value
            params.append(rep_out.params)
    return pvals, params


@dataclass(frozen=True)
class SizeStudyResult:
    """Rejection rates per test and alpha, plus mean fitted parameters."""

    config: SizeStudyConfig
    pvalues: np.ndarray           # nrep x ntests
    mean_params: dict[str, dict[str, float]]
    rng_algorithm: str = "PCG64"
    sizes: dict[str, dict[float, float]] = field(init=False)
    rejection_counts: dict[str, dict[float, int]] = field(init=False)

    def __post_init__(self):
        sizes: dict[str, dict[float, float]] = {}
        counts: dict[str, dict[float, int]] = {}
        for j, t in enumerate(self.config.tests):
            counts[t] = {
                a: int(np.count_nonzero(self.pvalues[:, j] <= a))
                for a in self.config.alphas}
            sizes[t] = {a: c / self.config.nrep
                        for a, c in counts[t].items()}
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "rejection_counts", counts)


def empirical_size(cfg: SizeStudyConfig, threads: int = 1,
                   data: DataMatrix | None = None) -> SizeStudyResult:
    """Null rejection rates; bit-identical for any thread count."""
    if threads < 1:
        raise DataError("threads must be >= 1")
    if cfg.mode == "split":
        if data is None:
            raise DataError("split mode needs the pooled data sample")
        half = cfg.split_size or data.n // 2
        if not 2 <= half <= data.n - 2:
            raise DataError("split size leaves a group with < 2 rows")
        gamma = None
    else:
        gamma = cfg.cov.factor()
    pvalues = np.empty((cfg.nrep, len(cfg.tests)))
    all_params: list[list[dict[str, float]] | None] = [None] * cfg.nrep

    def run(rep: int) -> None:
        pvalues[rep], all_params[rep] = _replicate(cfg, gamma, data, rep)

    if threads == 1:
        for rep in range(cfg.nrep):
            run(rep)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # consume to surface worker exceptions
            for _ in pool.map(run, range(cfg.nrep)):
                pass

    mean_params: dict[str, dict[str, float]] = {}
    for j, tid in enumerate(cfg.tests):
        keys = all_params[0][j].keys()
        # fixed replicate order keeps the reduction deterministic
        mean_params[tid] = {
            k: sum(all_params[r][j][k] for r in range(cfg.nrep)) / cfg.nrep
            for k in keys}
    return SizeStudyResult(cfg, pvalues, mean_params)


def estimator_bias_audit(cov: CovarianceSpec, n: int, nrep: int,
                         seed: int = 0) -> dict[str, float]:
    """Relative Monte Carlo bias of the trace-functional estimators.

    Generates normal samples from the given covariance and compares the
    averaged corrected estimates against the exact population values.
    """
    sigma = cov.matrix()
    s2 = sigma @ sigma
    truth = {
        "tr_sigma2": float(np.trace(s2)),
        "tr2_sigma": float(np.trace(sigma)) ** 2,
        "tr_sigma3": float(np.trace(s2 @ sigma)),
    }
    gamma = cov.factor()
    mu = np.zeros(cov.p)
    sums = dict.fromkeys(truth, 0.0)
    for rep in range(nrep):
        rng = np.random.default_rng(
            np.random.SeedSequence(seed, spawn_key=(rep,)))
        zc = center(icm_generate(rng, n, mu, gamma))
        t1, t2 = tr_cov(zc), tr_cov_sq(zc)
        e2 = est_tr_sigma2(t2, t1, zc.df)
        sums["tr_sigma2"] += e2
        sums["tr2_sigma"] += est_tr2_sigma(t1, e2, zc.df)
        sums["tr_sigma3"] += est_tr_sigma3(
            tr_cov_triple(zc, zc, zc), t2, t1, zc.df)
    return {k: sums[k] / nrep / truth[k] - 1.0 for k in truth}
