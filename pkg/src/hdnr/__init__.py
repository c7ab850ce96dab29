"""Normal-reference tests for high-dimensional mean-vector hypotheses."""

from .chi2mix import (ApproxError, ChiSquareMixture, CumulantTriple, FApprox,
                      NormalApprox, ThreeCApprox, WSApprox, f_match,
                      mixture_cumulant, pvalue, threec_match, ws_match)
from .glht import GLHT_TESTS, build_contrast, glht_z3_regression
from .io import load_contrast, load_matrix, write_matrix
from .matrix_core import (CenteredFactor, DataError, DataMatrix, center,
                          diag_cov, sample_mean, stabilize, tr_corr_sq,
                          tr_cov, tr_cov_cross, tr_cov_sq, tr_cov_triple)
from .report import TestReport, render_text, to_json, to_json_dict
from .simulate import (CovarianceSpec, SizeStudyConfig, SizeStudyResult,
                       empirical_size, estimator_bias_audit, icm_generate,
                       mixture_mc_tail)
from .trace_estimators import (TraceEstimates, adjustment_cpn,
                               est_tr_corr_sq, est_tr2_sigma, est_tr_sigma2,
                               est_tr_sigma3, pooled_center, trace_estimates)
from .two_sample import TWO_SAMPLE_TESTS, TwoSampleInput

__all__ = [
    "ApproxError", "ChiSquareMixture", "CumulantTriple", "FApprox",
    "NormalApprox", "ThreeCApprox", "WSApprox", "f_match",
    "mixture_cumulant", "pvalue", "threec_match", "ws_match",
    "GLHT_TESTS", "build_contrast", "glht_z3_regression",
    "load_contrast", "load_matrix", "write_matrix",
    "CenteredFactor", "DataError", "DataMatrix", "center", "diag_cov",
    "sample_mean", "stabilize", "tr_corr_sq", "tr_cov", "tr_cov_cross",
    "tr_cov_sq", "tr_cov_triple",
    "TestReport", "render_text", "to_json", "to_json_dict",
    "CovarianceSpec", "SizeStudyConfig", "SizeStudyResult",
    "empirical_size", "estimator_bias_audit", "icm_generate",
    "mixture_mc_tail",
    "TraceEstimates", "adjustment_cpn", "est_tr_corr_sq", "est_tr2_sigma",
    "est_tr_sigma2", "est_tr_sigma3", "pooled_center", "trace_estimates",
    "TWO_SAMPLE_TESTS", "TwoSampleInput",
]

__version__ = "0.1.0"
