"""Gamma and Variance-Gamma approximants for correlated chi-squared and gamma variables."""
from corrgamma.approx import (CorrelatedSumSpec, MomentSummary, approx_diff_chisq,
                              approx_diff_gamma, approx_sum_chisq_equal, approx_sum_chisq_n,
                              approx_sum_chisq_pair, approx_sum_gamma_n)
from corrgamma.distributions import (GammaParams, VGGenHyp, VGSeneta, gh_to_seneta,
                                     seneta_to_gh, vg_cdf, vg_pdf)
from corrgamma.errors import ConvergenceError, DegenerateDistributionError, DomainError
from corrgamma.streams import make_stream, split_streams

__version__ = "0.1.0"

__all__ = [
    "CorrelatedSumSpec", "MomentSummary", "approx_diff_chisq", "approx_diff_gamma",
    "approx_sum_chisq_equal", "approx_sum_chisq_n", "approx_sum_chisq_pair",
    "approx_sum_gamma_n", "GammaParams", "VGGenHyp", "VGSeneta", "gh_to_seneta",
    "seneta_to_gh", "vg_cdf", "vg_pdf", "ConvergenceError", "DegenerateDistributionError",
    "DomainError", "make_stream", "split_streams",
]
