"""Moment-matched approximants for sums and differences of correlated variables.

Sums of positively correlated chi-squared (or common-scale gamma) variables are
mapped to a single gamma law whose mean and variance equal the exact mean and
variance of the sum. Differences of two identically distributed, correlated
chi-squared (or gamma) variables are mapped to a symmetric Variance-Gamma law
with the exact variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import GammaParams, VGSeneta
from .errors import DegenerateDistributionError, DomainError


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float
    u_factor: float


def _check_sum_rho(rho: float) -> float:
    rho = float(rho)
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"correlation must lie in [0, 1] for sums, got {rho!r}")
    return rho


def _check_diff_rho(rho: float) -> float:
    rho = float(rho)
    if rho == 1.0:
        raise DegenerateDistributionError(
            "rho = 1: the difference is a point mass at zero (zero mean and variance)")
    if not 0.0 <= rho < 1.0:
        raise DomainError(f"correlation must lie in [0, 1) for differences, got {rho!r}")
    return rho


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class CorrelatedSumSpec:
    """Marginal parameters plus the pairwise correlation matrix of the summands.

    Give either ``dfs`` (chi-squared degrees of freedom) or ``shapes`` together
    with ``common_scale`` (gamma variables sharing one scale).
    """

    corr: np.ndarray
    dfs: tuple[float, ...] | None = None
    shapes: tuple[float, ...] | None = None
    common_scale: float | None = None

    def __post_init__(self):
        if (self.dfs is None) == (self.shapes is None):
            raise DomainError("give exactly one of dfs or shapes")
        if self.shapes is not None and self.common_scale is None:
            raise DomainError("shapes require a common_scale")
        if self.dfs is not None and self.common_scale is not None:
            raise DomainError("common_scale applies to shapes only")
        params = self.dfs if self.dfs is not None else self.shapes
        params = tuple(_check_positive("degrees of freedom / shape", v) for v in params)
        object.__setattr__(self, "dfs" if self.dfs is not None else "shapes", params)
        if self.common_scale is not None:
            object.__setattr__(self, "common_scale",
                               _check_positive("common_scale", self.common_scale))
        corr = np.array(self.corr, dtype=float)
        n = len(params)
        if n < 2:
            raise DomainError("a correlated sum needs at least two variables")
        if corr.shape != (n, n):
            raise DomainError(f"correlation matrix must be {n}x{n}, got {corr.shape}")
        if not np.all(np.diag(corr) == 1.0):
            raise DomainError("correlation matrix must have a unit diagonal")
        if not np.array_equal(corr, corr.T):
            raise DomainError("correlation matrix must be symmetric")
        if np.any(corr < 0.0) or np.any(corr > 1.0) or np.any(np.isnan(corr)):
            raise DomainError("pairwise correlations must lie in [0, 1]")
        corr.setflags(write=False)
        object.__setattr__(self, "corr", corr)

    @classmethod
    def equicorrelated(cls, rho: float, *, dfs=None, shapes=None, common_scale=None):
        params = dfs if dfs is not None else shapes
        n = len(params)
        corr = np.full((n, n), float(rho))
        np.fill_diagonal(corr, 1.0)
        return cls(corr=corr, dfs=None if dfs is None else tuple(dfs),
                   shapes=None if shapes is None else tuple(shapes),
                   common_scale=common_scale)

    @property
    def size(self) -> int:
        return len(self.dfs if self.dfs is not None else self.shapes)


def _inflation(params, corr) -> float:
    """``2 * sum_{i<j} rho_ij sqrt(p_i p_j) / sum_i p_i``.

    The pairwise sum runs over unordered pairs with coefficient 2, so two
    variables reproduce ``2 rho sqrt(p1 p2) / (p1 + p2)`` exactly.
    """
    total = math.fsum(params)
    cross = math.fsum(
        corr[i][j] * math.sqrt(params[i] * params[j])
        for i in range(len(params)) for j in range(i + 1, len(params)))
    return 2.0 * cross / total


def approx_sum_chisq_equal(m: float, rho: float) -> GammaParams:
    """Gamma approximant to ``X1 + X2`` with ``X1, X2 ~ chi2(m)``, ``corr = rho``."""
    m = _check_positive("m", m)
    rho = _check_sum_rho(rho)
    return GammaParams(shape=m / (1.0 + rho), scale=2.0 * (1.0 + rho))


def approx_sum_chisq_pair(m1: float, m2: float, rho: float) -> GammaParams:
    """Gamma approximant to ``X1 + X2`` with ``X1 ~ chi2(m1)``, ``X2 ~ chi2(m2)``."""
    m1 = _check_positive("m1", m1)
    m2 = _check_positive("m2", m2)
    rho = _check_sum_rho(rho)
    scale = 2.0 * (1.0 + _inflation((m1, m2), ((1.0, rho), (rho, 1.0))))
    return GammaParams(shape=(m1 + m2) / scale, scale=scale)


def approx_sum_chisq_n(spec: CorrelatedSumSpec) -> tuple[GammaParams, MomentSummary]:
    """Gamma approximant to a sum of N correlated chi-squared variables.

    The scale is ``u = 2 (1 + 2 sum_{i<j} rho_ij sqrt(m_i m_j) / sum m_i)`` and the
    shape ``sum m_i / u``, giving mean ``sum m_i`` and variance ``u sum m_i``.
    """
    if spec.dfs is None:
        raise DomainError("approx_sum_chisq_n needs a spec with dfs")
    u = 2.0 * (1.0 + _inflation(spec.dfs, spec.corr))
    if not u > 0:
        raise DomainError(f"u factor must be positive, got {u}")
    total = math.fsum(spec.dfs)
    params = GammaParams(shape=total / u, scale=u)
    return params, MomentSummary(mean=total, variance=u * total, u_factor=u)


def approx_sum_gamma_n(spec: CorrelatedSumSpec) -> tuple[GammaParams, MomentSummary]:
    """Gamma approximant to a sum of correlated gamma variables with common scale."""
    if spec.shapes is None:
        raise DomainError("approx_sum_gamma_n needs a spec with shapes and common_scale")
    u = 1.0 + _inflation(spec.shapes, spec.corr)
    if not u > 0:
        raise DomainError(f"u factor must be positive, got {u}")
    theta = spec.common_scale
    total = math.fsum(spec.shapes)
    params = GammaParams(shape=total / u, scale=theta * u)
    return params, MomentSummary(mean=theta * total, variance=theta**2 * u * total, u_factor=u)


def approx_diff_chisq(m: float, rho: float) -> VGSeneta:
    """Symmetric VG approximant to ``X1 - X2`` with ``X1, X2 ~ chi2(m)``, ``corr = rho``."""
    m = _check_positive("m", m)
    rho = _check_diff_rho(rho)
    return VGSeneta(location=0.0, spread=2.0 * math.sqrt(m * (1.0 - rho)),
                    skew=0.0, shape_inv=2.0 / m)


def approx_diff_gamma(k: float, theta: float, rho: float) -> VGSeneta:
    """Symmetric VG approximant to ``X1 - X2`` for two ``Gamma(k, theta)`` variables."""
    k = _check_positive("k", k)
    theta = _check_positive("theta", theta)
    rho = _check_diff_rho(rho)
    return VGSeneta(location=0.0, spread=theta * math.sqrt(2.0 * k * (1.0 - rho)),
                    skew=0.0, shape_inv=1.0 / k)
