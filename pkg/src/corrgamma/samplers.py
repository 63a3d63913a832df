"""Correlated variate generators.

Two simulation designs are provided for correlated chi-squared/gamma pairs:

* ``squared-normal``: each variable is a sum of squared standard normals, the
  normals being pairwise correlated across variables (normal correlation ``r``
  gives Pearson correlation ``r**2`` between the squares);
* Gaussian copula (``copula-nominal`` / ``copula-calibrated``): gamma quantiles
  of the normal CDF of correlated normals. The nominal mode uses the target
  correlation as the normal-scale parameter; the calibrated mode solves for the
  normal-scale parameter that yields the target Pearson correlation.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .distributions import GammaParams, gamma_isf, gamma_quantile
from .errors import ConvergenceError, DomainError
from .specfun import std_normal_cdf

METHODS = ("squared-normal", "copula-nominal", "copula-calibrated")
MIN_EIGENVALUE = 1e-10


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric positive semi-definite matrix with unit diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DomainError(f"correlation matrix must be square, got shape {a.shape}")
        if np.any(~np.isfinite(a)):
            raise DomainError("correlation matrix entries must be finite")
        if np.max(np.abs(a - a.T)) > 1e-15:
            raise DomainError("correlation matrix must be symmetric")
        if not np.all(np.diag(a) == 1.0):
            raise DomainError("correlation matrix must have a unit diagonal")
        if np.any(np.abs(a) > 1.0):
            raise DomainError("correlations must lie in [-1, 1]")
        if np.linalg.eigvalsh(a).min() < -MIN_EIGENVALUE:
            raise DomainError("correlation matrix is not positive semi-definite")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @classmethod
    def equicorrelated(cls, size: int, rho: float) -> "CorrelationMatrix":
        a = np.full((size, size), float(rho))
        np.fill_diagonal(a, 1.0)
        return cls(a)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def comonotone_groups(self) -> list[int]:
        """Representative index for each variable; variables with rho = 1 share one."""
        n = self.size
        rep = list(range(n))
        for i in range(n):
            for j in range(i):
                if self.entries[i, j] == 1.0:
                    rep[i] = rep[j]
                    break
        for i in range(n):
            for j in range(n):
                if rep[i] == rep[j] and self.entries[i, j] != 1.0:
                    raise DomainError("perfect correlations must be transitive")
        return rep

    def factor(self) -> tuple[list[int], np.ndarray]:
        """Cholesky factor of the matrix with perfectly correlated variables merged.

        Returns ``(columns, L)`` where ``columns[i]`` is the column of the reduced
        normal draw feeding variable ``i``. A reduced matrix that is singular or
        nearly so (smallest eigenvalue below 1e-10) is rejected.
        """
        rep = self.comonotone_groups()
        keep = sorted(set(rep))
        reduced = self.entries[np.ix_(keep, keep)]
        if np.linalg.eigvalsh(reduced).min() < MIN_EIGENVALUE:
            raise DomainError("correlation matrix is singular or nearly singular; "
                              "Cholesky factorization rejected")
        columns = [keep.index(r) for r in rep]
        return columns, np.linalg.cholesky(reduced)


@dataclass
class SampleBatch:
    """Named sample columns with provenance."""

    columns: dict[str, np.ndarray]
    seed: int | None
    method: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise ValueError("all columns must have the same length")

    @property
    def n(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.columns[k] for k in self.columns])

    def pearson(self) -> np.ndarray:
        return np.corrcoef(self.matrix(), rowvar=False)

    def to_csv(self, path) -> None:
        path = Path(path)
        cols = [self.columns[k].tolist() for k in self.columns]
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.names)
            writer.writerows(zip(*cols))

    @classmethod
    def from_csv(cls, path, seed=None, method="unknown") -> "SampleBatch":
        with Path(path).open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = np.array([[float(v) for v in row] for row in reader], dtype=float)
        rows = rows.reshape(-1, len(header))
        return cls({name: rows[:, i].copy() for i, name in enumerate(header)}, seed, method)


def _default_names(count: int, prefix: str = "X") -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(count)]


def _check_count(n: int) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"sample size must be a nonnegative integer, got {n!r}")
    return int(n)


def mvn_sample(corr: CorrelationMatrix, n: int, rng: np.random.Generator,
               names: Sequence[str] | None = None) -> SampleBatch:
    """Draw ``n`` rows of ``N(0, corr)`` via Cholesky factorization."""
    n = _check_count(n)
    columns, chol = corr.factor()
    draws = rng.standard_normal((n, chol.shape[0])) @ chol.T
    names = list(names) if names is not None else _default_names(corr.size, "Z")
    return SampleBatch({name: draws[:, c].copy() for name, c in zip(names, columns)},
                       seed=None, method="mvn")


def _check_integer_df(name: str, m) -> int:
    if isinstance(m, bool) or float(m) != math.floor(float(m)) or float(m) < 1:
        raise DomainError(f"{name} must be an integer >= 1 for the squared-normal "
                          f"construction, got {m!r}")
    return int(m)


def bivariate_chisq_sample(m: int, rho_target: float, n: int, rng: np.random.Generator,
                           m2: int | None = None) -> SampleBatch:
    """Correlated chi-squared pair built from sums of squared correlated normals.

    ``X1 = sum_{i<=m} Z_i^2`` and ``X2 = sum_{i<=m2} W_i^2``; the first ``min(m, m2)``
    pairs ``(Z_i, W_i)`` have normal correlation ``r`` chosen so that the Pearson
    correlation of ``(X1, X2)`` equals ``rho_target``. With ``m2 = m`` this is
    ``r = sqrt(rho_target)``.
    """
    m = _check_integer_df("m", m)
    m2 = m if m2 is None else _check_integer_df("m2", m2)
    n = _check_count(n)
    rho_target = float(rho_target)
    if rho_target < 0:
        raise DomainError("negative correlations cannot be built from squared normals")
    if rho_target > 1:
        raise DomainError(f"correlation must lie in [0, 1], got {rho_target!r}")
    shared = min(m, m2)
    r2 = rho_target * math.sqrt(m * m2) / shared
    if r2 > 1.0 + 1e-15:
        raise DomainError(f"rho_target {rho_target} exceeds the maximum "
                          f"{shared / math.sqrt(m * m2):.6g} attainable with dfs ({m}, {m2})")
    r = math.sqrt(min(r2, 1.0))
    comp = math.sqrt(1.0 - r * r)
    x1 = np.zeros(n)
    x2 = np.zeros(n)
    for i in range(max(m, m2)):
        z = rng.standard_normal(n)
        if i < m:
            x1 += z * z
        if i < m2:
            w = r * z + comp * rng.standard_normal(n) if i < shared else rng.standard_normal(n)
            x2 += w * w
    return SampleBatch({"X1": x1, "X2": x2}, seed=None, method="squared-normal",
                       metadata={"rho_target": rho_target, "normal_corr": r})


def multivariate_chisq_sample(dfs: Sequence[int], pearson: CorrelationMatrix, n: int,
                              rng: np.random.Generator) -> SampleBatch:
    """Squared-normal construction for N chi-squared variables.

    Variable ``i`` sums ``m_i`` squared normals. At summand index ``l`` the normals
    of all variables with ``m_i > l`` are jointly drawn with pairwise correlation
    ``r_ij = sqrt(rho_ij sqrt(m_i m_j) / min(m_i, m_j))``, which yields Pearson
    correlation ``rho_ij`` between the sums.
    """
    dfs = [_check_integer_df(f"dfs[{i}]", m) for i, m in enumerate(dfs)]
    n = _check_count(n)
    size = len(dfs)
    if pearson.size != size:
        raise DomainError("one degree of freedom per correlation-matrix row is required")
    if np.any(pearson.entries < 0):
        raise DomainError("negative correlations cannot be built from squared normals")
    normal = np.eye(size)
    for i in range(size):
        for j in range(i):
            r2 = pearson.entries[i, j] * math.sqrt(dfs[i] * dfs[j]) / min(dfs[i], dfs[j])
            if r2 > 1.0 + 1e-15:
                raise DomainError(f"correlation {pearson.entries[i, j]} between variables "
                                  f"{j + 1} and {i + 1} is not attainable with dfs "
                                  f"({dfs[j]}, {dfs[i]})")
            normal[i, j] = normal[j, i] = math.sqrt(min(r2, 1.0))
    totals = np.zeros((n, size))
    for level in range(max(dfs)):
        active = [i for i in range(size) if dfs[i] > level]
        sub = CorrelationMatrix(normal[np.ix_(active, active)])
        z = mvn_sample(sub, n, rng).matrix()
        totals[:, active] += z * z
    names = _default_names(size)
    return SampleBatch({name: totals[:, i].copy() for i, name in enumerate(names)},
                       seed=None, method="squared-normal",
                       metadata={"normal_corr": normal.tolist()})


def _gamma_from_normal(p: GammaParams, z: np.ndarray) -> np.ndarray:
    """Gamma quantile of Phi(z), taking the upper tail for z > 0 to keep precision."""
    out = np.empty_like(z)
    upper = z > 0
    if upper.any():
        out[upper] = gamma_isf(p, np.asarray(std_normal_cdf(-z[upper])))
    if (~upper).any():
        out[~upper] = gamma_quantile(p, np.asarray(std_normal_cdf(z[~upper])))
    return out


def copula_gamma_sample(marginals: Sequence[GammaParams], corr_normal: CorrelationMatrix,
                        n: int, rng: np.random.Generator,
                        method: str = "copula-nominal") -> SampleBatch:
    """Gaussian-copula draw: column i is ``F_i^{-1}(Phi(Z_i))`` with ``Z ~ N(0, corr)``."""
    if len(marginals) != corr_normal.size:
        raise DomainError("one marginal per correlation-matrix row is required")
    if method not in ("copula-nominal", "copula-calibrated"):
        raise DomainError(f"unknown copula method {method!r}")
    z = mvn_sample(corr_normal, n, rng)
    names = _default_names(len(marginals))
    cols = {name: _gamma_from_normal(p, zc)
            for name, p, zc in zip(names, marginals, z.columns.values())}
    return SampleBatch(cols, seed=None, method=method,
                       metadata={"normal_corr": corr_normal.entries.tolist()})


class _HermiteRule:
    def __init__(self, nodes: int):
        x, w = np.polynomial.hermite_e.hermegauss(nodes)
        self.x = x
        self.w = w / math.sqrt(2.0 * math.pi)


def copula_pearson(marginals: tuple[GammaParams, GammaParams], rho_normal: float,
                   nodes: int = 64) -> float:
    """Pearson correlation of a Gaussian-copula pair by 2-D Gauss-Hermite quadrature."""
    if nodes < 64:
        raise DomainError("at least 64 Gauss-Hermite nodes per axis are required")
    rule = _HermiteRule(nodes)
    return _copula_pearson(marginals, rho_normal, rule, _marginal_moments(marginals, rule))


def _marginal_moments(marginals, rule):
    out = []
    for p in marginals:
        q = _gamma_from_normal(p, rule.x)
        mu = float(rule.w @ q)
        out.append((q, mu, float(rule.w @ (q - mu) ** 2)))
    return out


def _copula_pearson(marginals, rho, rule, moments) -> float:
    (q1, mu1, v1), (_, mu2, v2) = moments
    z2 = rho * rule.x[:, None] + math.sqrt(max(1.0 - rho * rho, 0.0)) * rule.x[None, :]
    q2 = _gamma_from_normal(marginals[1], z2.ravel()).reshape(z2.shape)
    cross = float(rule.w @ ((q1 - mu1)[:, None] * (q2 - mu2)) @ rule.w)
    return cross / math.sqrt(v1 * v2)


def calibrate_copula_correlation(marginals: tuple[GammaParams, GammaParams],
                                 rho_pearson_target: float, nodes: int = 64,
                                 tol: float = 1e-10, max_iter: int = 200) -> float:
    """Normal-scale correlation whose copula output has the target Pearson correlation.

    The output correlation is increasing in the normal-scale parameter and never
    exceeds it in magnitude, so the root is bracketed by ``[target, 1]`` and found
    by bisection.
    """
    target = float(rho_pearson_target)
    if not 0.0 <= target < 1.0:
        raise DomainError(f"target Pearson correlation must lie in [0, 1), got {target!r}")
    if target == 0.0:
        return 0.0
    if nodes < 64:
        raise DomainError("at least 64 Gauss-Hermite nodes per axis are required")
    rule = _HermiteRule(nodes)
    moments = _marginal_moments(marginals, rule)
    lo, hi = target, 1.0
    if _copula_pearson(marginals, hi, rule, moments) < target:
        raise DomainError(f"target correlation {target} is not attainable with these marginals")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if _copula_pearson(marginals, mid, rule, moments) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol:
            return 0.5 * (lo + hi)
    raise ConvergenceError("copula correlation calibration did not converge")


def calibrated_normal_matrix(marginals: Sequence[GammaParams],
                             pearson: CorrelationMatrix) -> CorrelationMatrix:
    """Calibrate every pair independently; the result must remain a valid matrix."""
    size = len(marginals)
    a = np.eye(size)
    for i in range(size):
        for j in range(i):
            target = pearson.entries[i, j]
            if target == 1.0 and marginals[i] == marginals[j]:
                rho = 1.0
            else:
                rho = calibrate_copula_correlation((marginals[i], marginals[j]), target)
            a[i, j] = a[j, i] = rho
    return CorrelationMatrix(a)


def copula_gamma_sample_calibrated(marginals: Sequence[GammaParams],
                                   pearson: CorrelationMatrix, n: int,
                                   rng: np.random.Generator) -> SampleBatch:
    normal = calibrated_normal_matrix(marginals, pearson)
    batch = copula_gamma_sample(marginals, normal, n, rng, method="copula-calibrated")
    batch.metadata["pearson_target"] = pearson.entries.tolist()
    return batch
