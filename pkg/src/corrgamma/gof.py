"""Goodness-of-fit tools: empirical CDFs, KS distance, moment and density tables."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class EcdfTable:
    """Sorted sample; the ECDF at ``sorted_values[j]`` is ``(j + 1) / n``."""

    sorted_values: np.ndarray
    n: int

    def at(self, x):
        """Right-continuous ECDF, ``#(values <= x) / n``."""
        x = np.asarray(x, dtype=float)
        out = np.searchsorted(self.sorted_values, x, side="right") / self.n
        return float(out) if out.ndim == 0 else out

    def to_csv(self, path) -> None:
        levels = (np.arange(self.n) + 1.0) / self.n
        _write_two_columns(path, ("x", "ecdf"), self.sorted_values, levels)


def ecdf(values) -> EcdfTable:
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise DomainError("ECDF of an empty sample is undefined")
    v.setflags(write=False)
    return EcdfTable(sorted_values=v, n=int(v.size))


def ks_statistic(e: EcdfTable, cdf: Callable) -> float:
    """Exact sup-distance between the step ECDF and a continuous CDF."""
    f = np.asarray(cdf(e.sorted_values), dtype=float)
    j = np.arange(e.n, dtype=float)
    above = (j + 1.0) / e.n - f
    below = f - j / e.n
    return float(min(max(above.max(), below.max(), 0.0), 1.0))


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value, ``sqrt(-ln(alpha/2)/2) / sqrt(n)``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    return math.sqrt(-math.log(alpha / 2.0) / 2.0) / math.sqrt(n)


@dataclass(frozen=True)
class GofReport:
    ks_distance: float
    sample_mean: float
    sample_variance: float
    model_mean: float
    model_variance: float
    n: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def moment_report(values, model) -> GofReport:
    """Sample versus model moments, plus the KS distance to the model CDF."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size < 2:
        raise DomainError("moment report needs at least two values")
    mean = float(np.mean(v))
    var = float(np.var(v, ddof=1))
    return GofReport(
        ks_distance=ks_statistic(ecdf(v), model.cdf),
        sample_mean=mean,
        sample_variance=max(var, 0.0),
        model_mean=float(model.mean()),
        model_variance=float(model.variance()),
        n=int(v.size),
    )


@dataclass(frozen=True)
class DensityTable:
    x: np.ndarray
    pdf: np.ndarray

    @property
    def poles(self) -> np.ndarray:
        """Grid points where the density is infinite."""
        return self.x[np.isinf(self.pdf)]

    def to_csv(self, path) -> None:
        _write_two_columns(path, ("x", "pdf"), self.x, self.pdf)


def density_table(model, lo: float, hi: float, points: int = 512) -> DensityTable:
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError(f"density grid needs finite lo < hi, got ({lo}, {hi})")
    if int(points) != points or points < 2:
        raise DomainError(f"density grid needs at least 2 points, got {points!r}")
    x = np.linspace(lo, hi, int(points))
    return DensityTable(x=x, pdf=np.asarray(model.pdf(x), dtype=float))


def _write_two_columns(path, header, a, b) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(zip(np.asarray(a, dtype=float).tolist(),
                             np.asarray(b, dtype=float).tolist()))
