"""Gamma, Variance-Gamma and standard normal distributions.

The Variance-Gamma (VG) law is carried in two parametrizations:

* :class:`VGSeneta` ``(c, sigma, theta, nu)``: ``X = c + theta*G + sigma*sqrt(G)*Z``
  with ``G ~ Gamma(shape=1/nu, scale=nu)`` and ``Z`` standard normal;
* :class:`VGGenHyp` ``(mu, alpha, beta, lambda)``: the generalized hyperbolic
  limit with MGF ``exp(mu t) ((alpha^2 - beta^2) / (alpha^2 - (beta + t)^2))^lambda``.

Density and CDF are provided for the symmetric case (zero skew) only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import DomainError

_LOG_2 = math.log(2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_TINY = np.finfo(float).tiny


def _scalar_or_array(arr, like):
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


# --------------------------------------------------------------------------
# gamma
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GammaParams:
    """Gamma law with shape ``k`` and scale ``theta``; chi-squared(m) is (m/2, 2)."""

    shape: float
    scale: float

    def __post_init__(self):
        for name in ("shape", "scale"):
            value = getattr(self, name)
            _require(math.isfinite(value) and value > 0,
                     f"gamma {name} must be positive and finite, got {value!r}")

    @classmethod
    def chi_squared(cls, df: float) -> "GammaParams":
        return cls(df / 2.0, 2.0)

    def mean(self) -> float:
        return self.shape * self.scale

    def variance(self) -> float:
        return self.shape * self.scale**2

    def pdf(self, x):
        return gamma_pdf(self, x)

    def cdf(self, x):
        return gamma_cdf(self, x)

    def sf(self, x):
        return gamma_sf(self, x)

    def quantile(self, prob):
        return gamma_quantile(self, prob)

    def isf(self, prob):
        return gamma_isf(self, prob)

    def mgf(self, t):
        return gamma_mgf(self, t)

    def sample(self, rng: np.random.Generator, size=None):
        return sample_gamma(self, rng, size)


def gamma_pdf(p: GammaParams, x):
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros_like(xa)
    pos = xa > 0
    if pos.any():
        z = xa[pos] / p.scale
        out[pos] = np.exp(specfun.log_gamma_kernel(p.shape, z)) / xa[pos]
    at_zero = xa == 0
    if at_zero.any():
        if p.shape == 1.0:
            out[at_zero] = 1.0 / p.scale
        elif p.shape < 1.0:
            out[at_zero] = np.inf
    return _scalar_or_array(out.reshape(np.shape(x)), x)


def gamma_cdf(p: GammaParams, x):
    xa = np.asarray(x, dtype=float)
    return _scalar_or_array(specfun.reg_inc_gamma_p(p.shape, np.maximum(xa, 0.0) / p.scale), x)


def gamma_sf(p: GammaParams, x):
    xa = np.asarray(x, dtype=float)
    return _scalar_or_array(specfun.reg_inc_gamma_q(p.shape, np.maximum(xa, 0.0) / p.scale), x)


def gamma_quantile(p: GammaParams, prob):
    """Inverse CDF; ``prob`` in [0, 1)."""
    return _scalar_or_array(np.asarray(specfun.inv_reg_inc_gamma_p(p.shape, prob)) * p.scale, prob)


def gamma_isf(p: GammaParams, prob):
    """Inverse survival function; keeps full precision for small upper tails."""
    return _scalar_or_array(np.asarray(specfun.inv_reg_inc_gamma_q(p.shape, prob)) * p.scale, prob)


def gamma_mgf(p: GammaParams, t):
    ta = np.asarray(t, dtype=float)
    _require(bool(np.all(ta < 1.0 / p.scale)), "gamma MGF is finite only for t < 1/scale")
    return _scalar_or_array((1.0 - p.scale * ta) ** (-p.shape), t)


def sample_gamma(p: GammaParams, rng: np.random.Generator, size=None):
    """Exact gamma variates (Marsaglia-Tsang rejection via numpy)."""
    return p.scale * rng.standard_gamma(p.shape, size)


# --------------------------------------------------------------------------
# Variance-Gamma
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VGSeneta:
    """Variance-Gamma in the (location, spread, skew, shape_inv) parametrization."""

    location: float
    spread: float
    skew: float
    shape_inv: float

    def __post_init__(self):
        _require(math.isfinite(self.location), "VG location must be finite")
        _require(math.isfinite(self.skew), "VG skew must be finite")
        _require(math.isfinite(self.spread) and self.spread > 0,
                 f"VG spread must be positive, got {self.spread!r}")
        _require(math.isfinite(self.shape_inv) and self.shape_inv > 0,
                 f"VG shape_inv must be positive, got {self.shape_inv!r}")

    def mean(self) -> float:
        return self.location + self.skew

    def variance(self) -> float:
        return self.spread**2 + self.skew**2 * self.shape_inv

    @property
    def symmetric(self) -> bool:
        return self.skew == 0.0

    def pdf(self, x):
        return vg_pdf(self, x)

    def cdf(self, x):
        return vg_cdf(self, x)

    def mgf(self, t):
        return vg_mgf(self, t)

    def mgf_bound(self) -> tuple[float, float]:
        """Open interval of t on which the MGF is finite."""
        a = 0.5 * self.spread**2 * self.shape_inv
        b = self.skew * self.shape_inv
        disc = math.sqrt(b * b + 4.0 * a)
        return ((-b - disc) / (2.0 * a), (-b + disc) / (2.0 * a))

    def sample(self, rng: np.random.Generator, size=None):
        return sample_vg(self, rng, size)


@dataclass(frozen=True)
class VGGenHyp:
    """Variance-Gamma as the generalized hyperbolic limit (mu, alpha, beta, lambda)."""

    location: float
    tail: float
    asym: float
    index: float

    def __post_init__(self):
        _require(math.isfinite(self.location), "GH location must be finite")
        _require(math.isfinite(self.tail) and self.tail > abs(self.asym),
                 f"GH tail must exceed |asym|, got alpha={self.tail!r}, beta={self.asym!r}")
        _require(math.isfinite(self.index) and self.index > 0,
                 f"GH index must be positive, got {self.index!r}")

    def mgf(self, t):
        ta = np.asarray(t, dtype=float)
        a2 = self.tail**2
        b = self.asym
        denom = a2 - (b + ta) ** 2
        _require(bool(np.all(denom > 0)), "GH MGF is finite only for |beta + t| < alpha")
        out = np.exp(self.location * ta) * ((a2 - b * b) / denom) ** self.index
        return _scalar_or_array(out, t)


def gh_to_seneta(g: VGGenHyp) -> VGSeneta:
    """Convert generalized hyperbolic parameters to the Seneta form.

    ``sigma = sqrt(2 lambda / (alpha^2 - beta^2))`` and ``nu = 1 / lambda``; the
    skew is ``beta * sigma^2``, which keeps the two MGFs identical and reduces to
    ``theta = beta`` (both zero) in the symmetric case.
    """
    _require(g.tail > abs(g.asym), "conversion requires alpha > |beta|")
    spread2 = 2.0 * g.index / (g.tail**2 - g.asym**2)
    return VGSeneta(location=g.location, spread=math.sqrt(spread2),
                    skew=g.asym * spread2, shape_inv=1.0 / g.index)


def seneta_to_gh(s: VGSeneta) -> VGGenHyp:
    index = 1.0 / s.shape_inv
    asym = s.skew / s.spread**2
    tail = math.hypot(math.sqrt(2.0 * index) / s.spread, asym)
    return VGGenHyp(location=s.location, tail=tail, asym=asym, index=index)


def _require_symmetric(p: VGSeneta) -> None:
    _require(p.symmetric, "VG density and CDF are implemented for skew = 0 only")


def _vg_log_norm(p: VGSeneta) -> float:
    a = 1.0 / p.shape_inv
    return (_LOG_2 - _HALF_LOG_2PI - math.log(p.spread) - specfun.log_gamma(a)
            - a * math.log(p.shape_inv))


def _vg_half_pdf(p: VGSeneta, y: np.ndarray) -> np.ndarray:
    """Symmetric VG density at distance ``y > 0`` from the center."""
    nu = p.shape_inv
    order = 1.0 / nu - 0.5
    # distances below the smallest normal double are evaluated at that floor
    z = np.maximum(y * math.sqrt(2.0 / nu) / p.spread, _TINY)
    log_pdf = (_vg_log_norm(p) + order * np.log(0.5 * z * nu)
               + specfun.log_bessel_k(abs(order), z))
    with np.errstate(under="ignore"):
        return np.exp(log_pdf)


def _vg_center_value(p: VGSeneta) -> float:
    order = 1.0 / p.shape_inv - 0.5
    if order <= 0:
        return math.inf
    # z^r K_r(z) -> Gamma(r) 2^(r-1) as z -> 0
    log_val = (_vg_log_norm(p) + order * math.log(0.5 * p.shape_inv)
               + specfun.log_gamma(order) + (order - 1.0) * _LOG_2)
    return math.exp(log_val)


def vg_pdf(p: VGSeneta, x):
    """Symmetric VG density; ``+inf`` at the center when ``1/nu <= 1/2``."""
    _require_symmetric(p)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.abs(xa - p.location)
    out = np.empty_like(y)
    pos = y > 0
    if pos.any():
        out[pos] = _vg_half_pdf(p, y[pos])
    if (~pos).any():
        out[~pos] = _vg_center_value(p)
    return _scalar_or_array(out.reshape(np.shape(x)), x)


_CDF_GRID = 6000

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _vg_tail_table(p: VGSeneta):
    """Upper-tail mass of a symmetric VG on a log-spaced grid of distances.

    Returns ``(s, tail, dtail, head)`` where ``s = log(y)``, ``tail[i]`` is the
    probability of ``X > c + exp(s[i])`` and ``dtail = -y * pdf(y)`` its derivative
    with respect to ``s``. ``head`` is the mass of ``(c, c + exp(s[0])]``, taken
    from the leading power law of the density at the center. Panel masses are
    rescaled by a factor within rounding of one so each half holds exactly 1/2.
    """
    a = 1.0 / p.shape_inv
    y_lo = 1e-14 * p.spread
    y_hi = p.spread * max(60.0, 60.0 * math.sqrt(0.5 * p.shape_inv))
    s = np.linspace(math.log(y_lo), math.log(y_hi), _CDF_GRID)
    left, right = s[:-1], s[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    ys = np.exp(nodes)
    integrand = ys * _vg_half_pdf(p, ys.ravel()).reshape(ys.shape)
    pieces = half * (integrand @ _GL_WEIGHTS)
    dmass = np.exp(s) * _vg_half_pdf(p, np.exp(s))
    head = dmass[0] / min(2.0 * a, 1.0)
    pieces *= (0.5 - head) / math.fsum(pieces)
    tail = np.concatenate((np.cumsum(pieces[::-1])[::-1], [0.0]))
    return s, tail, -dmass, head


def _hermite(s_grid, values, slopes, s):
    """Cubic Hermite interpolation on a uniform grid."""
    h = s_grid[1] - s_grid[0]
    idx = np.clip(((s - s_grid[0]) / h).astype(int), 0, s_grid.size - 2)
    t = (s - s_grid[idx]) / h
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    return (h00 * values[idx] + h10 * h * slopes[idx]
            + h01 * values[idx + 1] + h11 * h * slopes[idx + 1])


def vg_cdf(p: VGSeneta, x):
    """Symmetric VG CDF, ``F(c) = 1/2`` exactly.

    The half-line mass is integrated with Gauss-Legendre panels in ``log|x - c|``
    and interpolated with cubic Hermite splines whose slopes are exact density
    values, which keeps large batches (KS tests) cheap.
    """
    _require_symmetric(p)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(np.isnan(xa)):
        raise DomainError("x must not be NaN")
    d = xa - p.location
    y = np.abs(d)
    s_grid, tail, dtail, head = _vg_tail_table(p)
    y_lo, y_hi = math.exp(s_grid[0]), math.exp(s_grid[-1])
    upper = np.zeros_like(y)
    upper[y == 0] = 0.5
    inner = (y > 0) & (y < y_lo)
    if inner.any():
        power = min(2.0 / p.shape_inv, 1.0)
        upper[inner] = 0.5 - head * (y[inner] / y_lo) ** power
    mid = (y >= y_lo) & (y < y_hi)
    if mid.any():
        upper[mid] = np.clip(_hermite(s_grid, tail, dtail, np.log(y[mid])), 0.0, 0.5)
    out = np.where(d > 0, 1.0 - upper, upper)
    return _scalar_or_array(out.reshape(np.shape(x)), x)


def vg_mgf(p: VGSeneta, t):
    """``exp(c t) (1 - theta nu t - sigma^2 nu t^2 / 2)^(-1/nu)`` inside its finiteness region."""
    ta = np.asarray(t, dtype=float)
    base = 1.0 - p.skew * p.shape_inv * ta - 0.5 * p.spread**2 * p.shape_inv * ta * ta
    _require(bool(np.all(base > 0)), "t lies outside the VG MGF finiteness region")
    out = np.exp(p.location * ta) * base ** (-1.0 / p.shape_inv)
    return _scalar_or_array(out, t)


def sample_vg(p: VGSeneta, rng: np.random.Generator, size=None):
    """Normal variance-mean mixture draw ``c + theta G + sigma sqrt(G) Z``."""
    g = p.shape_inv * rng.standard_gamma(1.0 / p.shape_inv, size)
    z = rng.standard_normal(size)
    return p.location + p.skew * g + p.spread * np.sqrt(g) * z


# --------------------------------------------------------------------------
# standard normal
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StandardNormal:
    def mean(self) -> float:
        return 0.0

    def variance(self) -> float:
        return 1.0

    def pdf(self, z):
        return specfun.std_normal_pdf(z)

    def cdf(self, z):
        return specfun.std_normal_cdf(z)

    def quantile(self, prob):
        return specfun.std_normal_quantile(prob)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.standard_normal(size)
