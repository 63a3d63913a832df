import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from corrgamma.distributions import (GammaParams, StandardNormal, VGGenHyp, VGSeneta,
                                     gamma_cdf, gamma_isf, gamma_mgf, gamma_pdf,
                                     gamma_quantile, gamma_sf, gh_to_seneta, sample_gamma,
                                     sample_vg, seneta_to_gh, vg_cdf, vg_mgf, vg_pdf)
from corrgamma.errors import DomainError
from corrgamma.streams import make_stream

# Symmetric VG CDF values from the normal-mixture integral in mpmath (40 digits):
# (location, spread, shape_inv, offset from location, F)
VG_CDF_REF = [
    (0.0, 1.0, 0.5, -3.0, 0.0049575043533327168461),
    (0.0, 1.0, 0.5, 0.5, 0.7240904191214182588),
    (0.0, 1.0, 0.5, 1.0, 0.86466471676338730811),
    (0.0, 1.0, 0.5, 4.0, 0.9991613434302437204),
    (0.0, 1.0, 0.5, 8.0, 0.99999949359171376333),
    (0.3, 2.0, 1.0, -3.0, 0.059936625051881016537),
    (0.3, 2.0, 1.0, 0.5, 0.64890574933672020188),
    (0.3, 2.0, 1.0, 1.0, 0.75346565430238010608),
    (0.3, 2.0, 1.0, 4.0, 0.97044712671902188112),
    (0.3, 2.0, 1.0, 8.0, 0.99825325536167689919),
    (0.0, 4.47213595499958, 0.4, -3.0, 0.2243967105571626006),
    (0.0, 4.47213595499958, 0.4, 0.5, 0.55278171886456149598),
    (0.0, 4.47213595499958, 0.4, 1.0, 0.60404156787913077755),
    (0.0, 4.47213595499958, 0.4, 4.0, 0.83721754002231658948),
    (0.0, 4.47213595499958, 0.4, 8.0, 0.96136860037326794668),
]


def mixture_pdf(p: VGSeneta, x: float) -> float:
    """Normal variance mixture with gamma(1/nu, nu) mixing, by adaptive quadrature."""
    a, nu = 1.0 / p.shape_inv, p.shape_inv

    def f(g):
        if g <= 0:
            return 0.0
        s = p.spread * math.sqrt(g)
        log_mix = (a - 1) * math.log(g) - g / nu - math.lgamma(a) - a * math.log(nu)
        return math.exp(log_mix - 0.5 * ((x - p.location) / s) ** 2) / (s * math.sqrt(2 * math.pi))

    mode = max(nu * (a - 1), 1e-6)
    pts = [0.0, mode / 100, mode, 10 * mode + 10 * nu, 100 * nu + 100]
    return sum(integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=400)[0]
               for lo, hi in zip(pts, pts[1:]))


def numeric_mgf(p: VGSeneta, t: float) -> float:
    """int e^{tx} pdf(x) dx for a symmetric VG centred at zero."""
    f = lambda x: 2.0 * math.cosh(t * x) * vg_pdf(p, x)
    # the integrand decays like exp(-(bound - |t|) x)
    reach = 60.0 / (p.mgf_bound()[1] - abs(t))
    pts = [0.0, p.spread, 10 * p.spread, max(reach, 20 * p.spread)]
    return sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-11, limit=500)[0]
               for a, b in zip(pts, pts[1:]))


class TestGammaParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            GammaParams(0.0, 1.0)
        with pytest.raises(DomainError):
            GammaParams(1.0, -2.0)
        with pytest.raises(DomainError):
            GammaParams(math.inf, 1.0)

    @given(st.floats(0.01, 1e3), st.floats(0.01, 1e3))
    def test_moments(self, k, theta):
        p = GammaParams(k, theta)
        assert p.mean() == k * theta
        assert p.variance() == pytest.approx(k * theta * theta, rel=1e-15)

    def test_chi_squared(self):
        assert GammaParams.chi_squared(7) == GammaParams(3.5, 2.0)

    def test_frozen(self):
        p = GammaParams(2.0, 3.0)
        with pytest.raises(Exception):
            p.shape = 4.0


class TestGammaFunctions:
    def test_pdf_values(self):
        assert gamma_pdf(GammaParams(1, 2), 0.0) == 0.5
        # chi-squared(10) density at its mean, from the closed form
        ref = 10.0**4 * math.exp(-5.0) / (2.0**5 * math.factorial(4))
        assert gamma_pdf(GammaParams(5, 2), 10.0) == pytest.approx(ref, rel=1e-14)
        assert ref == pytest.approx(0.0877336848839253528, rel=1e-15)
        assert gamma_pdf(GammaParams(0.5, 2), 0.0) == math.inf
        assert gamma_pdf(GammaParams(3, 2), 0.0) == 0.0
        assert gamma_pdf(GammaParams(3, 2), -1.0) == 0.0

    @pytest.mark.parametrize("k, theta", [(0.7, 1.0), (2.5, 2.0), (10.0, 0.5), (60.0, 3.0)])
    def test_pdf_integrates_to_one(self, k, theta):
        p = GammaParams(k, theta)
        f = lambda x: gamma_pdf(p, x)
        total = sum(integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
                    for a, b in [(0, p.mean()), (p.mean(), 10 * p.mean() + 100 * theta)])
        total += integrate.quad(f, 10 * p.mean() + 100 * theta, np.inf)[0]
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_cdf_values(self):
        assert gamma_cdf(GammaParams(1, 1), 1.0) == pytest.approx(0.6321205588, abs=1e-10)
        assert gamma_cdf(GammaParams(2.5, 3), 0.0) == 0.0
        assert gamma_cdf(GammaParams(3.5, 2), 6.3458111955215175357) == pytest.approx(0.5, abs=1e-12)
        assert gamma_cdf(GammaParams(2, 1), -5.0) == 0.0

    def test_quantile_values(self):
        assert gamma_quantile(GammaParams(1, 2), 1 - math.exp(-1)) == pytest.approx(2.0, rel=1e-14)
        assert gamma_quantile(GammaParams(2.5, 2), 0.5) == pytest.approx(4.3514601910955273172,
                                                                         rel=1e-12)
        assert gamma_quantile(GammaParams(2.5, 2), 0.0) == 0.0

    @given(st.floats(0.1, 50), st.floats(0.1, 10), st.floats(1e-9, 1 - 1e-9))
    def test_quantile_isf_roundtrip(self, k, theta, prob):
        p = GammaParams(k, theta)
        assert abs(gamma_cdf(p, gamma_quantile(p, prob)) - prob) <= 1e-10
        assert abs(gamma_sf(p, gamma_isf(p, prob)) - prob) <= 1e-10

    def test_mgf(self):
        p = GammaParams(2.5, 2.0)
        assert gamma_mgf(p, 0.0) == 1.0
        assert gamma_mgf(p, 0.2) == pytest.approx(0.6**-2.5, rel=1e-14)
        with pytest.raises(DomainError):
            gamma_mgf(p, 0.5)

    def test_sampling_moments(self):
        p = GammaParams(2.5, 2.0)
        x = sample_gamma(p, make_stream(1), 10**6)
        se = math.sqrt(p.variance() / x.size)
        assert abs(x.mean() - p.mean()) < 4 * se
        assert x.min() >= 0

    def test_sampling_deterministic(self):
        p = GammaParams(0.3, 1.0)
        a = sample_gamma(p, make_stream(9), 1000)
        b = sample_gamma(p, make_stream(9), 1000)
        assert np.array_equal(a, b)


class TestVGParams:
    def test_validation(self):
        with pytest.raises(DomainError):
            VGSeneta(0.0, 0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            VGSeneta(0.0, 1.0, 0.0, -1.0)
        with pytest.raises(DomainError):
            VGGenHyp(0.0, 0.5, 0.6, 1.0)

    @given(st.floats(-10, 10), st.floats(0.1, 10), st.floats(-3, 3), st.floats(0.05, 5))
    def test_moments(self, c, s, th, nu):
        p = VGSeneta(c, s, th, nu)
        assert p.mean() == c + th
        assert p.variance() == pytest.approx(s * s + th * th * nu, rel=1e-15)

    def test_chisq_difference_variance(self):
        m = 5
        p = VGSeneta(0.0, 2 * math.sqrt(m), 0.0, 2 / m)
        assert p.mean() == 0.0
        assert p.variance() == pytest.approx(4 * m, rel=1e-15)

    @pytest.mark.parametrize("m", [1, 5, 12])
    def test_gh_conversion(self, m):
        s = gh_to_seneta(VGGenHyp(0.0, 0.5, 0.0, m / 2))
        assert s == VGSeneta(0.0, 2 * math.sqrt(m), 0.0, 2 / m)
        back = seneta_to_gh(s)
        assert back.tail == pytest.approx(0.5, rel=1e-14)
        assert back.index == pytest.approx(m / 2, rel=1e-14)

    @given(st.floats(-5, 5), st.floats(0.2, 5), st.floats(-0.9, 0.9), st.floats(0.1, 10))
    def test_gh_roundtrip_mgf(self, mu, alpha, beta_frac, lam):
        g = VGGenHyp(mu, alpha, beta_frac * alpha, lam)
        s = gh_to_seneta(g)
        g2 = seneta_to_gh(s)
        for a, b in [(g.location, g2.location), (g.tail, g2.tail),
                     (g.asym, g2.asym), (g.index, g2.index)]:
            assert a == pytest.approx(b, rel=1e-13, abs=1e-14)
        t = 0.5 * (alpha - abs(g.asym))
        for tt in (-t, t):
            assert vg_mgf(s, tt) == pytest.approx(g.mgf(tt), rel=1e-11)


class TestVGDensity:
    def test_symmetry_and_poles(self):
        p = VGSeneta(0.0, 2 * math.sqrt(5), 0.0, 0.4)
        assert vg_pdf(p, 3.7) == vg_pdf(p, -3.7)
        assert math.isfinite(vg_pdf(p, 0.0))
        assert vg_pdf(VGSeneta(0.0, 2.0, 0.0, 2.0), 0.0) == math.inf
        assert vg_pdf(VGSeneta(1.0, 2.0, 0.0, 2.0), 1.0) == math.inf

    def test_center_value(self):
        p = VGSeneta(0.0, 2 * math.sqrt(5), 0.0, 0.4)
        assert vg_pdf(p, 0.0) == pytest.approx(mixture_pdf(p, 0.0), rel=1e-10)

    @pytest.mark.parametrize("params", [(0.0, 1.0, 0.2), (0.5, 2.0, 0.5), (0.0, 4.0, 1.0),
                                        (-1.0, 1.5, 1.8), (0.0, 2.0, 2.0)])
    def test_mixture_oracle(self, params):
        c, s, nu = params
        p = VGSeneta(c, s, 0.0, nu)
        xs = c + np.linspace(-6 * s, 6 * s, 25)
        for x in xs:
            if x == c:
                continue
            assert abs(vg_pdf(p, x) - mixture_pdf(p, x)) < 1e-8

    def test_non_symmetric_rejected(self):
        with pytest.raises(DomainError):
            vg_pdf(VGSeneta(0.0, 1.0, 0.3, 1.0), 0.5)
        with pytest.raises(DomainError):
            vg_cdf(VGSeneta(0.0, 1.0, 0.3, 1.0), 0.5)


class TestVGCdf:
    @pytest.mark.parametrize("c, s, nu, dx, ref", VG_CDF_REF)
    def test_reference_values(self, c, s, nu, dx, ref):
        assert vg_cdf(VGSeneta(c, s, 0.0, nu), c + dx) == pytest.approx(ref, rel=1e-9)

    @pytest.mark.parametrize("nu", [0.05, 0.4, 2.0, 5.0, 20.0])
    def test_center_and_tails(self, nu):
        p = VGSeneta(1.0, 2.0, 0.0, nu)
        assert vg_cdf(p, 1.0) == 0.5
        assert vg_cdf(p, 1.0 - 50 * 2.0 * max(1.0, math.sqrt(nu))) <= 1e-12
        assert vg_cdf(p, 1.0 + 50 * 2.0 * max(1.0, math.sqrt(nu))) >= 1 - 1e-12

    @given(st.floats(0.05, 10), st.floats(-20, 20))
    def test_symmetry(self, nu, x):
        p = VGSeneta(0.0, 1.0, 0.0, nu)
        assert vg_cdf(p, x) + vg_cdf(p, -x) == pytest.approx(1.0, abs=1e-12)

    @given(st.floats(0.05, 10))
    def test_monotone(self, nu):
        p = VGSeneta(0.0, 1.0, 0.0, nu)
        f = vg_cdf(p, np.linspace(-30, 30, 4001))
        assert np.all(np.diff(f) >= 0)
        assert f.min() >= 0 and f.max() <= 1

    def test_monte_carlo(self):
        p = VGSeneta(0.0, 2 * math.sqrt(5), 0.0, 0.4)
        n = 10**7
        x = sample_vg(p, make_stream(77), n)
        est = np.count_nonzero(x <= 2.0) / n
        f = vg_cdf(p, 2.0)
        assert abs(est - f) < 3 * math.sqrt(f * (1 - f) / n)

    def test_pdf_is_derivative(self):
        p = VGSeneta(0.0, 1.5, 0.0, 0.7)
        h = 1e-5
        for x in (-2.0, 0.3, 1.0, 4.0):
            slope = (vg_cdf(p, x + h) - vg_cdf(p, x - h)) / (2 * h)
            assert slope == pytest.approx(vg_pdf(p, x), rel=1e-6)


class TestVGMgf:
    def test_chisq_difference_identity(self):
        m = 5
        p = VGSeneta(0.0, 2 * math.sqrt(m), 0.0, 2 / m)
        assert vg_mgf(p, 0.0) == 1.0
        assert vg_mgf(p, 0.3) == pytest.approx(3.0517578125, rel=1e-13)
        assert vg_mgf(p, 0.49) == pytest.approx((1 - 4 * 0.49**2) ** -2.5, rel=1e-13)

    # up to 0.9 of the boundary; closer in, rounding of sigma and nu is amplified
    # by m t^2 / (1 - 4 t^2) and the comparison stops being about the formula
    @given(st.floats(0.5, 40), st.floats(-0.45, 0.45))
    def test_chisq_difference_form(self, m, t):
        p = VGSeneta(0.0, 2 * math.sqrt(m), 0.0, 2 / m)
        assert vg_mgf(p, t) == pytest.approx((1 - 4 * t * t) ** (-m / 2), rel=1e-13)

    def test_outside_region(self):
        p = VGSeneta(0.0, 2.0, 0.0, 0.5)
        lo, hi = p.mgf_bound()
        with pytest.raises(DomainError):
            vg_mgf(p, hi * 1.01)

    @pytest.mark.parametrize("nu", [0.4, 1.0])
    def test_numeric_integral(self, nu):
        p = VGSeneta(0.0, 2.0, 0.0, nu)
        lo, hi = p.mgf_bound()
        for t in (0.0, 0.25 * hi, -0.25 * hi, 0.9 * hi, 0.9 * lo):
            assert numeric_mgf(p, t) == pytest.approx(vg_mgf(p, t), rel=1e-5)


class TestVGSampling:
    def test_moments(self):
        p = VGSeneta(1.0, 2.0, 0.0, 0.5)
        x = sample_vg(p, make_stream(3), 10**6)
        assert abs(x.mean() - p.mean()) < 4 * math.sqrt(p.variance() / x.size)
        # variance of the sample variance uses the fourth moment 3 sigma^4 (1 + nu)
        m4 = 3 * p.spread**4 * (1 + p.shape_inv)
        assert abs(x.var() - p.variance()) < 4 * math.sqrt((m4 - p.variance() ** 2) / x.size)

    def test_small_nu_is_nearly_normal(self):
        p = VGSeneta(0.0, 1.0, 0.0, 0.01)
        x = sample_vg(p, make_stream(4), 10**6)
        kurt = np.mean(x**4) / np.mean(x**2) ** 2 - 3
        assert abs(kurt - 3 * p.shape_inv) < 0.03

    def test_deterministic(self):
        p = VGSeneta(0.0, 1.0, 0.0, 1.0)
        assert np.array_equal(sample_vg(p, make_stream(5), 100), sample_vg(p, make_stream(5), 100))


def test_standard_normal():
    z = StandardNormal()
    assert z.mean() == 0.0 and z.variance() == 1.0
    assert z.cdf(0.0) == 0.5
    assert z.quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-12)
