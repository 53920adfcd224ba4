import math

import numpy as np
import pytest
from scipy.special import betaln, gammaln

from dpmeans.errors import LimitError
from dpmeans.mean_distribution import mean_stieltjes
from dpmeans.measure import Cauchy
from dpmeans.quadrature import (
    DEFAULT_CONFIG,
    CircularArc,
    Contour,
    LineSegment,
    QuadratureConfig,
    build_loop_01,
    integrate_contour,
    integrate_infinite,
    integrate_interval,
    pv_vertical_line,
    stieltjes_perron_limit,
)

TWO_PI_I = 2j * math.pi


def unit_circle():
    return Contour((CircularArc(0j, 1.0, -math.pi, math.pi),))


class TestInterval:
    def test_constant(self):
        v, e = integrate_interval(lambda u: np.ones_like(u), 0.0, 1.0)
        assert v == pytest.approx(1.0, abs=1e-15) and e < 1e-12

    def test_inverse_sqrt(self):
        v, _ = integrate_interval(lambda u: u ** -0.5, 0.0, 1.0, exponents=(-0.5, None))
        assert v == pytest.approx(2.0, abs=1e-11)

    def test_beta_integral(self):
        b, c = 0.4, 0.7
        v, _ = integrate_interval(lambda u: u ** (b - 1) * (1 - u) ** (c - 1), 0.0, 1.0, exponents=(b - 1, c - 1))
        assert v == pytest.approx(math.exp(betaln(b, c)), rel=1e-10)

    def test_beta_by_weights(self):
        v, _ = integrate_interval(lambda u: np.ones_like(u), 0.0, 1.0, weights=(-0.95, -0.6))
        assert v == pytest.approx(math.exp(betaln(0.05, 0.4)), rel=1e-12)

    def test_reversed_limits(self):
        v, _ = integrate_interval(lambda u: u ** 2, 1.0, 0.0)
        assert v == pytest.approx(-1.0 / 3.0, abs=1e-15)

    def test_complex_oscillatory(self):
        v, _ = integrate_interval(lambda u: np.exp(20j * u), 0.0, 1.0)
        assert abs(v - (np.exp(20j) - 1) / 20j) < 1e-13

    def test_infinite(self):
        v, _ = integrate_infinite(lambda x: 1.0 / (1.0 + x * x))
        assert v == pytest.approx(math.pi, abs=1e-12)

    def test_interior_kink(self):
        v, _ = integrate_interval(lambda u: np.abs(u - 0.3) ** 0.5, 0.0, 1.0, points=[(0.3, 0.5)])
        assert v == pytest.approx((0.3 ** 1.5 + 0.7 ** 1.5) / 1.5, rel=DEFAULT_CONFIG.rel_tol)


class TestContour:
    def test_constant_on_closed_loop(self):
        v, _ = integrate_contour(lambda w: np.ones_like(w), unit_circle())
        assert abs(v) < 1e-14

    def test_cauchy_integral(self):
        v, _ = integrate_contour(lambda w: 1.0 / w, unit_circle())
        assert abs(v - TWO_PI_I) < 1e-13

    def test_slater_normalisation(self):
        c, a = 2.0, 0.5
        loop = build_loop_01(origin_exponent=c - 1)
        v, _ = integrate_contour(lambda w: w ** (c - 1) * (w - 1) ** (a - c - 1), loop)
        ref = TWO_PI_I * math.exp(gammaln(c) - gammaln(c - a + 1) - gammaln(a))
        assert abs(v - ref) < 1e-10

    def test_loop_construction(self):
        loop = build_loop_01(QuadratureConfig(loop_eps=0.1, loop_tau=0.05))
        assert len(loop.segments) == 3
        assert loop.closed
        for s0, s1 in zip(loop.segments, loop.segments[1:] + loop.segments[:1]):
            assert abs(s0.end - s1.start) < 1e-12

    @pytest.mark.parametrize("tau", [0.0, -0.1])
    def test_degenerate_loop_rejected(self, tau):
        with pytest.raises(ValueError):
            build_loop_01(tau=tau)

    def test_winding_number(self):
        v, _ = integrate_contour(lambda w: 1.0 / (w - 1.0), build_loop_01())
        assert abs(v - TWO_PI_I) < 1e-12

    def test_deformation_invariance(self):
        def g(w):
            return np.exp(w) * w ** 0.5 * (w - 1) ** -1.3

        full, e1 = integrate_contour(g, build_loop_01(origin_exponent=0.5))
        half, e2 = integrate_contour(g, build_loop_01(radius=0.125, tau=0.025, origin_exponent=0.5))
        assert abs(full - half) <= max(e1 + e2, 1e-10)

    def test_discontinuous_chain_rejected(self):
        with pytest.raises(ValueError):
            Contour((LineSegment(0j, 1 + 0j), LineSegment(2 + 0j, 3 + 0j)))


class TestPvLine:
    def test_double_pole(self):
        v, _ = pv_vertical_line(lambda w: np.exp(w) / w ** 2, 1.0)
        assert abs(v - TWO_PI_I) < 1e-9

    def test_simple_pole(self):
        v, _ = pv_vertical_line(lambda w: np.exp(w) / w, 1.0)
        assert abs(v - TWO_PI_I) < 1e-9

    def test_hankel_reciprocal_gamma(self):
        a = 1.7
        v, _ = pv_vertical_line(lambda w: np.exp(w) * w ** -a, 1.0)
        assert abs(v - TWO_PI_I * math.exp(-gammaln(a))) < 1e-9

    def test_gamma_invariance(self):
        def g(w):
            return np.exp(w) * w ** -1.7

        v1, e1 = pv_vertical_line(g, 1.0)
        v2, e2 = pv_vertical_line(g, 2.0)
        assert abs(v1 - v2) <= max(e1 + e2, 1e-9)


class TestPerron:
    def test_polynomial(self):
        c = 0.7
        v, _ = stieltjes_perron_limit(lambda lam, eps: eps + 1j * (c + eps ** 2), 0.0)
        assert v == pytest.approx(c / math.pi, abs=1e-13)

    def test_analytic(self):
        v, _ = stieltjes_perron_limit(lambda lam, eps: 1j / (lam ** 2 + eps ** 2), 2.0)
        assert v == pytest.approx(1 / (4 * math.pi), abs=1e-13)

    def test_cauchy_a1_integrand(self):
        alpha = Cauchy(0.0, 1.0)
        v, _ = stieltjes_perron_limit(lambda lam, eps: mean_stieltjes(alpha, lam + 1j * eps), 0.0)
        assert v == pytest.approx(1 / math.pi, abs=1e-12)

    def test_divergent_limit_raises(self):
        with pytest.raises(LimitError):
            stieltjes_perron_limit(lambda lam, eps: 1j / eps, 0.0, DEFAULT_CONFIG)
