import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special, stats

from dpmeans.errors import BoundaryError, DegenerateMeasureError, MeasureError
from dpmeans.mc import McConfig, estimators, sample_mean
from dpmeans.mean_distribution import (
    cauchy_fixed_point_residual,
    density_grid,
    density_transform,
    mean_cdf_interval,
    mean_density,
    regime_of,
    symmetry_residual,
    uniform_closed_form,
)
from dpmeans.measure import Affine, Cauchy, Discrete, GaussianScaled, Uniform01Scaled, pushforward

# m_alpha for alpha = 2 * Uniform(0, 1) at 1/2, from the generic inversion at default tolerances
UNIFORM_A2_HALF = 2.2262724457673


def beta_pdf(x, p, q):
    return np.exp(special.xlogy(p - 1, x) + special.xlog1py(q - 1, -x) - special.betaln(p, q))


def two_point(b, a, x1=1.0, x0=0.0):
    return Discrete([(x1, b), (x0, a - b)])


class TestDensityExamples:
    def test_cauchy_centre(self):
        v, _ = mean_density(Cauchy(0.0, 1.0), 0.0)
        assert v == pytest.approx(1 / math.pi, abs=1e-12)

    @pytest.mark.parametrize("theta,sigma", [(2.0, 0.5), (-1.0, 3.0)])
    def test_cauchy_general_centre(self, theta, sigma):
        v, _ = mean_density(Cauchy(theta, sigma), theta)
        assert v == pytest.approx(sigma / math.pi, rel=1e-11)

    @pytest.mark.parametrize("xi", [0.05, 0.3, 0.5, 0.77, 0.95])
    def test_uniform(self, xi):
        v, _ = mean_density(two_point(1.0, 2.0), xi)
        assert v == pytest.approx(1.0, abs=1e-12)

    def test_beta_04(self):
        ref = 2 ** 1.2 * math.exp(special.gammaln(0.8) - 2 * special.gammaln(0.4))
        v, _ = mean_density(two_point(0.4, 0.8), 0.5)
        assert v == pytest.approx(ref, rel=1e-10)

    def test_outside_hull_is_zero(self):
        alpha = Discrete([(-1.0, 0.7), (2.0, 1.0)])
        for xi in (-3.0, -1.01, 2.5):
            assert mean_density(alpha, xi) == (0.0, 0.0)

    def test_boundary_refused(self):
        with pytest.raises(BoundaryError):
            mean_density(two_point(1.0, 2.0), 1e-5)

    def test_degenerate_refused(self):
        with pytest.raises(DegenerateMeasureError):
            mean_density(Discrete([(0.3, 2.0)]), 0.3)

    def test_regimes(self):
        assert regime_of(1.0) == "a=1"
        assert regime_of(1 + 1e-13) == "a=1"
        assert regime_of(0.5) == "a<1" and regime_of(2.0) == "a>1"


class TestBetaOracle:
    @settings(max_examples=12, deadline=None)
    @given(st.floats(0.3, 2.5), st.floats(0.3, 2.5), st.floats(0.1, 0.9))
    def test_two_point_is_beta(self, p, q, xi):
        if abs(p + q - 1.0) < 1e-3:
            return
        v, _ = mean_density(two_point(p, p + q), xi)
        assert v == pytest.approx(beta_pdf(xi, p, q), rel=1e-7, abs=1e-9)

    def test_transported(self):
        # b at x1=3 and a-b at x0=-1: Beta(b, a-b) on [-1, 3]
        alpha = Discrete([(3.0, 1.3), (-1.0, 0.6)])
        xi = np.array([-0.5, 0.4, 2.2])
        got = np.array([mean_density(alpha, x)[0] for x in xi])
        np.testing.assert_allclose(got, beta_pdf((xi + 1) / 4, 1.3, 0.6) / 4, rtol=1e-9)


class TestInterval:
    def test_cauchy(self):
        p, _ = mean_cdf_interval(Cauchy(0.0, 1.0), -1.0, 1.0)
        assert p == pytest.approx(0.5, abs=1e-12)

    def test_uniform(self):
        p, _ = mean_cdf_interval(two_point(1.0, 2.0), 0.0, 0.5)
        assert p == pytest.approx(0.5, abs=1e-10)

    def test_beta_quarter_symmetric(self):
        p, _ = mean_cdf_interval(two_point(0.25, 0.5), 0.0, 0.5)
        assert p == pytest.approx(0.5, abs=1e-10)

    def test_beta_quarter_incomplete_beta(self):
        p, _ = mean_cdf_interval(two_point(0.25, 0.5), 0.0, 0.3)
        assert p == pytest.approx(special.betainc(0.25, 0.25, 0.3), abs=1e-10)

    def test_perron_method_agrees(self):
        alpha = Discrete([(0.0, 1.0), (1.0, 1.5)])
        p1, _ = mean_cdf_interval(alpha, 0.2, 0.7)
        p2, _ = mean_cdf_interval(alpha, 0.2, 0.7, method="perron")
        ref = special.betainc(1.5, 1.0, 0.7) - special.betainc(1.5, 1.0, 0.2)
        assert p1 == pytest.approx(ref, abs=1e-10)
        assert p2 == pytest.approx(ref, abs=1e-8)

    def test_full_mass(self):
        alpha = Discrete([(-1.0, 0.7), (0.5, 0.8), (2.0, 1.0)])
        p, _ = mean_cdf_interval(alpha, -1.0, 2.0)
        assert p == pytest.approx(1.0, abs=1e-10)


class TestGrid:
    def test_cauchy(self):
        tab = density_grid(Cauchy(0.0, 1.0), [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(tab.density, [1 / (2 * math.pi), 1 / math.pi, 1 / (2 * math.pi)], atol=1e-12)

    def test_uniform(self):
        tab = density_grid(two_point(1.0, 2.0), [0.25, 0.5, 0.75])
        np.testing.assert_allclose(tab.density, 1.0, atol=1e-12)
        assert tab.regime == "a>1" and not tab.failures

    def test_failures_are_reported(self):
        tab = density_grid(two_point(1.0, 2.0), [0.0, 0.5, 1.0])
        assert [f[0] for f in tab.failures] == [0.0, 1.0]
        assert np.isnan(tab.density[0]) and tab.density[1] == pytest.approx(1.0)

    def test_gaussian_against_mc_kde(self):
        alpha = GaussianScaled(2.0, 0.0, 1.0)
        grid = np.linspace(-3, 3, 41)
        tab = density_grid(alpha, grid)
        assert not tab.failures
        s = sample_mean(alpha, McConfig(n_samples=100_000, seed=3))
        n = s.size
        iqr = np.subtract(*np.percentile(s, [75, 25]))
        h = 0.9 * min(np.std(s, ddof=1), iqr / 1.34) * n ** -0.2
        z = []
        for x, d in zip(grid, tab.density):
            k, se = estimators(s, "kde", x)
            # in the far tail only a handful of samples hit the kernel, so the
            # sample se collapses; floor it by the kernel's asymptotic sd
            se = max(se, math.sqrt(d / (2 * math.sqrt(math.pi) * h * n)))
            z.append(abs(d - k) / se)
        assert max(z) <= 3.0
        assert tab.trapezoid_mass() == pytest.approx(1.0, abs=2e-3)


class TestUniformClosedForm:
    def test_frozen_value(self):
        assert uniform_closed_form(2.0, 0.5) == pytest.approx(UNIFORM_A2_HALF, rel=1e-12)

    @pytest.mark.parametrize("a,xi", [(2.0, 0.3), (3.5, 0.1), (1.4, 0.8)])
    def test_matches_generic(self, a, xi):
        assert uniform_closed_form(a, xi) == pytest.approx(mean_density(Uniform01Scaled(a), xi)[0], rel=1e-9)

    @pytest.mark.parametrize("xi", [0.02, 0.2, 0.45])
    def test_reflection(self, xi):
        assert uniform_closed_form(2.5, xi) == pytest.approx(uniform_closed_form(2.5, 1 - xi), rel=1e-10)

    def test_normalisation(self):
        for n in (9, 39):
            x = np.linspace(0, 1, n + 2)
            m = np.r_[0.0, [uniform_closed_form(2.0, v) for v in x[1:-1]], 0.0]
            mass = np.trapezoid(m, x)
            assert 0.98 <= mass <= 1.02
        assert abs(mass - 1) < 1e-3

    def test_domain(self):
        with pytest.raises(ValueError):
            uniform_closed_form(0.9, 0.5)


class TestFixedPointAndSymmetry:
    def test_cauchy_fixed_point(self):
        assert cauchy_fixed_point_residual(0.0, 1.0, np.linspace(-5, 5, 21)) <= 1e-4
        assert cauchy_fixed_point_residual(2.0, 0.5, np.linspace(-8, 12, 21) / 2) <= 1e-4

    def test_gaussian_is_not_fixed(self):
        x = np.linspace(-2, 2, 9)
        m = density_grid(GaussianScaled(1.0, 0.0, 1.0), x).density
        assert np.max(np.abs(m - stats.norm.pdf(x))) > 0.01

    @pytest.mark.parametrize("alpha", [Discrete([(1.0, 1.0), (-1.0, 1.0)]), Cauchy(0.0, 2.0)], ids=["pm1", "cauchy"])
    def test_symmetric(self, alpha):
        assert symmetry_residual(alpha, np.linspace(-0.9, 0.9, 7)) <= 1e-6

    def test_negative_control(self):
        alpha = Discrete([(2.0, 1.0), (-1.0, 1.0)])
        with pytest.raises(MeasureError):
            symmetry_residual(alpha, [-0.5, 0.5])
        assert symmetry_residual(alpha, [-1.5, -0.5, 0.5, 1.5], require_symmetric=False) > 0.01


class TestInvariants:
    @settings(max_examples=10, deadline=None)
    @given(
        st.floats(0.4, 2.0), st.floats(0.4, 2.0),
        st.floats(-3, 3).filter(lambda s: abs(s) > 0.2), st.floats(-2, 2), st.floats(0.15, 0.85),
    )
    def test_affine_equivariance(self, p, q, s, c, u):
        alpha = Discrete([(-0.5, p), (1.5, q)])
        xi = -0.5 + 2.0 * u
        image = pushforward(alpha, Affine(s, c))
        lhs, e1 = mean_density(image, s * xi + c)
        rhs, e2 = mean_density(alpha, xi)
        assert abs(lhs - rhs / abs(s)) <= 1e-7 * (1 + rhs / abs(s)) + e1 + e2

    def test_affine_cauchy(self):
        image = pushforward(Cauchy(0.0, 1.0), Affine(2.0, 1.0))
        v, _ = mean_density(image, 2.0 * 0.3 + 1.0)
        assert v == pytest.approx(mean_density(Cauchy(0.0, 1.0), 0.3)[0] / 2.0, rel=1e-12)

    @pytest.mark.parametrize(
        "alpha",
        [Discrete([(-1.0, 1.5), (2.0, 0.7)]), Discrete([(0.0, 0.3), (1.0, 0.45)]), Cauchy(1.0, 2.0)],
        ids=["a>1", "a<1", "cauchy"],
    )
    def test_normalisation(self, alpha):
        v, e, _ = density_transform(alpha, lambda x: np.ones_like(x))
        assert abs(v - 1.0) <= max(1e-6, e)

    def test_first_moment(self):
        alpha = Discrete([(-1.0, 1.5), (2.0, 0.7)])
        v, e, _ = density_transform(alpha, lambda x: x)
        assert abs(v - (-1.5 + 1.4) / 2.2) <= max(1e-7, e)
