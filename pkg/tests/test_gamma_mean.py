import math

import numpy as np
import pytest
from scipy import special

from dpmeans.gamma_mean import (
    gamma_charfn,
    gamma_mean_cdf,
    gamma_mean_density,
    levy_g,
    levy_reconstruct_charfn,
    levy_triple,
    tucker_integrals,
)
from dpmeans.mc import McConfig, estimators, sample_gamma_functional, sample_mean
from dpmeans.mean_distribution import density_grid
from dpmeans.measure import Discrete
from dpmeans.suites import gamma_ks


def gamma_pdf(x, a):
    return math.exp((a - 1) * math.log(x) - x - special.gammaln(a))


@pytest.fixture(scope="module")
def pair_table():
    alpha = Discrete([(1.0, 1.0), (2.0, 1.0)])
    return alpha, density_grid(alpha, np.linspace(1.0045, 1.9955, 401))


class TestCharfn:
    @pytest.mark.parametrize("t", [0.3, 2.0, -5.0])
    def test_atom_at_zero(self, t):
        assert gamma_charfn(t, Discrete([(0.0, 2.5)])) == 1

    def test_gamma2(self):
        assert abs(gamma_charfn(1.0, Discrete([(1.0, 2.0)])) - 0.5j) < 1e-14

    def test_two_sided_product(self):
        alpha = Discrete([(1.0, 1.0), (-2.0, 1.0)])
        ref = 1 / ((1 - 0.7j) * (1 + 1.4j))
        assert abs(gamma_charfn(0.7, alpha) - ref) < 1e-14

    def test_two_sided_monte_carlo(self):
        alpha = Discrete([(1.0, 1.0), (-2.0, 1.0)])
        s = sample_gamma_functional(alpha, cfg=McConfig(n_samples=100_000, seed=21))
        v, se = estimators(s, "ecf", 0.7)
        assert abs(gamma_charfn(0.7, alpha) - v) <= 3 * se


class TestDensity:
    @pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
    @pytest.mark.parametrize("x", [0.3, 1.0, 4.0])
    def test_gamma(self, a, x):
        v, _ = gamma_mean_density(x, Discrete([(1.0, a)]))
        assert v == pytest.approx(gamma_pdf(x, a), rel=1e-13)

    @pytest.mark.parametrize("x", [-0.3, -2.0])
    def test_reflected(self, x):
        v, _ = gamma_mean_density(x, Discrete([(-1.0, 1.5)]))
        assert v == pytest.approx(gamma_pdf(-x, 1.5), rel=1e-13)
        assert gamma_mean_density(-x, Discrete([(-1.0, 1.5)]))[0] == 0.0

    def test_table_required(self):
        with pytest.raises(ValueError):
            gamma_mean_density(1.0, Discrete([(1.0, 1.0), (2.0, 1.0)]))

    def test_pair_closed_form(self, pair_table):
        # G1 + 2 G2 has density e^{-x/2} (1 - e^{-x/2})
        alpha, table = pair_table
        for x in (0.5, 2.0, 6.0):
            v, _ = gamma_mean_density(x, alpha, table)
            assert v == pytest.approx(math.exp(-x / 2) * -math.expm1(-x / 2), rel=1e-3)

    def test_normalisation(self, pair_table):
        alpha, table = pair_table
        assert gamma_mean_cdf(80.0, alpha, table)[0] == pytest.approx(1.0, abs=1e-6)

    def test_ks_against_gamma_sum(self):
        ks, _ = gamma_ks(Discrete([(1.0, 1.0), (2.0, 1.0)]), seed=7)
        assert ks <= 0.01

    def test_scale_mixture_law(self, pair_table):
        # the gamma mean equals T X in law, T ~ Gamma(a) and X the Dirichlet mean
        alpha, table = pair_table
        cfg = McConfig(n_samples=100_000, seed=13)
        x = sample_mean(alpha, cfg)
        t = np.random.Generator(np.random.Philox(99)).gamma(2.0, size=x.size)
        grid = np.linspace(0.0, 40.0, 400)
        cdf = np.array([gamma_mean_cdf(v, alpha, table)[0] for v in grid])
        ks, _ = estimators(t * x, "ks", lambda v: np.interp(v, grid, cdf, right=1.0))
        assert ks <= 0.01


class TestLevy:
    def test_single_atom(self):
        assert levy_g(1.0, Discrete([(1.0, 1.0)])) == pytest.approx(math.exp(-1) / 2, rel=1e-15)
        assert levy_g(-1.0, Discrete([(1.0, 1.0)])) == 0.0

    def test_weight_relation(self):
        # (1+u^2)/u^2 g(u) is the Gamma(1) Levy density e^{-u}/u
        u = np.array([0.1, 1.0, 3.0])
        g = levy_g(u, Discrete([(1.0, 1.0)]))
        np.testing.assert_allclose((1 + u * u) / (u * u) * g, np.exp(-u) / u, rtol=1e-14)

    def test_zero_atom(self):
        assert np.all(levy_g(np.array([-2.0, -0.5, 0.5, 2.0]), Discrete([(0.0, 3.0)])) == 0)

    def test_nonnegative(self):
        alpha = Discrete([(-1.0, 0.7), (0.5, 0.8), (2.0, 1.0)])
        assert np.all(levy_g(np.linspace(-20, 20, 401), alpha) >= 0)

    def test_drift_is_signed_inverse_moment(self):
        tr = levy_triple(Discrete([(1.0, 2.0)]))
        # int_0^inf e^{-u}/(1+u^2) du times the mass
        ref = 2 * (math.cos(1) * (math.pi / 2 - special.sici(1)[0]) + math.sin(1) * special.sici(1)[1])
        assert tr.drift == pytest.approx(ref, rel=1e-9)
        assert tr.inv_abs_moment == pytest.approx(ref, rel=1e-9)
        assert 0 < tr.G_total < np.inf

    @pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
    def test_reconstruct_gamma2(self, t):
        assert abs(levy_reconstruct_charfn(t, Discrete([(1.0, 2.0)])) - (1 - 1j * t) ** -2) <= 1e-5

    def test_reconstruct_zero(self):
        assert levy_reconstruct_charfn(0.0, Discrete([(1.0, 2.0)])) == 1

    @pytest.mark.parametrize("t", [0.5, 1.0, 3.0])
    def test_reconstruct_symmetric(self, t):
        assert abs(levy_reconstruct_charfn(t, Discrete([(1.0, 1.0), (-1.0, 1.0)])) - 1 / (1 + t * t)) <= 1e-5

    @pytest.mark.parametrize("t", [0.5, 3.0])
    def test_reconstruct_matches_charfn(self, t):
        alpha = Discrete([(-1.0, 0.7), (0.5, 0.8), (2.0, 1.0)])
        assert abs(levy_reconstruct_charfn(t, alpha) - gamma_charfn(t, alpha)) <= 1e-5

    def test_tucker_growth(self):
        v = tucker_integrals(Discrete([(1.0, 1.0), (-0.5, 1.0)]))
        assert np.all(np.diff(v) > 0)
        # g(x) ~ x near 0, so each decade adds about log(10) times the Thorin mass
        assert v[-1] - v[-2] == pytest.approx(math.log(10), rel=1e-2)
