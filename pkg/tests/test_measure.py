import json
import math

import numpy as np
import pytest
from scipy import stats

from dpmeans.errors import MeasureError
from dpmeans.measure import (
    Affine,
    Cauchy,
    Discrete,
    GaussianScaled,
    load_measure,
    log_moment,
    pushforward,
    thorin_measure,
    truncate,
)

CATALAN = 0.915965594177219015


def atoms_dict(mu):
    return {round(float(x), 12): float(m) for x, m in zip(mu.atoms_x, mu.atoms_m)}


class TestLogMoment:
    def test_atom_at_zero(self):
        assert log_moment(Discrete([(0.0, 2.0)])) == (0.0, True)

    def test_two_atoms(self):
        v, finite = log_moment(Discrete([(1.0, 1.0), (-3.0, 1.0)]))
        assert finite
        assert v == pytest.approx(math.log(2) + math.log(4), rel=1e-14)

    def test_cauchy_against_closed_form(self):
        # int_0^inf log(1+x)/(1+x^2) dx = pi/4 log 2 + G
        ref = math.log(2) / 2 + 2 * CATALAN / math.pi
        v, finite = log_moment(Cauchy(0.0, 1.0))
        assert finite
        assert v == pytest.approx(ref, abs=1e-11)
        # frozen value from an independent scipy quad run
        assert v == pytest.approx(0.92969539834161, abs=1e-12)


class TestTruncate:
    def test_all_mass_above(self):
        mu = truncate(Discrete([(5.0, 1.0)]), 2.0)
        assert atoms_dict(mu) == {2.0: 1.0}

    def test_inside_is_identity(self):
        alpha = Discrete([(-1.0, 1.0), (0.5, 2.0)])
        assert truncate(alpha, 3.0) is alpha

    def test_cauchy_tails_collapse(self):
        mu = truncate(Cauchy(0.0, 1.0), 10.0)
        tail = stats.cauchy.sf(10.0)
        d = atoms_dict(mu)
        assert d[-10.0] == pytest.approx(tail, rel=1e-12)
        assert d[10.0] == pytest.approx(tail, rel=1e-12)
        assert mu.continuous.weight == pytest.approx(1 - 2 * tail, rel=1e-12)
        assert mu.hull == (-10.0, 10.0)
        assert mu.total_mass == pytest.approx(1.0, rel=1e-14)

    def test_weak_convergence_on_cosine(self):
        alpha = Cauchy(0.0, 1.0)
        exact = math.exp(-1.0)  # E cos(X) for the standard Cauchy law
        errs = [abs(truncate(alpha, k).integrate(np.cos) - exact) for k in (4.0, 16.0, 64.0)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-2


class TestPushforward:
    def test_square(self):
        mu = pushforward(Discrete([(2.0, 1.0), (-1.0, 1.0)]), lambda x: x ** 2)
        assert atoms_dict(mu) == {4.0: 1.0, 1.0: 1.0}

    def test_affine_cauchy(self):
        mu = pushforward(Cauchy(1.0, 2.0), Affine(-3.0, 0.5))
        p = mu.continuous.params
        assert p["theta"] == pytest.approx(-2.5)
        # half-width 1/sigma scales by |s|
        assert p["sigma"] == pytest.approx(2.0 / 3.0)

    def test_identity_cdf(self):
        alpha = GaussianScaled(2.0, 0.3, 1.5)
        mu = pushforward(alpha, None)
        u = np.linspace(-4, 4, 17)
        np.testing.assert_allclose(mu.cdf(u), alpha.cdf(u), atol=1e-14)

    def test_grid_gaussian_cdf(self):
        a, n = 2.0, 10_000
        mu = pushforward(GaussianScaled(a, 0.0, 1.0), lambda x: x, method="sample-grid", grid=n)
        u = np.linspace(-3, 3, 61)
        assert np.max(np.abs(mu.cdf(u) - a * stats.norm.cdf(u))) <= a / n


class TestThorin:
    def test_single(self):
        th, dropped = thorin_measure(Discrete([(2.0, 1.0)]))
        assert atoms_dict(th) == {0.5: 1.0} and dropped == 0.0

    def test_two(self):
        th, _ = thorin_measure(Discrete([(2.0, 1.0), (-0.5, 3.0)]))
        assert atoms_dict(th) == {0.5: 1.0, -2.0: 3.0}

    def test_zero_dropped(self):
        th, dropped = thorin_measure(Discrete([(0.0, 2.0)]))
        assert th.atoms_x.size == 0 and dropped == 2.0

    def test_involution(self):
        alpha = Discrete([(0.25, 1.0), (-4.0, 0.5), (3.0, 2.0)])
        back, _ = thorin_measure(thorin_measure(alpha)[0])
        np.testing.assert_allclose(np.sort(back.atoms_x), np.sort(alpha.atoms_x), rtol=1e-15)


class TestLoad:
    def test_discrete(self):
        mu = load_measure(json.dumps({"kind": "discrete", "atoms": [{"x": 0, "mass": 1}, {"x": 1, "mass": 2}]}))
        assert mu.total_mass == 3.0

    def test_cauchy(self):
        mu = load_measure({"kind": "cauchy", "params": {"theta": 1, "sigma": 2}})
        assert mu.continuous.params == {"theta": 1.0, "sigma": 2.0}

    @pytest.mark.parametrize(
        "text",
        [
            '{"kind": "discrete", "atoms": [',
            '{"kind": "martian"}',
            '{"kind": "discrete", "atoms": []}',
            '{"kind": "discrete", "atoms": [{"x": NaN, "mass": 1}]}',
            '{"kind": "discrete", "atoms": [{"x": 0, "mass": -1}]}',
            '{"atoms": []}',
        ],
    )
    def test_rejects(self, text):
        with pytest.raises(MeasureError):
            load_measure(text)
