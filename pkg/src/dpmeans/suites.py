"""Cross-identity checks run by ``dpmeans verify`` on built-in measure panels.

Each suite returns a list of :class:`Check` records. A check passes when its
residual is at most the threshold; a negative control passes when its
residual is at least ``10 * threshold``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy import integrate

from .charfn import mean_charfn, variance_mgf
from .errors import DPMeansError
from .gamma_mean import gamma_charfn, gamma_mean_cdf, gamma_mean_density, levy_g, levy_reconstruct_charfn, levy_triple
from .identities import lauricella_stieltjes, mk_transform
from .mc import McConfig, estimators, sample_gamma_functional
from .mean_distribution import cauchy_fixed_point_residual, density_grid, density_transform, symmetry_residual
from .measure import Cauchy, Discrete, GaussianScaled, ParameterMeasure, truncate
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

__all__ = ["Check", "SUITES", "panel", "discrete_panel", "run_suite", "run_all"]


@dataclass
class Check:
    suite: str
    name: str
    residual: float
    threshold: float
    negative_control: bool = False
    note: str = ""

    @property
    def passed(self) -> bool:
        if not np.isfinite(self.residual):
            return False
        if self.negative_control:
            return self.residual >= 10 * self.threshold
        return self.residual <= self.threshold

    def line(self) -> str:
        if self.negative_control:
            status = "EXPECTED-FAIL-PASSED" if self.passed else "FAIL (control did not separate)"
        else:
            status = "PASS" if self.passed else "FAIL"
        extra = f"  {self.note}" if self.note else ""
        return f"{status:<8} {self.suite}/{self.name}  residual={self.residual:.3e}  threshold={self.threshold:.1e}{extra}"


def panel() -> Dict[str, ParameterMeasure]:
    """Two-point, three-point, Cauchy and truncated Gaussian parameter measures."""
    return {
        "two-point": Discrete([(0.0, 1.0), (1.0, 1.0)]),
        "three-point": Discrete([(-1.0, 0.7), (0.5, 0.8), (2.0, 1.0)]),
        "cauchy": Cauchy(0.0, 1.0),
        "truncated-gaussian": truncate(GaussianScaled(2.0, 0.0, 1.0), 2.0),
    }


def discrete_panel() -> Dict[str, ParameterMeasure]:
    p = panel()
    return {k: p[k] for k in ("two-point", "three-point")}


def _failed(suite, name, exc, threshold, negative=False):
    return Check(suite, name, np.nan, threshold, negative, note=f"error: {exc}")


def suite_mk(user=None, cfg=DEFAULT_CONFIG, tol=1e-6, ts=(0.3, 1.0, 3.0)) -> List[Check]:
    """Density-side ``int (1+itx)**-a m(x) dx`` against ``exp(-zeta(it))``."""
    measures = panel()
    if user is not None:
        measures["user"] = user
    out = []
    for key, alpha in measures.items():
        a = alpha.total_mass
        cache = None
        for t in ts:
            name = f"{key} t={t:g}"
            try:
                v, e, cache = density_transform(alpha, lambda x, t=t: (1.0 + 1j * t * x) ** (-a), cfg, cache=cache)
                out.append(Check("mk", name, abs(v - mk_transform(t, alpha, cfg)), tol, note=f"err_est={e:.1e}"))
            except (DPMeansError, ValueError, NotImplementedError) as exc:
                out.append(_failed("mk", name, exc, tol))
    return out


def suite_lauricella(user=None, cfg=DEFAULT_CONFIG, tol=1e-5, ts=(0.3, 1.0, 3.0)) -> List[Check]:
    """Order-``c`` transform from alpha against the density side, for ``c < a`` and ``c > a``."""
    measures = discrete_panel()
    if user is not None:
        measures["user"] = user
    out = []
    for key, alpha in measures.items():
        a = alpha.total_mass
        cache = None
        for c in (0.5 * a, a + 1.0):
            for t in ts:
                name = f"{key} c={c:g} t={t:g}"
                try:
                    v, _, cache = density_transform(alpha, lambda x, t=t, c=c: (1.0 + 1j * t * x) ** (-c), cfg, cache=cache)
                    out.append(Check("lauricella", name, abs(v - lauricella_stieltjes(t, alpha, c, cfg)), tol))
                except (DPMeansError, ValueError, NotImplementedError) as exc:
                    out.append(_failed("lauricella", name, exc, tol))
        for t in ts:
            diff = abs(lauricella_stieltjes(t, alpha, a, cfg) - mk_transform(t, alpha, cfg))
            out.append(Check("lauricella", f"{key} c=a t={t:g}", diff, 0.0))
    return out


def suite_cauchy_fixed_point(user=None, cfg=DEFAULT_CONFIG, tol=1e-4) -> List[Check]:
    """A Cauchy alpha reproduces itself as the law of the mean."""
    out = []
    for theta, sigma in ((0.0, 1.0), (2.0, 0.5)):
        grid = np.linspace(theta - 5 * sigma, theta + 5 * sigma, 21)
        name = f"theta={theta:g} sigma={sigma:g}"
        try:
            out.append(Check("cauchy-fixed-point", name, cauchy_fixed_point_residual(theta, sigma, grid, cfg), tol))
        except DPMeansError as exc:
            out.append(_failed("cauchy-fixed-point", name, exc, tol))
    return out


def _symmetric_grid(alpha):
    lo, hi = alpha.hull
    r = max(abs(lo), abs(hi))
    # for an asymmetric hull the outer points land outside the shorter side
    pos = r * np.array([0.125, 0.375, 0.625, 0.875]) if np.isfinite(r) else alpha.scale() * np.array([0.5, 1.0, 2.0, 3.0])
    return np.concatenate([-pos[::-1], pos])


def _sym_checks(key, alpha, cfg, tol_m, tol_im, negative):
    out = []
    grid = _symmetric_grid(alpha)
    try:
        r = symmetry_residual(alpha, grid, cfg, require_symmetric=not negative)
        out.append(Check("symmetry", f"{key} density", r, tol_m, negative))
    except DPMeansError as exc:
        out.append(_failed("symmetry", f"{key} density", exc, tol_m, negative))
    for t in (0.5, 1.0, 2.0):
        try:
            v = mean_charfn(t, alpha, cfg).value
            out.append(Check("symmetry", f"{key} Im charfn t={t:g}", abs(v.imag), tol_im, negative))
        except DPMeansError as exc:
            out.append(_failed("symmetry", f"{key} Im charfn t={t:g}", exc, tol_im, negative))
    return out


def suite_symmetry(user=None, cfg=DEFAULT_CONFIG, tol_m=1e-4, tol_im=1e-5) -> List[Check]:
    """Symmetric alpha gives an even density and a real charfn; an asymmetric control must not."""
    symmetric = {
        "two-point+-1": Discrete([(-1.0, 1.0), (1.0, 1.0)]),
        "three-point+-1": Discrete([(-1.0, 0.3), (0.0, 0.5), (1.0, 0.3)]),
        "cauchy": Cauchy(0.0, 1.0),
    }
    out = []
    for key, alpha in symmetric.items():
        out += _sym_checks(key, alpha, cfg, tol_m, tol_im, False)
    out += _sym_checks("control d2+d-1", Discrete([(2.0, 1.0), (-1.0, 1.0)]), cfg, tol_m, tol_im, True)
    if user is not None:
        out += _sym_checks("user", user, cfg, tol_m, tol_im, not user.is_symmetric())
    return out


def suite_levy(user=None, cfg=DEFAULT_CONFIG, tol=1e-5) -> List[Check]:
    """Levy-Khintchine reconstruction of the gamma-mean charfn."""
    measures = discrete_panel()
    if user is not None:
        measures["user"] = user
    out = []
    for key, alpha in measures.items():
        try:
            triple = levy_triple(alpha, cfg)
        except DPMeansError as exc:
            out.append(_failed("levy", f"{key} triple", exc, tol))
            continue
        for t in (0.5, 1.0, 3.0):
            r = abs(levy_reconstruct_charfn(t, alpha, cfg, triple) - gamma_charfn(t, alpha))
            out.append(Check("levy", f"{key} t={t:g}", r, tol))
        u = np.concatenate([-np.geomspace(1e-6, 1e3, 200), np.geomspace(1e-6, 1e3, 200)])
        out.append(Check("levy", f"{key} min g", max(0.0, -float(np.min(levy_g(u, alpha, cfg)))), 0.0))
    point0 = Discrete([(0.0, 1.0)])
    r = max(abs(gamma_charfn(t, point0) - 1.0) for t in (0.5, 1.0, 3.0))
    out.append(Check("levy", "alpha=delta0 charfn", r, 0.0))
    return out


def _gamma2_check(cfg, tol):
    alpha = Discrete([(1.0, 2.0)])
    x = np.linspace(0.1, 8.0, 80)
    q = np.array([gamma_mean_density(v, alpha, None, cfg)[0] for v in x])
    ref = x * np.exp(-x)
    return Check("gamma", "2*delta1 vs Gamma(2) pdf", float(np.max(np.abs(q - ref))), tol)


def gamma_ks(alpha, cfg=DEFAULT_CONFIG, n=100_000, seed=0, table_points=401):
    """KS distance between the mixture cdf and a Monte Carlo sample, with its standard error."""
    lo, hi = alpha.hull
    m = cfg.boundary_margin * (hi - lo) * 1.5
    table = density_grid(alpha, np.linspace(lo + m, hi - m, table_points), cfg)
    if table.failures:
        raise DPMeansError(f"density table failed at {table.failures[0][0]!r}")
    s = sample_gamma_functional(alpha, cfg=McConfig(n_samples=n, seed=seed))
    xs = np.linspace(0.0, float(np.quantile(s, 0.99999)) * 1.05, 600)
    cdf = np.array([gamma_mean_cdf(v, alpha, table)[0] for v in xs])
    return estimators(s, "ks", lambda v: np.interp(v, xs, cdf, left=0.0, right=1.0))


def suite_gamma(user=None, cfg=DEFAULT_CONFIG, tol=1e-5, ks_tol=0.01, n=100_000, seed=0) -> List[Check]:
    """Gamma-mean density and cdf against closed forms and sampling."""
    out = [_gamma2_check(cfg, tol)]
    measures = {"d1+d2": Discrete([(1.0, 1.0), (2.0, 1.0)])}
    if user is not None:
        measures["user"] = user
    for key, alpha in measures.items():
        try:
            ks, se = gamma_ks(alpha, cfg, n, seed)
            out.append(Check("gamma", f"{key} KS vs MC", ks, ks_tol, note=f"se={se:.1e}"))
        except (DPMeansError, ValueError) as exc:
            out.append(_failed("gamma", f"{key} KS vs MC", exc, ks_tol))
    return out


def variance_oracle(t):
    """``int_0^1 exp(-t u (1-u)) du`` for alpha = delta0 + delta1."""
    v, _ = integrate.quad(lambda u: math.exp(-t * u * (1 - u)), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return v


def suite_var_mgf(user=None, cfg=DEFAULT_CONFIG, tol=1e-4) -> List[Check]:
    """Variance transform against a one-dimensional oracle, plus shape checks."""
    alpha = Discrete([(1.0, 1.0), (0.0, 1.0)])
    out = []
    for t in (0.5, 1.0, 2.0):
        out.append(Check("var-mgf", f"d1+d0 t={t:g}", abs(variance_mgf(t, alpha, cfg) - variance_oracle(t)), tol))
    out.append(Check("var-mgf", "value at t=0", abs(variance_mgf(0.0, alpha, cfg) - 1.0), 0.0))
    measures = {"d1+d0": alpha}
    if user is not None:
        measures["user"] = user
    for key, al in measures.items():
        try:
            vals = np.array([variance_mgf(t, al, cfg) for t in np.linspace(0.0, 4.0, 9)])
            rise = float(np.max(np.diff(vals), initial=0.0))
            out.append(Check("var-mgf", f"{key} nonincreasing", max(rise, 0.0), 1e-12))
        except (DPMeansError, ValueError) as exc:
            out.append(_failed("var-mgf", f"{key} nonincreasing", exc, 1e-12))
    return out


SUITES: Dict[str, Callable[..., List[Check]]] = {
    "mk": suite_mk,
    "lauricella": suite_lauricella,
    "cauchy-fixed-point": suite_cauchy_fixed_point,
    "symmetry": suite_symmetry,
    "levy": suite_levy,
    "gamma": suite_gamma,
    "var-mgf": suite_var_mgf,
}


def run_suite(name: str, user: Optional[ParameterMeasure] = None, cfg: QuadratureConfig = DEFAULT_CONFIG) -> List[Check]:
    if name == "all":
        return run_all(user, cfg)
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](user, cfg)


def run_all(user=None, cfg=DEFAULT_CONFIG) -> List[Check]:
    out = []
    for fn in SUITES.values():
        out += fn(user, cfg)
    return out
