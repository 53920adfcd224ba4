"""Density and interval probabilities of the Dirichlet mean ``mu_alpha``.

Everything goes through the Stieltjes transform
``H(z) = int mu_alpha(dx) / (x - z)`` for ``Im z > 0``, which is written in
terms of ``zeta`` alone. Translating alpha by ``-Re z`` puts the evaluation
point at ``z = i eps``; with ``S = 1/eps`` and ``phi(s) = exp(-zeta(i s))``:

* ``a = 1``:  ``H = i S phi(S)``
* ``a > 1``:  ``H = i S (a-1) int_0^1 phi(u S) (1-u)**(a-2) du``
* ``a < 1``:  ``H = i S [phi(S) + int_0^1 S phi'(u S) ((1-u)**(a-1) - 1) du]``

The last line is the finite-part continuation of the ``a > 1`` line,
integrated by parts so that no cancellation happens near ``u = 1``.
The density is ``lim Im H(xi + i eps) / pi`` (Richardson in ``eps``).
Interval probabilities integrate ``H`` along an upper half circle.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import BoundaryError, DegenerateMeasureError, DPMeansError, MeasureError
from .identities import require_finite_log_moment
from .measure import Affine, Cauchy, ParameterMeasure, pushforward
from .quadrature import (
    DEFAULT_CONFIG,
    CircularArc,
    Contour,
    QuadratureConfig,
    integrate_contour,
    integrate_infinite,
    integrate_interval,
    stieltjes_perron_limit,
)
from .zeta import zeta, zeta_prime

__all__ = [
    "DensityTable",
    "regime_of",
    "mean_stieltjes",
    "mean_density",
    "mean_cdf_interval",
    "density_grid",
    "uniform_closed_form",
    "cauchy_fixed_point_residual",
    "symmetry_residual",
    "density_transform",
]

log = logging.getLogger(__name__)

_A_ONE_TOL = 1e-12


def regime_of(a: float) -> str:
    """``"a=1"``, ``"a>1"`` or ``"a<1"``; ``a`` within 1e-12 of 1 counts as 1."""
    if abs(a - 1.0) <= _A_ONE_TOL:
        return "a=1"
    return "a>1" if a > 1 else "a<1"


def _spread(alpha: ParameterMeasure) -> float:
    lo, hi = alpha.hull
    if np.isfinite(lo) and np.isfinite(hi):
        return hi - lo
    c = alpha.continuous
    return float(c.ppf(0.75) - c.ppf(0.25))


def _admissible(alpha: ParameterMeasure):
    if alpha.is_degenerate:
        raise DegenerateMeasureError(
            f"alpha is a point mass at {alpha.atoms_x[0]!r}; mu_alpha is the point mass there and has no density"
        )
    require_finite_log_moment(alpha)
    a = alpha.total_mass
    if regime_of(a) == "a>1" and alpha.max_atom_mass >= 1.0:
        log.info("atom of mass %.6g >= 1 with a > 1: the epsilon limit may converge slowly", alpha.max_atom_mass)


def _phi(alpha, s):
    return np.exp(-zeta(1j * s, alpha))


def _shifted_h(alpha: ParameterMeasure, eps: float, cfg: QuadratureConfig):
    """``int mu_alpha(dx) / (x - i eps)`` and its error estimate."""
    a = alpha.total_mass
    regime = regime_of(a)
    S = 1.0 / eps
    if regime == "a=1":
        return 1j * S * complex(_phi(alpha, S)), 0.0
    # phi(u S) turns over where u S |x| ~ 1
    pts = [eps * 2.0 ** k for k in range(-8, 60) if eps * 2.0 ** k < 0.5]
    if regime == "a>1":

        def g(u):
            return _phi(alpha, u * S)

        v, e = integrate_interval(g, 0.0, 1.0, weights=(None, a - 2.0), points=pts, cfg=cfg, abs_tol=cfg.abs_tol * eps)
        return 1j * S * (a - 1.0) * v, S * (a - 1.0) * e

    def g(u, gl, gr):
        s = u * S
        dphi = -1j * _phi(alpha, s) * zeta_prime(1j * s, alpha)
        return S * dphi * np.expm1((a - 1.0) * np.log(gr))

    phi_S = complex(_phi(alpha, S))
    # the two terms cancel down to O(eps); ask for no more than their roundoff floor
    tol = max(cfg.abs_tol * eps, 64 * np.finfo(float).eps * abs(phi_S))
    v, e = integrate_interval(
        g, 0.0, 1.0, exponents=(None, a - 1.0), points=pts, cfg=cfg, with_gaps=True,
        abs_tol=tol, rel_tol=cfg.rel_tol * eps ** (1.0 - a), raise_on_fail=False,
    )
    return 1j * S * (phi_S + v), S * e


def mean_stieltjes(alpha: ParameterMeasure, z: complex, cfg: QuadratureConfig = DEFAULT_CONFIG, return_err=False):
    """``int mu_alpha(dx) / (x - z)`` for ``Im z > 0``."""
    z = complex(z)
    if not z.imag > 0:
        raise ValueError("mean_stieltjes needs Im z > 0")
    _admissible(alpha)
    shifted = pushforward(alpha, Affine(1.0, -z.real)) if z.real != 0 else alpha
    out = _shifted_h(shifted, z.imag, cfg)
    return out if return_err else out[0]


def _boundary_status(alpha, xi, cfg):
    """``"outside"``, ``"inside"`` or raise when too close to a hull end."""
    lo, hi = alpha.hull
    width = _spread(alpha)
    margin = cfg.boundary_margin * width
    for end in (lo, hi):
        if np.isfinite(end) and abs(xi - end) <= margin:
            raise BoundaryError(f"xi = {xi!r} lies within {margin:.3g} of the hull end {end!r}; the density may diverge there")
    if xi < lo or xi > hi:
        return "outside"
    return "inside"


def _eps_schedule(alpha, xi, cfg):
    lo, hi = alpha.hull
    d = [abs(xi - lo), abs(hi - xi), _spread(alpha)]
    if alpha.atoms_x.size:
        gaps = np.abs(alpha.atoms_x - xi)
        gaps = gaps[gaps > 1e-12 * d[2]]
        if gaps.size:
            d.append(float(gaps.min()))
    dist = min(x for x in d if np.isfinite(x))
    eps = np.asarray(cfg.eps_schedule, dtype=float)
    return eps * min(1.0, dist / (4.0 * eps[0]))


def mean_density(alpha: ParameterMeasure, xi: float, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Density ``m_alpha(xi)`` of the Dirichlet mean.

    Parameters
    ----------
    alpha : ParameterMeasure
        Nondegenerate with ``int log(1+|x|) d(alpha) < inf``.
    xi : float
    cfg : QuadratureConfig
        ``eps_schedule`` and ``limit_fail_tol`` drive the limit, while
        ``boundary_margin`` (relative to the hull width) sets the refusal zone.

    Returns
    -------
    value, err_est : float, float

    Raises
    ------
    DegenerateMeasureError
        alpha is a single atom.
    BoundaryError
        ``xi`` is too close to an end of the hull.
    LimitError
        The epsilon extrapolation did not settle.
    """
    _admissible(alpha)
    xi = float(xi)
    if _boundary_status(alpha, xi, cfg) == "outside":
        return 0.0, 0.0
    shifted = pushforward(alpha, Affine(1.0, -xi)) if xi != 0 else alpha

    def F(lam, eps):
        return _shifted_h(shifted, eps, cfg)

    value, err = stieltjes_perron_limit(F, 0.0, cfg, eps_schedule=_eps_schedule(alpha, xi, cfg))
    return max(value, 0.0), err + max(-value, 0.0)


def mean_cdf_interval(alpha: ParameterMeasure, x1: float, x2: float, cfg: QuadratureConfig = DEFAULT_CONFIG, method: str = "contour"):
    """``mu_alpha((x1, x2])``.

    ``method="contour"`` integrates ``H`` over the upper half circle with
    diameter ``[x1, x2]``, which equals the ``eps -> 0`` limit of the
    integral along ``[x1, x2] + i eps``. ``method="perron"`` integrates the
    density instead, one limit per node.
    """
    x1, x2 = float(x1), float(x2)
    if not x1 < x2:
        raise ValueError("need x1 < x2")
    _admissible(alpha)
    lo, hi = alpha.hull
    a1, a2 = max(x1, lo), min(x2, hi)
    if a1 >= a2:
        return 0.0, 0.0
    if method == "perron":
        def f(x):
            return np.array([mean_density(alpha, xx, cfg)[0] for xx in np.atleast_1d(x)])

        v, e = integrate_interval(f, a1, a2, cfg=cfg, abs_tol=1e-8, rel_tol=1e-8)
        return float(min(max(v, 0.0), 1.0)), e
    if method != "contour":
        raise ValueError(f"unknown method {method!r}")
    # clipping to the hull keeps the path off the singular ends when x1 or x2 is outside
    c, r = 0.5 * (a1 + a2), 0.5 * (a2 - a1)

    def end_exp(x):
        # an atom of mass b at a hull end makes m_alpha ~ |x - end|**(a - b - 1)
        if x not in (lo, hi):
            return None
        b = alpha.atom_mass_at(x)
        p = alpha.total_mass - b - 1.0
        return p if b > 0 and p < 0 else None

    def h(z):
        z = np.atleast_1d(z)
        return np.array([mean_stieltjes(alpha, zz, cfg) for zz in z])

    # two quarter arcs, each starting on the real axis so the singular end sits at s = 0
    left = Contour((CircularArc(c, r, math.pi, 0.5 * math.pi, start_exp=end_exp(a1)),))
    right = Contour((CircularArc(c, r, 0.0, 0.5 * math.pi, start_exp=end_exp(a2)),))
    vl, el = integrate_contour(h, left, cfg)
    vr, er = integrate_contour(h, right, cfg)
    v, e = vl - vr, el + er
    p = float(np.imag(v) / math.pi)
    return min(max(p, 0.0), 1.0), e / math.pi


@dataclass
class DensityTable:
    """Density values on a sorted grid with per-point error estimates."""

    abscissae: np.ndarray
    density: np.ndarray
    err_est: np.ndarray
    regime: str
    hull: tuple
    failures: List[tuple] = field(default_factory=list)

    def trapezoid_mass(self):
        ok = np.isfinite(self.density)
        return float(np.trapezoid(self.density[ok], self.abscissae[ok]))


def _threads():
    import os

    try:
        n = int(os.environ.get("DPMEANS_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def density_grid(alpha: ParameterMeasure, grid: Sequence[float], cfg: QuadratureConfig = DEFAULT_CONFIG, threads: Optional[int] = None) -> DensityTable:
    """Evaluate :func:`mean_density` independently at each grid point.

    Points that fail get ``nan`` and an entry ``(xi, message)`` in
    ``failures``; a degenerate or inadmissible alpha raises immediately.
    """
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or np.any(np.diff(x) <= 0):
        raise ValueError("grid must be strictly increasing")
    _admissible(alpha)

    def one(xi):
        try:
            return mean_density(alpha, xi, cfg) + (None,)
        except (DPMeansError, ValueError) as exc:
            return np.nan, np.nan, str(exc)

    n = threads or _threads()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            res = list(ex.map(one, x))
    else:
        res = [one(xi) for xi in x]
    dens = np.array([r[0] for r in res], dtype=float)
    errs = np.array([r[1] for r in res], dtype=float)
    fails = [(float(xi), r[2]) for xi, r in zip(x, res) if r[2] is not None]
    return DensityTable(x, dens, errs, regime_of(alpha.total_mass), alpha.hull, fails)


def uniform_closed_form(a: float, xi: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Density of the mean when alpha is ``a`` times the uniform law on (0, 1), ``a > 1``.

    Direct quadrature of the real integral
    ``(a-1)/pi int_xi^1 (x-xi)**(a-2) sin(a pi (1-x)) e**a x**(-a x) (1-x)**(-a(1-x)) dx``
    written in ``u = (x - xi) / (1 - xi)``.
    """
    if not a > 1:
        raise ValueError("uniform_closed_form needs a > 1")
    if not 0 < xi < 1:
        raise ValueError("xi must lie in (0, 1)")
    q = 1.0 - xi

    def g(u):
        v = 1.0 - u
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = (
                a
                - (a * xi + a * q * u) * np.log(q * u + xi)
                - np.where(v > 0, a * q * v * np.log(q * v), 0.0)
            )
        return np.exp(lg) * np.sin(a * math.pi * q * v)

    v, _ = integrate_interval(g, 0.0, 1.0, weights=(a - 2.0, None), cfg=cfg)
    return float((a - 1.0) * q ** (a - 1.0) / math.pi * v)


def cauchy_fixed_point_residual(theta: float, sigma: float, grid, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``max |m_alpha - c| `` on ``grid`` for ``alpha = c`` the Cauchy law."""
    if not (0 < sigma < np.inf):
        raise ValueError("sigma must be positive and finite")
    grid = np.asarray(grid, dtype=float)
    tab = density_grid(Cauchy(theta, sigma), grid, cfg)
    if tab.failures:
        raise DPMeansError(f"density failed at {tab.failures[0][0]!r}: {tab.failures[0][1]}")
    ref = sigma / (math.pi * (1.0 + sigma ** 2 * (grid - theta) ** 2))
    return float(np.max(np.abs(tab.density - ref)))


def symmetry_residual(alpha: ParameterMeasure, grid, cfg: QuadratureConfig = DEFAULT_CONFIG, require_symmetric=True) -> float:
    """``max |m_alpha(xi) - m_alpha(-xi)|`` over a grid symmetric about 0.

    ``require_symmetric=False`` skips the check on alpha, which is how the
    negative control is run.
    """
    grid = np.asarray(grid, dtype=float)
    if not np.allclose(np.sort(-grid), np.sort(grid), rtol=0, atol=1e-12):
        raise ValueError("grid must be symmetric about 0")
    if require_symmetric and not alpha.is_symmetric():
        raise MeasureError("alpha is not symmetric about 0")
    pos = np.unique(np.abs(grid))
    full = np.unique(np.concatenate([-pos, pos]))
    tab = density_grid(alpha, full, cfg)
    if tab.failures:
        raise DPMeansError(f"density failed at {tab.failures[0][0]!r}: {tab.failures[0][1]}")
    d = dict(zip(full.tolist(), tab.density.tolist()))
    return float(max(abs(d[x] - d[-x]) for x in pos))


class _DensityCache:
    """Memoised ``mean_density`` for repeated quadratures over the same alpha."""

    def __init__(self, alpha, cfg, threads=None):
        self.alpha, self.cfg = alpha, cfg
        self.threads = threads or _threads()
        self.values = {}
        self.max_err = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        todo = [v for v in np.unique(x).tolist() if v not in self.values]
        if todo:
            def one(v):
                return mean_density(self.alpha, v, self.cfg)

            if self.threads > 1 and len(todo) > 1:
                with ThreadPoolExecutor(max_workers=self.threads) as ex:
                    res = list(ex.map(one, todo))
            else:
                res = [one(v) for v in todo]
            for v, (d, e) in zip(todo, res):
                self.values[v] = d
                self.max_err = max(self.max_err, e)
        return np.array([self.values[v] for v in x.ravel().tolist()]).reshape(x.shape)


def density_transform(alpha: ParameterMeasure, h, cfg: QuadratureConfig = DEFAULT_CONFIG, *, abs_tol: float = 1e-9, rel_tol: float = 1e-9, cache=None):
    """``int h(x) m_alpha(x) dx`` by adaptive quadrature of the computed density.

    Strips of width ``2 * boundary_margin * spread`` at finite hull ends,
    where the density is refused, contribute their contour probability times
    ``h`` at the strip midpoint. Pass the same ``cache`` (from a previous
    call's third return value) to reuse density values across integrands.

    Returns
    -------
    value, err_est, cache
    """
    _admissible(alpha)
    cache = _DensityCache(alpha, cfg) if cache is None else cache
    lo, hi = alpha.hull
    a = alpha.total_mass

    def f(x):
        return h(x) * cache(x)

    pts = []
    for xk, bk in zip(alpha.atoms_x, alpha.atoms_m):
        if lo < xk < hi:
            p = a - bk - 1.0
            pts.append((float(xk), p if p < 0 else None))
    total, err = 0.0, 0.0
    if np.isfinite(lo) and np.isfinite(hi):
        delta = 2.0 * cfg.boundary_margin * (hi - lo)
        for x1, x2 in ((lo, lo + delta), (hi - delta, hi)):
            pm, pe = mean_cdf_interval(alpha, x1, x2, cfg)
            hv = np.asarray(h(np.array([x1, 0.5 * (x1 + x2), x2])), dtype=complex)
            total += hv[1] * pm
            err += pe + pm * abs(hv[2] - hv[0])
        v, e = integrate_interval(f, lo + delta, hi - delta, points=pts, cfg=cfg, abs_tol=abs_tol, rel_tol=rel_tol)
    elif not (np.isfinite(lo) or np.isfinite(hi)):
        c = alpha.continuous
        med = float(c.ppf(0.5))
        v, e = integrate_infinite(f, -np.inf, np.inf, scale=_spread(alpha) / 2, center=med, cfg=cfg,
                                  points=pts, abs_tol=abs_tol, rel_tol=rel_tol)
    else:
        raise NotImplementedError("half-bounded hulls are not supported by density_transform")
    return total + v, err + e + cache.max_err, cache
