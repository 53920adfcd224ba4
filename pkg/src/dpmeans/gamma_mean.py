"""The mean of a gamma process, ``int x Gamma(dx)`` with ``Gamma ~ gamma(alpha)``.

Its characteristic function is ``exp(-zeta(-i t; alpha))``. It is the
product of an independent Gamma(a) variable and the Dirichlet mean, which
gives its density as a scale mixture of the tabulated ``m_alpha``. It is
also infinitely divisible, with Levy density

    nu(u) = |u|**-1 int exp(-u y) 1{u y > 0} theta(dy),

where ``theta`` is the image of alpha under ``x -> 1/x``. The weight
``g(u) = u**2 nu(u) / (1 + u**2)`` and the drift ``int g(u) / u du`` give
the Levy-Khintchine triple.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from .errors import MeasureError, QuadratureError
from .identities import require_finite_log_moment
from .measure import ParameterMeasure, thorin_measure
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, integrate_infinite, integrate_interval
from .zeta import zeta

__all__ = [
    "gamma_charfn",
    "gamma_mean_density",
    "gamma_mean_cdf",
    "levy_g",
    "LevyTriple",
    "levy_triple",
    "levy_reconstruct_charfn",
    "tucker_integrals",
]

_GL_X, _GL_W = leggauss(8)


def gamma_charfn(t: float, alpha: ParameterMeasure) -> complex:
    """``E exp(i t int x dGamma) = exp(-zeta(-i t; alpha))``."""
    require_finite_log_moment(alpha)
    if t == 0:
        return 1.0 + 0.0j
    return complex(np.exp(-zeta(-1j * t, alpha)))


# ---------------------------------------------------------------------------
# density through the scale mixture


def _table_nodes(table, stride=1):
    n = table.abscissae.size
    idx = np.unique(np.r_[np.arange(0, n, stride), n - 1])
    x = table.abscissae[idx]
    m = table.density[idx]
    if np.any(~np.isfinite(m)):
        raise QuadratureError("density table has failed points", np.nan, np.inf)
    # the refused margins next to a finite hull end are filled with the end value
    lo, hi = table.hull
    if np.isfinite(lo) and lo < x[0]:
        x, m = np.r_[lo, x], np.r_[m[0], m]
    if np.isfinite(hi) and hi > x[-1]:
        x, m = np.r_[x, hi], np.r_[m, m[-1]]
    h = 0.5 * np.diff(x)
    mid = 0.5 * (x[1:] + x[:-1])
    nodes = mid[:, None] + h[:, None] * _GL_X[None, :]
    lam = (nodes - x[:-1, None]) / (2 * h[:, None])
    dens = m[:-1, None] * (1 - lam) + m[1:, None] * lam
    return nodes.ravel(), (h[:, None] * _GL_W[None, :] * dens).ravel()


def _mixture(kernel, table, tol):
    y, w = _table_nodes(table)
    full = float(np.sum(kernel(y) * w))
    yc, wc = _table_nodes(table, 2)
    coarse = float(np.sum(kernel(yc) * wc))
    err = abs(full - coarse)
    if err > tol * max(abs(full), 1e-3):
        raise QuadratureError(f"density table too coarse for the mixture (err {err:.3g})", full, err)
    return full, err


def _degenerate_point(alpha):
    x0 = float(alpha.atoms_x[0])
    if x0 == 0.0:
        raise MeasureError("alpha is a point mass at 0; the gamma mean is 0")
    return x0


def _check_zero_atom(alpha):
    a = alpha.total_mass
    if alpha.atom_mass_at(0.0) >= a:
        raise MeasureError("need alpha{0} < a")


def gamma_mean_density(x: float, alpha: ParameterMeasure, mean_table=None, cfg: QuadratureConfig = DEFAULT_CONFIG, tol: float = 1e-3):
    """Density of ``int x dGamma`` at ``x``.

    ``q(x) = int |x|**(a-1) |y|**-a exp(-x/y) / Gamma(a) mu_alpha(dy)`` over
    ``y`` of the sign of ``x``. ``mean_table`` is a :class:`DensityTable` of
    ``m_alpha`` that covers the hull; the mixture integral uses its linear
    interpolant, and halving the table must change the result by less than
    ``tol`` (relative), else :class:`QuadratureError` is raised.

    Returns
    -------
    value, err_est
    """
    _check_zero_atom(alpha)
    a = alpha.total_mass
    x = float(x)
    if alpha.is_degenerate:
        x0 = _degenerate_point(alpha)
        r = x / x0
        return (float(np.exp(special.xlogy(a - 1, r) - r - special.gammaln(a)) / abs(x0)) if r > 0 else 0.0), 0.0
    if x == 0.0:
        if a > 1:
            return 0.0, 0.0
        raise ValueError("the density at 0 is infinite or undefined for a <= 1")
    if mean_table is None:
        raise ValueError("a density table of m_alpha is needed for a nondegenerate alpha")

    def kernel(y):
        r = np.where(y * x > 0, x / np.where(y == 0, 1.0, y), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            lk = special.xlogy(a - 1, r) - r - special.gammaln(a) - np.log(np.abs(y))
        return np.where(r > 0, np.exp(lk), 0.0)

    v, e = _mixture(kernel, mean_table, tol)
    return max(v, 0.0), e


def gamma_mean_cdf(x: float, alpha: ParameterMeasure, mean_table=None, tol: float = 1e-3):
    """``P(int x dGamma <= x)`` from the same mixture, with regularised incomplete gammas."""
    _check_zero_atom(alpha)
    a = alpha.total_mass
    x = float(x)
    if alpha.is_degenerate:
        x0 = _degenerate_point(alpha)
        return (float(special.gammainc(a, x / x0)) if x0 > 0 else float(special.gammaincc(a, max(x / x0, 0.0)))), 0.0
    if mean_table is None:
        raise ValueError("a density table of m_alpha is needed for a nondegenerate alpha")

    def kernel(y):
        safe = np.where(y == 0, 1.0, y)
        r = np.maximum(x / safe, 0.0)
        pos = special.gammainc(a, r)
        neg = special.gammaincc(a, r)
        return np.where(y > 0, pos, np.where(y < 0, neg, float(x >= 0)))

    v, e = _mixture(kernel, mean_table, tol)
    return min(max(v, 0.0), 1.0), e


# ---------------------------------------------------------------------------
# Levy-Khintchine side


def _thorin(alpha, grid=4000):
    theta, _ = thorin_measure(alpha, grid)
    return theta


def _laplace_branch(u, theta):
    """``int exp(-u y) 1{u y > 0} theta(dy)`` for an array of ``u``."""
    y, m = theta.atoms_x, theta.atoms_m
    if y.size == 0:
        return np.zeros(np.shape(u))
    uy = np.asarray(u, dtype=float)[..., None] * y
    with np.errstate(over="ignore"):
        terms = np.where(uy > 0, np.exp(-np.where(uy > 0, uy, 0.0)), 0.0)
    return terms @ m


def levy_g(x, alpha: ParameterMeasure, cfg: QuadratureConfig = DEFAULT_CONFIG, theta: Optional[ParameterMeasure] = None):
    """Weight density ``g(x) = |x| / (1 + x**2) int exp(-x y) 1{x y > 0} theta(dy)``.

    ``theta`` is the image of alpha under ``x -> 1/x`` (computed when not
    given); atoms of alpha at 0 do not contribute. Nonnegative by construction.
    """
    theta = _thorin(alpha) if theta is None else theta
    u = np.asarray(x, dtype=float)
    out = np.abs(u) / (1.0 + u * u) * _laplace_branch(u, theta)
    out = np.where(u == 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LevyTriple:
    """Drift, weight density and total weight ``int g`` of the representation."""

    drift: float
    g: Callable
    G_total: float
    inv_abs_moment: float


def _half_line(f, sign, cfg, scale):
    """``int_0^inf f(sign * u) du`` (geometric split near 0 plus a mapped tail)."""
    v1, e1 = integrate_interval(lambda u: f(sign * u), 0.0, scale, cfg=cfg, points=[scale * 2.0 ** -k for k in range(1, 40)])
    v2, e2 = integrate_infinite(lambda u: f(sign * u), scale, np.inf, scale=scale, cfg=cfg)
    return v1 + v2, e1 + e2


def _tail_scale(theta):
    y = np.abs(theta.atoms_x)
    return 1.0 / float(y.min()) if y.size else 1.0


def levy_triple(alpha: ParameterMeasure, cfg: QuadratureConfig = DEFAULT_CONFIG) -> LevyTriple:
    """Compute ``(drift, g, int g)`` and check ``int g / |x| < inf`` by quadrature.

    The drift is the signed ``int g(x) / x dx``.
    """
    theta = _thorin(alpha)
    scale = _tail_scale(theta)

    def g(u):
        return levy_g(u, alpha, cfg, theta)

    tot = drift = inv = 0.0
    for sign in (1.0, -1.0):
        vg, _ = _half_line(g, sign, cfg, scale)
        vi, _ = _half_line(lambda u: g(u) / np.where(u == 0, 1.0, np.abs(u)), sign, cfg, scale)
        tot += vg
        inv += vi
        drift += sign * vi
    if not (np.isfinite(tot) and np.isfinite(inv)):
        raise QuadratureError("int g or int g/|x| diverged", tot, np.inf)
    return LevyTriple(float(drift), g, float(tot), float(inv))


def levy_reconstruct_charfn(t: float, alpha: ParameterMeasure, cfg: QuadratureConfig = DEFAULT_CONFIG, triple: Optional[LevyTriple] = None) -> complex:
    """``exp(i drift t + int (e^{itu} - 1 - itu/(1+u^2)) (1+u^2)/u^2 g(u) du)``.

    Built from ``g`` alone, so agreement with :func:`gamma_charfn` is a real
    check of the representation.
    """
    if t == 0:
        return 1.0 + 0.0j
    triple = levy_triple(alpha, cfg) if triple is None else triple
    theta = _thorin(alpha)
    scale = min(_tail_scale(theta), 1.0 / abs(t))

    def f(u):
        u = np.asarray(u, dtype=float)
        safe = np.where(u == 0, 1.0, u)
        tu = t * safe
        # e^{itu} - 1 - itu/(1+u^2) = (e^{itu} - 1 - itu) + i t u^3/(1+u^2)
        core = np.expm1(1j * tu) - 1j * tu + 1j * tu * safe * safe / (1.0 + safe * safe)
        return np.where(u == 0, 0.0, core * (1.0 + safe * safe) / (safe * safe) * triple.g(u))

    total = 0.0 + 0.0j
    for sign in (1.0, -1.0):
        total += _half_line(f, sign, cfg, scale)[0]
    return complex(np.exp(1j * triple.drift * t + total))


def tucker_integrals(alpha: ParameterMeasure, deltas=(1e-1, 1e-2, 1e-3, 1e-4), upper: float = 1.0, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """``int_delta^upper x**-2 g(x) dx`` for each ``delta``.

    For nondegenerate alpha with mass away from 0 these grow without bound as
    ``delta -> 0``, since ``g(x) ~ x`` times the positive Thorin mass.
    """
    theta = _thorin(alpha)

    def h(u):
        return levy_g(u, alpha, cfg, theta) / (u * u)

    out = []
    for d in deltas:
        if not 0 < d < upper:
            raise ValueError("need 0 < delta < upper")
        pts = [p for p in np.geomspace(d, upper, 20)[1:-1]]
        out.append(integrate_interval(h, d, upper, points=pts, cfg=cfg)[0])
    return np.array(out)
