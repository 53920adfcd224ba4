"""Transform identities linking alpha to the law of the Dirichlet mean.

``mk_transform(t, alpha)`` is ``exp(-zeta(i t; alpha))``, which equals
``int (1 + i t x)**(-a) mu_alpha(dx)``.

``lauricella_stieltjes(t, alpha, c)`` is the order-``c`` version
``int (1 + i t x)**(-c) mu_alpha(dx)``: a Beta(c, a - c) mixture of
``exp(-zeta(i u t))`` when ``c <= a``, and a loop integral around
``[0, 1]`` when ``c > a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.special import betaln, gammaln, hyp2f1

from .errors import MeasureError
from .measure import ParameterMeasure, log_moment
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, build_loop_01, integrate_contour, integrate_interval
from .zeta import zeta

__all__ = [
    "BetaWeight",
    "require_finite_log_moment",
    "mk_transform",
    "lauricella_stieltjes",
    "fd_finite_check",
    "FDCheck",
]


@lru_cache(maxsize=256)
def _log_moment_cached(alpha: ParameterMeasure):
    return log_moment(alpha)


def require_finite_log_moment(alpha: ParameterMeasure) -> float:
    """Return ``int log(1+|x|) d(alpha)`` or raise if it is infinite."""
    value, finite = _log_moment_cached(alpha)
    if not finite:
        raise MeasureError("int log(1+|x|) alpha(dx) is infinite; the mean does not exist")
    return value


@dataclass(frozen=True)
class BetaWeight:
    """Beta(c, a - c) probability on [0, 1]; the point mass at 1 when a = c.

    A negative ``a_minus_c`` is allowed only for :meth:`loop_integral`.
    """

    c: float
    a_minus_c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("BetaWeight needs c > 0")

    @property
    def a(self):
        return self.c + self.a_minus_c

    @property
    def degenerate(self):
        return self.a_minus_c == 0

    @property
    def log_norm(self):
        """``log(Gamma(a) / (Gamma(c) Gamma(a - c)))``."""
        return -betaln(self.c, self.a_minus_c)

    def pdf(self, u):
        u = np.asarray(u, dtype=float)
        if self.degenerate:
            raise ValueError("the degenerate BetaWeight has no density")
        with np.errstate(divide="ignore"):
            lp = self.log_norm + (self.c - 1) * np.log(u) + (self.a_minus_c - 1) * np.log1p(-u)
        return np.where((u > 0) & (u < 1), np.exp(lp), 0.0)

    def integrate(self, g, cfg: QuadratureConfig = DEFAULT_CONFIG, points=()):
        """``int g(u) B(du)`` for a smooth ``g``.

        The chord ``g(0) (1 - u) + g(1) u`` is integrated exactly; the
        remainder vanishes at both ends, which tames Beta exponents close
        to -1 where a power substitution would squeeze the bulk of the
        interval out of reach.
        """
        if self.a_minus_c < 0:
            raise ValueError("a - c < 0: use loop_integral")
        if self.degenerate:
            return complex(np.asarray(g(np.array([1.0])))[0]), 0.0
        c, d = self.c, self.a_minus_c
        ln = self.log_norm
        g0, g1 = np.asarray(g(np.array([0.0, 1.0])))
        chord = g1 * c / (c + d) + g0 * d / (c + d)

        def h(u, gl, gr):
            r = g(u) - g1 * u - g0 * (1.0 - u)
            return r * np.exp(ln + (c - 1) * np.log(gl) + (d - 1) * np.log(gr))

        v, e = integrate_interval(h, 0.0, 1.0, points=points, cfg=cfg, with_gaps=True, initial_splits=4)
        return chord + v, e

    def loop_integral(self, g, cfg: QuadratureConfig = DEFAULT_CONFIG, *, radius=None, tau=None):
        """Continuation of ``int g dB`` to ``c > a`` through the (1+) loop.

        Computes ``Gamma(c-a+1) Gamma(a) / (2 pi i Gamma(c))`` times
        ``int_0^(1+) g(w) w**(c-1) (w-1)**(a-c-1) dw`` with principal powers.
        Equals 1 for ``g = 1``.
        """
        a, c = self.a, self.c
        if not c > a:
            raise ValueError("loop form is for c > a")
        logpref = gammaln(c - a + 1) + gammaln(a) - gammaln(c)
        loop = build_loop_01(cfg, radius=radius, tau=tau, origin_exponent=(c - 1) if c < 1 else None)

        def h(w):
            with np.errstate(divide="ignore", invalid="ignore"):
                lw = (c - 1) * np.log(w) + (a - c - 1) * np.log(w - 1.0)
            return g(w) * np.exp(lw + logpref)

        v, e = integrate_contour(h, loop, cfg)
        return v / (2j * math.pi), e / (2 * math.pi)


def mk_transform(t: float, alpha: ParameterMeasure, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """``exp(-zeta(i t; alpha))``: the Stieltjes transform of order ``a``."""
    require_finite_log_moment(alpha)
    if t == 0:
        return 1.0 + 0.0j
    return complex(np.exp(-zeta(1j * t, alpha)))


def lauricella_stieltjes(t: float, alpha: ParameterMeasure, c: float, cfg: QuadratureConfig = DEFAULT_CONFIG, return_err=False):
    """``int (1 + i t x)**(-c) mu_alpha(dx)`` computed from alpha alone.

    Parameters
    ----------
    t : float
    alpha : ParameterMeasure
    c : float
        Order, ``c > 0``.
    return_err : bool
        Also return the quadrature error estimate.
    """
    if not c > 0:
        raise ValueError("order c must be positive")
    require_finite_log_moment(alpha)
    a = alpha.total_mass
    if t == 0 or (alpha.is_degenerate and alpha.atoms_x[0] == 0.0):
        out = (1.0 + 0.0j, 0.0)
    elif c == a:
        out = (mk_transform(t, alpha), 0.0)
    elif c < a:
        bw = BetaWeight(c, a - c)

        def g(u):
            return np.exp(-zeta(1j * t * u, alpha))

        out = bw.integrate(g, cfg)
    else:
        bw = BetaWeight(c, a - c)

        def g(w):
            return np.exp(-zeta(1j * t * w, alpha))

        out = bw.loop_integral(g, cfg)
    return out if return_err else out[0]


@dataclass(frozen=True)
class FDCheck:
    """Two evaluations of ``F_D(c, b; a; x)`` that must agree."""

    lhs: complex
    rhs: complex
    rhs_stderr: float = 0.0
    method: str = "exact"


def fd_finite_check(a: float, b: Sequence[float], x: Sequence[float], c: Optional[float] = None, *, n_mc: int = 100_000, seed: int = 0, cfg: QuadratureConfig = DEFAULT_CONFIG) -> FDCheck:
    """Compare the Beta-mixture form of ``F_D`` with an independent value.

    With ``c = a`` (default) the mixture degenerates at ``u = 1`` and the
    reference is the product ``prod (1 - x_k)**(-b_k)``. With ``c < a`` the
    reference is the Dirichlet average ``E[(1 - <u, x>)**(-c)]`` with
    ``u ~ Dirichlet(b, a - |b|)``: exact through ``hyp2f1`` for one
    coordinate, Monte Carlo otherwise.
    """
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if b.shape != x.shape or b.ndim != 1 or b.size == 0:
        raise ValueError("b and x must be nonempty vectors of equal length")
    if np.any(b <= 0) or b.sum() > a * (1 + 1e-15):
        raise ValueError("need b_k > 0 and |b| <= a")
    if np.any(x < 0) or np.any(x >= 1):
        raise ValueError("x_k must lie in [0, 1)")
    c = a if c is None else float(c)
    if c > a:
        raise ValueError("fd_finite_check covers 0 < c <= a")

    def integrand(u):
        u = np.asarray(u, dtype=float)
        return np.exp(-np.sum(b[None, :] * np.log1p(-u[:, None] * x[None, :]), axis=1))

    if c == a:
        lhs = complex(integrand(np.array([1.0]))[0])
        rhs = complex(np.prod((1.0 - x) ** (-b)))
        return FDCheck(lhs, rhs, 0.0, "product")
    lhs, _ = BetaWeight(c, a - c).integrate(integrand, cfg)
    lhs = complex(lhs)
    if b.size == 1:
        return FDCheck(lhs, complex(hyp2f1(c, b[0], a, x[0])), 0.0, "hyp2f1")
    from .mc import McConfig, sample_finite_dirichlet_mean

    params = list(b)
    atoms = list(x)
    if a - b.sum() > 1e-15 * a:
        params.append(a - b.sum())
        atoms.append(0.0)
    s = sample_finite_dirichlet_mean(atoms, params, McConfig(n_samples=n_mc, seed=seed))
    vals = (1.0 - s) ** (-c)
    return FDCheck(lhs, complex(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size)), "monte-carlo")
