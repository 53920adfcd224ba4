"""Characteristic function of the Dirichlet mean and related transforms.

For alpha with bounded support

    E exp(i t M) = Gamma(a) / (2 pi i) int e^w w**-a exp(-zeta(-i t / w)) dw

along any contour that starts and ends at ``-inf`` and encircles the cut
``(-inf, 0]`` together with the segment ``i t supp(alpha)``. Two paths are
used: the vertical line ``Re w = gamma`` as a principal value (``a > 1``),
and a flat-sided loop around the segment (any ``a``). Unbounded support is
handled through the truncations ``truncate(alpha, k)`` and a limit in
``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceError, DegenerateMeasureError, MeasureError
from .identities import lauricella_stieltjes, require_finite_log_moment
from .mean_distribution import mean_density
from .measure import Discrete, ParameterMeasure, log_moment, pushforward, truncate
from .quadrature import (
    DEFAULT_CONFIG,
    Contour,
    LineSegment,
    QuadratureConfig,
    extrapolate_to_zero,
    integrate_contour,
    pv_vertical_line,
)
from .zeta import zeta

__all__ = [
    "CharfnResult",
    "mean_charfn",
    "confluent_phi",
    "functional_mean_law",
    "joint_stieltjes",
    "variance_mgf",
]

# e**-_LEFT_CUT is far below double precision relative to the O(1) result
_LEFT_CUT = 45.0
_PUSH_GRID = 4000


@dataclass(frozen=True)
class CharfnResult:
    """Value of ``E exp(i t M)`` with the path used and an error estimate."""

    t: float
    value: complex
    method: str
    err_est: float


def _support_bounds(alpha):
    lo, hi = alpha.hull
    return float(lo), float(hi)


def _hankel_integrand(t, alpha, a):
    lg = gammaln(a)

    def g(w):
        w = np.asarray(w, dtype=complex)
        return np.exp(w + lg - a * np.log(w) - zeta(-1j * t / w, alpha)) / (2j * math.pi)

    return g


def _charfn_pv(t, alpha, cfg, gamma=1.0):
    a = alpha.total_mass
    lo, hi = _support_bounds(alpha)
    rad = abs(t) * max(abs(lo), abs(hi))
    return pv_vertical_line(_hankel_integrand(t, alpha, a), gamma, cfg, singular_radius=rad)


def stadium_loop(t, lo, hi, clearance=None, right=1.0):
    """Loop from ``-inf`` below, up the line ``Re w = right``, back to ``-inf`` above.

    The rays sit at ``clearance`` (default ``max(1, 0.1 |t| (hi - lo))``)
    below and above the segment joining 0 and ``i t [lo, hi]``.
    """
    ys = [0.0, t * lo, t * hi]
    y_lo, y_hi = min(ys), max(ys)
    c = max(1.0, 0.1 * (y_hi - y_lo)) if clearance is None else clearance
    y_lo -= c
    y_hi += c
    left = -_LEFT_CUT - right
    z0, z1 = complex(left, y_lo), complex(right, y_lo)
    z2, z3 = complex(right, y_hi), complex(left, y_hi)
    return Contour((LineSegment(z0, z1), LineSegment(z1, z2), LineSegment(z2, z3)))


def _charfn_loop(t, alpha, cfg, clearance=None, right=1.0):
    a = alpha.total_mass
    lo, hi = _support_bounds(alpha)
    loop = stadium_loop(t, lo, hi, clearance, right)
    side = loop.segments[1]
    # e^w oscillates with period 2 pi along the right side
    n = max(1, int(math.ceil(abs(side.z1 - side.z0) / math.pi)))
    pts = {1: list(np.linspace(0, 1, n + 1)[1:-1])}
    return integrate_contour(_hankel_integrand(t, alpha, a), loop, cfg, points=pts)


def _bounded_charfn(t, alpha, cfg, method, gamma, clearance, right):
    if method == "auto":
        method = "pv-line" if alpha.total_mass > 1 else "loop-contour"
    if method == "pv-line":
        if alpha.total_mass <= 1:
            raise ValueError("the PV line is only absolutely convergent for a > 1")
        v, e = _charfn_pv(t, alpha, cfg, gamma)
    elif method == "loop-contour":
        v, e = _charfn_loop(t, alpha, cfg, clearance, right)
    else:
        raise ValueError(f"unknown method {method!r}")
    return complex(v), float(e), method


def _truncation_limit(fn, alpha, cfg, tol=None):
    """Evaluate ``fn(truncate(alpha, k))`` along ``k = 2**j * spread`` and extrapolate in ``1/k``.

    Stops when two successive extrapolated values differ by less than
    ``tol``; raises :class:`ConvergenceError` with the iterates otherwise.
    """
    tol = cfg.k_tol if tol is None else tol
    c = alpha.continuous
    spread = float(c.ppf(0.75) - c.ppf(0.25))
    centre = float(c.ppf(0.5))
    ks, vals, ests = [], [], []
    for j in cfg.k_schedule:
        k = abs(centre) + float(j) * spread
        ks.append(k)
        vals.append(fn(truncate(alpha, k)))
        if len(vals) < 2:
            continue
        inv = 1.0 / np.array(ks)
        est, err = extrapolate_to_zero(inv, np.array(vals), max_order=3) if len(vals) >= 3 else (vals[-1], abs(vals[-1] - vals[-2]))
        ests.append(complex(est))
        if len(ests) >= 2 and abs(ests[-1] - ests[-2]) < tol:
            return ests[-1], max(abs(ests[-1] - ests[-2]), float(err)), k
    raise ConvergenceError("truncation limit did not settle", list(zip(ks, vals))[-2:])


def mean_charfn(
    t: float,
    alpha: ParameterMeasure,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    method: str = "auto",
    gamma: float = 1.0,
    clearance: Optional[float] = None,
    right: float = 1.0,
) -> CharfnResult:
    """``E exp(i t M)`` for the Dirichlet mean ``M`` with parameter ``alpha``.

    Parameters
    ----------
    t : float
    alpha : ParameterMeasure
    method : {"auto", "pv-line", "loop-contour"}
        ``auto`` takes the PV line when ``a > 1`` and the loop otherwise.
    gamma : float
        Abscissa of the PV line.
    clearance, right : float
        Loop geometry: distance of the rays from the singular segment and
        abscissa of the right side.

    Notes
    -----
    For unbounded support the bounded computation is repeated on
    ``truncate(alpha, k)`` for growing ``k`` and the values are extrapolated
    in ``1/k``; ``method`` then reads ``"truncation-limit(k)"``.
    """
    require_finite_log_moment(alpha)
    t = float(t)
    if t == 0:
        return CharfnResult(t, 1.0 + 0.0j, "exact", 0.0)
    if alpha.continuous is None and alpha.atoms_x.size == 1:
        return CharfnResult(t, complex(np.exp(1j * t * alpha.atoms_x[0])), "exact", 0.0)
    if alpha.bounded:
        v, e, m = _bounded_charfn(t, alpha, cfg, method, gamma, clearance, right)
        return CharfnResult(t, v, m, e)
    v, e, k = _truncation_limit(lambda al: _bounded_charfn(t, al, cfg, method, gamma, clearance, right)[0], alpha, cfg)
    return CharfnResult(t, v, f"truncation-limit({k:.6g})", e)


def confluent_phi(b: Sequence[float], a: float, x: Sequence[float], t: float, cfg: QuadratureConfig = DEFAULT_CONFIG, **kw) -> complex:
    """Erdelyi's confluent ``Phi_n(b; a; i t x)`` as a Dirichlet-mean characteristic function.

    The implied measure has atoms ``b_k`` at ``x_k`` and ``a - sum(b)`` at 0.
    """
    b = np.asarray(b, dtype=float)
    x = np.asarray(x, dtype=float)
    if b.shape != x.shape or b.ndim != 1 or b.size == 0:
        raise ValueError("b and x must be nonempty vectors of equal length")
    if np.any(b <= 0):
        raise ValueError("b_k must be positive")
    rest = a - b.sum()
    if rest < -1e-12 * a:
        raise ValueError("need sum(b) <= a")
    atoms = list(zip(x.tolist(), b.tolist()))
    if rest > 1e-12 * a:
        atoms.append((0.0, rest))
    return mean_charfn(t, Discrete(atoms), cfg, **kw).value


def _push(alpha, f):
    return pushforward(alpha, f, grid=_PUSH_GRID)


def functional_mean_law(alpha: ParameterMeasure, f: Callable, request, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """Law of ``int f dP`` through the image measure ``alpha o f^-1``.

    ``request`` is ``("density", xi)`` or ``("charfn", t)``.
    """
    kind, arg = request
    beta = _push(alpha, f)
    if not log_moment(beta)[1]:
        raise MeasureError("int log(1+|f|) d(alpha) is infinite")
    if kind == "density":
        if beta.is_degenerate:
            raise DegenerateMeasureError(f"f is constant ({beta.atoms_x[0]!r}) on the support; the law is a point mass")
        return mean_density(beta, arg, cfg)
    if kind == "charfn":
        return mean_charfn(arg, beta, cfg)
    raise ValueError(f"unknown request {kind!r}")


def joint_stieltjes(t_vec: Sequence[float], f_vec: Sequence[Callable], alpha: ParameterMeasure, c: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """``E (1 + i <t, (int f_1 dP, ..., int f_d dP)>)**-c``.

    Reduces to the scalar order-``c`` transform of the image of alpha under
    ``x -> sum_j t_j f_j(x)``.
    """
    t_vec = np.asarray(t_vec, dtype=float)
    if len(f_vec) != t_vec.size:
        raise ValueError("t_vec and f_vec must have the same length")
    if not np.any(t_vec):
        return 1.0 + 0.0j
    for f in f_vec:
        if not log_moment(_push(alpha, f))[1]:
            raise MeasureError("int log(1+|f_j|) d(alpha) is infinite")

    def h(x):
        x = np.asarray(x, dtype=float)
        return sum(tj * np.asarray(fj(x), dtype=float) for tj, fj in zip(t_vec, f_vec))

    return complex(lauricella_stieltjes(1.0, _push(alpha, h), c, cfg))


def _variance_mgf_bounded(t, alpha, cfg, n_hermite):
    a = alpha.total_mass
    lo, hi = _support_bounds(alpha)
    rt = math.sqrt(t)
    u, wts = np.polynomial.hermite.hermgauss(n_hermite)
    lg = gammaln(a)
    total = 0.0
    err = 0.0
    for ui, wi in zip(u, wts):
        y = 2.0 * ui
        # -h(x) = y sqrt(t) x - t x^2 is concave; its sup over [lo, hi]
        xs = np.clip(np.array([lo, hi, y / (2 * rt)]), lo, hi)
        sup = float(np.max(y * rt * xs - t * xs * xs))
        g_line = max(sup, 0.0) + 1.0

        def h(x, y=y):
            return t * x * x - y * rt * x

        def g(z, h=h):
            z = np.asarray(z, dtype=complex)
            return np.exp(z + lg - a * np.log(z) - zeta(1.0 / z, alpha, h)) / (2j * math.pi)

        rad = max(abs(g_line), abs(h(lo)), abs(h(hi)), abs(h(xs[2])))
        v, e = pv_vertical_line(g, g_line, cfg, singular_radius=rad)
        # int e^{-y^2/4} F(y) dy = 2 sum w_i F(2 u_i); prefactor 1/(2 sqrt(pi))
        total += wi * v.real
        err += wi * e
    return total / math.sqrt(math.pi), err / math.sqrt(math.pi)


def variance_mgf(t: float, alpha: ParameterMeasure, cfg: QuadratureConfig = DEFAULT_CONFIG, n_hermite: int = 48, return_err=False):
    """``E exp(-t V)`` for the variance ``V`` of the random probability measure.

    Uses ``exp(t M**2) = (2 sqrt(pi))**-1 int exp(-y**2/4 + y sqrt(t) M) dy``,
    which turns the problem into Laplace transforms of Dirichlet means of
    ``t x**2 - y sqrt(t) x``. Those are PV line integrals; the outer ``y``
    integral is Gauss-Hermite with ``n_hermite`` nodes.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    require_finite_log_moment(alpha)
    if t == 0 or alpha.is_degenerate:
        out = (1.0, 0.0)
    elif alpha.bounded:
        out = _variance_mgf_bounded(t, alpha, cfg, n_hermite)
    else:
        v, e, _ = _truncation_limit(lambda al: _variance_mgf_bounded(t, al, cfg, n_hermite)[0], alpha, cfg)
        out = (float(np.real(v)), e)
    return out if return_err else out[0]
