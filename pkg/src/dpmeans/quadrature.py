"""Adaptive real and complex quadrature.

Everything here works on vectorised callables: an integrand receives a
1-D numpy array of abscissae and must return an array of the same length
(real or complex). The adaptive driver bisects many intervals per sweep,
so a single integrand call usually evaluates several hundred nodes.

Defined objects
---------------
QuadratureConfig
    Tolerances, epsilon schedule for boundary limits, loop geometry.
integrate_interval
    Adaptive Gauss-Kronrod (7/15) with power-absorbing endpoint maps.
LineSegment, CircularArc, VerticalPvLine, Contour
    Contour pieces and the container used by :func:`integrate_contour`.
pv_vertical_line
    Principal value integral along ``Re w = gamma`` with Aitken acceleration
    of the oscillating tail.
stieltjes_perron_limit
    ``(1/pi) lim_{eps -> 0} Im F(lam, eps)`` by polynomial extrapolation.
build_loop_01
    The (1+) loop starting and ending at 0 and circling w = 1 once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import LimitError, QuadratureError

__all__ = [
    "QuadratureConfig",
    "DEFAULT_CONFIG",
    "integrate_interval",
    "integrate_infinite",
    "LineSegment",
    "CircularArc",
    "VerticalPvLine",
    "Contour",
    "integrate_contour",
    "pv_vertical_line",
    "stieltjes_perron_limit",
    "richardson_table",
    "iterated_aitken",
    "build_loop_01",
]

# QUADPACK qk15 abscissae and weights, positive half.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

XK = np.concatenate([-_XGK[:-1], _XGK[::-1]])
WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
WG = np.zeros_like(WK)
WG[1::2] = np.concatenate([_WG, _WG[-2::-1]])

_MAX_POWER_MAP = 60.0


@dataclass(frozen=True)
class QuadratureConfig:
    """Numerical knobs shared by every integral in the package.

    ``eps_schedule`` drives the boundary limits ``eps -> 0``; ``loop_eps``
    and ``loop_tau`` are the radius around w = 1 and the half-height of the
    (1+) loop; ``k_schedule`` lists the truncation levels tried when the
    parameter measure has unbounded support.
    """

    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    max_subdivisions: int = 4000
    eps_schedule: Tuple[float, ...] = tuple(0.1 * 2.0 ** -j for j in range(13))
    loop_eps: float = 0.25
    loop_tau: float = 0.05
    pv_R_schedule: Optional[Tuple[float, ...]] = None
    pv_max_blocks: int = 2000
    limit_fail_tol: float = 1e-3
    k_schedule: Tuple[float, ...] = tuple(2.0 ** j for j in range(15))
    k_tol: float = 1e-4
    boundary_margin: float = 1e-3

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        eps = np.asarray(self.eps_schedule, dtype=float)
        if eps.size < 2 or np.any(eps <= 0) or np.any(np.diff(eps) >= 0):
            raise ValueError("eps_schedule must be strictly decreasing and positive")
        if self.loop_eps <= 0 or self.loop_tau <= 0:
            raise ValueError("loop geometry must be positive")
        if self.pv_R_schedule is not None:
            r = np.asarray(self.pv_R_schedule, dtype=float)
            if np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise ValueError("pv_R_schedule must be increasing and positive")

    def with_(self, **kw) -> "QuadratureConfig":
        return replace(self, **kw)


DEFAULT_CONFIG = QuadratureConfig()


# ---------------------------------------------------------------------------
# adaptive Gauss-Kronrod


def _power_k(exponent):
    if exponent is None or exponent >= 0:
        return None
    if exponent <= -1:
        raise ValueError("endpoint exponent must exceed -1 for an integrable singularity")
    return min(1.0 / (1.0 + exponent), _MAX_POWER_MAP)


def _build_pieces(a, b, points, exponents, weights=(None, None)):
    """Split [a, b] at ``points`` and attach endpoint maps.

    ``points`` holds floats or ``(x, exponent)`` pairs. Each piece is
    (u0, u1, kind, k, p): kind 0 linear, 1 clustered at u0, 2 clustered at
    u1, 3 and 4 clustered at u0 / u1 with the weight ``gap**p`` absorbed
    into a constant Jacobian.
    """
    inner = {}
    for p in points:
        x, e = (p if isinstance(p, tuple) else (p, None))
        if a < x < b:
            inner[float(x)] = e if inner.get(float(x)) is None else inner[float(x)]
    bps = [(a, exponents[0])] + sorted(inner.items()) + [(b, exponents[1])]
    wl = weights[0] if weights[0] is not None and weights[0] < 0 else None
    wr = weights[1] if weights[1] is not None and weights[1] < 0 else None
    for w in (wl, wr):
        if w is not None and w <= -1:
            raise ValueError("weight exponent must exceed -1")
    pieces = []
    n = len(bps) - 1
    for i, ((u0, e0), (u1, e1)) in enumerate(zip(bps[:-1], bps[1:])):
        left = (3, 1.0 / (1.0 + wl), wl) if (i == 0 and wl is not None) else None
        right = (4, 1.0 / (1.0 + wr), wr) if (i == n - 1 and wr is not None) else None
        if left is None and _power_k(e0):
            left = (1, _power_k(e0), 0.0)
        if right is None and _power_k(e1):
            right = (2, _power_k(e1), 0.0)
        if left and right:
            m = 0.5 * (u0 + u1)
            pieces.append((u0, m) + left)
            pieces.append((m, u1) + right)
        elif left:
            # the map compresses its far half; keep that half linear
            m = 0.5 * (u0 + u1)
            pieces.append((u0, m) + left)
            pieces.append((m, u1, 0, 1.0, 0.0))
        elif right:
            m = 0.5 * (u0 + u1)
            pieces.append((u0, m, 0, 1.0, 0.0))
            pieces.append((m, u1) + right)
        else:
            pieces.append((u0, u1, 0, 1.0, 0.0))
    return pieces


def _map(pieces, pid, s):
    u0 = pieces[0][pid][:, None]
    u1 = pieces[1][pid][:, None]
    kind = pieces[2][pid][:, None]
    k = pieces[3][pid][:, None]
    pw = pieces[4][pid][:, None]
    shape = np.broadcast(s, u0).shape
    h = np.broadcast_to(u1 - u0, shape)
    sb = np.broadcast_to(s, shape)
    kb = np.broadcast_to(k, shape)
    pb = np.broadcast_to(pw, shape)
    kindb = np.broadcast_to(kind, shape)
    gl = np.empty(shape)
    gr = np.empty(shape)
    jac = np.empty(shape)

    m = kindb == 0
    gl[m] = h[m] * sb[m]
    gr[m] = h[m] * (1.0 - sb[m])
    jac[m] = h[m]
    for kk, at_left in ((1, True), (2, False), (3, True), (4, False)):
        m = kindb == kk
        if not np.any(m):
            continue
        t = sb[m] if at_left else 1.0 - sb[m]
        near = h[m] * t ** kb[m]
        far = h[m] - near
        if at_left:
            gl[m], gr[m] = near, far
        else:
            gl[m], gr[m] = far, near
        if kk <= 2:
            jac[m] = h[m] * kb[m] * t ** (kb[m] - 1.0)
        else:
            jac[m] = h[m] ** (1.0 + pb[m]) / (1.0 + pb[m])
    u = np.where(gl <= gr, u0 + gl, u1 - gr)
    # keep mapped nodes strictly inside so singular endpoints are never hit
    u0b = np.broadcast_to(u0, shape)
    u1b = np.broadcast_to(u1, shape)
    lo_hit = u <= u0b
    hi_hit = u >= u1b
    u[lo_hit] = np.nextafter(u0b[lo_hit], np.inf)
    u[hi_hit] = np.nextafter(u1b[hi_hit], -np.inf)
    # distances to the ends of the whole piece list
    gl = gl + (u0b - pieces[0][0])
    gr = gr + (pieces[1][-1] - u1b)
    return u, jac, gl, gr, kindb


def _gk_batch(f, pieces, pid, slo, shi, with_gaps=False, weights=(None, None)):
    mid = 0.5 * (slo + shi)
    half = 0.5 * (shi - slo)
    s = mid[:, None] + half[:, None] * XK[None, :]
    u, jac, gl, gr, kind = _map(pieces, pid, s)
    with np.errstate(all="ignore"):
        fac = jac
        if weights[0]:
            fac = fac * np.where(kind == 3, 1.0, gl ** weights[0])
        if weights[1]:
            fac = fac * np.where(kind == 4, 1.0, gr ** weights[1])
        if with_gaps:
            vals = np.asarray(f(u.ravel(), gl.ravel(), gr.ravel()))
        else:
            vals = np.asarray(f(u.ravel()))
        if vals.shape != (u.size,):
            vals = np.broadcast_to(vals, (u.size,))
        # nodes whose Jacobian underflowed carry no weight
        vals = np.where(fac == 0.0, 0.0, vals.reshape(u.shape) * fac)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("integrand returned non-finite values")
    k = half * (vals @ WK)
    g = half * (vals @ WG)
    return k, np.abs(k - g)


def integrate_interval(
    g: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    exponents: Tuple[Optional[float], Optional[float]] = (None, None),
    weights: Tuple[Optional[float], Optional[float]] = (None, None),
    points: Sequence[float] = (),
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    abs_tol: Optional[float] = None,
    rel_tol: Optional[float] = None,
    raise_on_fail: bool = True,
    initial_splits: int = 1,
    with_gaps: bool = False,
):
    """Integrate ``g`` over the finite interval ``[a, b]``.

    Parameters
    ----------
    g : callable
        Vectorised integrand, real or complex valued.
    a, b : float
        Finite limits with ``a < b``.
    exponents : pair of float or None
        Declared power behaviour ``|u - a|**p`` and ``|b - u|**q`` of ``g``
        at the two ends. Negative exponents trigger the substitution
        ``u = a + (b - a) s**(1/(1+p))`` which absorbs the singularity.
    weights : pair of float or None
        Integrate ``g(u) (u - a)**p (b - u)**q`` instead of ``g``. The
        weights are applied analytically, so ``p`` or ``q`` close to -1 cost
        nothing in accuracy.
    points : sequence of float or (float, float)
        Interior points where ``g`` is (nearly) singular or has kinks,
        optionally paired with the exponent of ``|u - x|`` there.
    with_gaps : bool
        If true ``g`` is called as ``g(u, u - a, b - u)`` with the two gaps
        computed without cancellation.

    Returns
    -------
    value, err : complex or float, float
    """
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ValueError("integrate_interval needs finite limits; use integrate_infinite")
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if a > b:
        a, b = b, a
        exponents = (exponents[1], exponents[0])
        weights = (weights[1], weights[0])
        sign = -1.0
        if with_gaps:
            g0 = g

            def g(u, gl, gr):
                return g0(u, gr, gl)

    abs_tol = cfg.abs_tol if abs_tol is None else abs_tol
    rel_tol = cfg.rel_tol if rel_tol is None else rel_tol
    plist = _build_pieces(float(a), float(b), points, exponents, weights)
    pieces = tuple(np.array(col) for col in zip(*plist))
    npieces = len(plist)
    m = max(1, int(initial_splits))
    pid = np.repeat(np.arange(npieces), m)
    edges = np.linspace(0.0, 1.0, m + 1)
    slo = np.tile(edges[:-1], npieces)
    shi = np.tile(edges[1:], npieces)
    val, err = _gk_batch(g, pieces, pid, slo, shi, with_gaps, weights)

    while True:
        total = val.sum()
        total_err = err.sum()
        tol = max(abs_tol, rel_tol * abs(total))
        if total_err <= tol:
            return sign * total, float(total_err)
        if val.size >= cfg.max_subdivisions:
            if raise_on_fail:
                raise QuadratureError(
                    f"no convergence after {val.size} subintervals "
                    f"(err {total_err:.3g} > tol {tol:.3g})",
                    value=sign * total,
                    err=float(total_err),
                )
            return sign * total, float(total_err)
        order = np.argsort(err)[::-1]
        # bisect the worst intervals that together carry most of the error
        csum = np.cumsum(err[order])
        nsel = int(np.searchsorted(csum, total_err - 0.5 * tol)) + 1
        nsel = max(1, min(nsel, 64, order.size))
        sel = order[:nsel]
        # intervals that cannot be split further are frozen
        width = shi[sel] - slo[sel]
        tiny = width < 1e-14
        if np.all(tiny):
            if raise_on_fail:
                raise QuadratureError(
                    "interval width underflow before reaching tolerance",
                    value=sign * total,
                    err=float(total_err),
                )
            return sign * total, float(total_err)
        sel = sel[~tiny]
        mid = 0.5 * (slo[sel] + shi[sel])
        new_pid = np.concatenate([pid[sel], pid[sel]])
        new_lo = np.concatenate([slo[sel], mid])
        new_hi = np.concatenate([mid, shi[sel]])
        nv, ne = _gk_batch(g, pieces, new_pid, new_lo, new_hi, with_gaps, weights)
        keep = np.ones(val.size, dtype=bool)
        keep[sel] = False
        pid = np.concatenate([pid[keep], new_pid])
        slo = np.concatenate([slo[keep], new_lo])
        shi = np.concatenate([shi[keep], new_hi])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


def integrate_infinite(g, a=-np.inf, b=np.inf, *, scale=1.0, center=0.0, cfg=DEFAULT_CONFIG, **kw):
    """Integrate over a possibly infinite interval via ``x = center + scale*tan(v)``."""
    lo = -0.5 * np.pi if a == -np.inf else math.atan((a - center) / scale)
    hi = 0.5 * np.pi if b == np.inf else math.atan((b - center) / scale)
    points = kw.pop("points", ())
    vpts = []
    for p in points:
        x, e = (p if isinstance(p, tuple) else (p, None))
        vpts.append((math.atan((x - center) / scale), e))

    def h(v):
        x = center + scale * np.tan(v)
        out = np.asarray(g(x)) * (scale / np.cos(v) ** 2)
        # the integrand must decay faster than 1/x**2 at infinite ends
        return np.where(np.abs(v) >= 0.5 * np.pi, 0.0, out)

    return integrate_interval(h, lo, hi, points=vpts, cfg=cfg, **kw)


# ---------------------------------------------------------------------------
# contours


@dataclass(frozen=True)
class LineSegment:
    z0: complex
    z1: complex
    start_exp: Optional[float] = None
    end_exp: Optional[float] = None

    @property
    def start(self):
        return complex(self.z0)

    @property
    def end(self):
        return complex(self.z1)

    def point(self, s):
        return self.z0 + (self.z1 - self.z0) * s

    def deriv(self, s):
        return np.full(np.shape(s), complex(self.z1 - self.z0))


def _cis(theta):
    """``exp(i theta)``, exact at multiples of pi/2."""
    q = theta / (0.5 * math.pi)
    k = round(q)
    if abs(q - k) < 1e-15:
        return (1.0, 1j, -1.0, -1j)[k % 4]
    return complex(np.exp(1j * theta))


@dataclass(frozen=True)
class CircularArc:
    center: complex
    radius: float
    theta_start: float
    theta_end: float
    start_exp: Optional[float] = None
    end_exp: Optional[float] = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("arc radius must be positive")

    @property
    def start(self):
        return complex(self.center + self.radius * _cis(self.theta_start))

    @property
    def end(self):
        return complex(self.center + self.radius * _cis(self.theta_end))

    def point(self, s):
        # measured from the start so that points near it keep full relative accuracy
        d = self.theta_end - self.theta_start
        return self.start + self.radius * _cis(self.theta_start) * np.expm1(1j * d * np.asarray(s))

    def deriv(self, s):
        th = self.theta_start + (self.theta_end - self.theta_start) * s
        return 1j * self.radius * np.exp(1j * th) * (self.theta_end - self.theta_start)


@dataclass(frozen=True)
class VerticalPvLine:
    gamma: float
    R_schedule: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("PV abscissa must be positive")


Segment = Union[LineSegment, CircularArc, VerticalPvLine]


@dataclass(frozen=True)
class Contour:
    """Ordered, endpoint-continuous chain of segments."""

    segments: Tuple[Segment, ...]
    tol: float = 1e-12

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("empty contour")
        if any(isinstance(s, VerticalPvLine) for s in segs) and len(segs) > 1:
            raise ValueError("a VerticalPvLine must stand alone")
        for s0, s1 in zip(segs[:-1], segs[1:]):
            if abs(s0.end - s1.start) > self.tol * max(1.0, abs(s0.end)):
                raise ValueError("contour segments are not endpoint-continuous")

    @property
    def closed(self) -> bool:
        segs = self.segments
        if isinstance(segs[0], VerticalPvLine):
            return False
        return abs(segs[-1].end - segs[0].start) <= self.tol * max(1.0, abs(segs[0].start))

    @property
    def start(self):
        return self.segments[0].start

    @property
    def end(self):
        return self.segments[-1].end


def integrate_contour(g, contour: Contour, cfg: QuadratureConfig = DEFAULT_CONFIG, *, points=None, **kw):
    """Integrate ``g(w) dw`` along ``contour``.

    ``points`` optionally maps segment index to a list of parameter values
    in (0, 1) where the integrand needs extra resolution.
    """
    total = 0.0 + 0.0j
    total_err = 0.0
    for i, seg in enumerate(contour.segments):
        if isinstance(seg, VerticalPvLine):
            v, e = pv_vertical_line(g, seg.gamma, cfg, R_schedule=seg.R_schedule)
        else:

            def h(s, seg=seg):
                return g(seg.point(s)) * seg.deriv(s)

            pts = () if points is None else points.get(i, ())
            v, e = integrate_interval(
                h, 0.0, 1.0, exponents=(seg.start_exp, seg.end_exp), points=pts, cfg=cfg, **kw
            )
        total += v
        total_err += e
    return total, total_err


def build_loop_01(cfg: QuadratureConfig = DEFAULT_CONFIG, *, radius=None, tau=None, origin_exponent=None) -> Contour:
    """Loop from 0, below [0, 1], around w = 1 counter-clockwise, back above to 0.

    The straight pieces sit at depth ``tau`` where they meet the circle of
    radius ``radius`` about 1, so the arc spans ``(-pi + eta, pi - eta)`` with
    ``sin(eta) = tau / radius``.
    """
    rho = cfg.loop_eps if radius is None else radius
    tau = cfg.loop_tau if tau is None else tau
    if not (tau > 0 and rho > 0):
        raise ValueError("loop geometry needs tau > 0 and radius > 0")
    if tau >= rho or rho >= 1:
        raise ValueError("loop geometry needs tau < radius < 1")
    eta = math.asin(tau / rho)
    arc = CircularArc(1.0 + 0j, rho, -math.pi + eta, math.pi - eta)
    low = LineSegment(0j, arc.start, start_exp=origin_exponent)
    high = LineSegment(arc.end, 0j, end_exp=origin_exponent)
    return Contour((low, arc, high))


# ---------------------------------------------------------------------------
# principal value line and sequence acceleration


def iterated_aitken(seq, depth=4):
    """Repeated Aitken delta-squared transforms; returns the list of levels."""
    s = np.asarray(seq, dtype=complex)
    levels = [s]
    for _ in range(depth):
        if s.size < 3:
            break
        d1 = s[2:] - s[1:-1]
        d2 = s[2:] - 2.0 * s[1:-1] + s[:-2]
        safe = np.abs(d2) > 1e-300
        nxt = s[2:].copy()
        nxt[safe] = s[2:][safe] - d1[safe] ** 2 / d2[safe]
        levels.append(nxt)
        s = nxt
    return levels


def _accelerated(partials, depth=4):
    levels = iterated_aitken(partials, depth)
    best, best_err = partials[-1], abs(partials[-1] - partials[-2]) if len(partials) > 1 else np.inf
    for lev in levels[1:]:
        if lev.size >= 2:
            e = abs(lev[-1] - lev[-2])
            if e < best_err:
                best, best_err = lev[-1], e
    return complex(best), float(best_err)


def pv_vertical_line(
    g,
    gamma: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    R_schedule=None,
    singular_radius: float = 0.0,
    points=(),
    abs_tol=None,
):
    """Principal value of ``int g(w) dw`` along ``Re w = gamma`` (upwards).

    The core ``|Im w| <= Y0`` is integrated adaptively; beyond it the
    symmetric contributions of consecutive half-periods ``[Y0 + k pi,
    Y0 + (k+1) pi]`` are summed and the partial sums accelerated by iterated
    Aitken. ``Y0`` clears ``singular_radius`` (the largest modulus of a
    finite singularity) by at least two periods.

    Returns
    -------
    value, err : complex, float
    """
    if gamma <= 0:
        raise ValueError("PV abscissa must be positive")
    abs_tol = cfg.abs_tol if abs_tol is None else abs_tol
    R_schedule = R_schedule if R_schedule is not None else cfg.pv_R_schedule

    def h(y):
        return g(gamma + 1j * y) * 1j

    y0 = max(4 * math.pi, singular_radius + 4 * math.pi)
    y0 = math.pi * math.ceil(y0 / math.pi)
    core_pts = [p for p in points if -y0 < (p[0] if isinstance(p, tuple) else p) < y0]
    core, core_err = integrate_interval(h, -y0, y0, points=core_pts, cfg=cfg, abs_tol=abs_tol, initial_splits=8)

    if R_schedule is not None:
        bounds = [y0] + [float(r) for r in R_schedule if r > y0]
    else:
        bounds = None

    partials = [core]
    block_err = 0.0
    nb = 0
    batch = 40
    prev_est = None
    est, est_err = core, np.inf
    while nb < cfg.pv_max_blocks:
        if bounds is not None:
            if nb + 1 >= len(bounds):
                break
            lo = np.array(bounds[nb:nb + batch][:-1] if len(bounds[nb:]) > 1 else [], dtype=float)
            hi = np.array(bounds[nb + 1:nb + batch], dtype=float)
            lo = lo[: hi.size]
        else:
            lo = y0 + math.pi * np.arange(nb, nb + batch)
            hi = lo + math.pi
        if lo.size == 0:
            break
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        y = mid[:, None] + half[:, None] * XK[None, :]
        vals = (h(y.ravel()) + h(-y.ravel())).reshape(y.shape)
        kb = half * (vals @ WK)
        gb = half * (vals @ WG)
        block_err += float(np.abs(kb - gb).sum())
        partials.extend(list(partials[-1] + np.cumsum(kb)))
        nb += lo.size
        est, est_err = _accelerated(np.array(partials[-min(len(partials), 24):]))
        if prev_est is not None:
            est_err = max(est_err, abs(est - prev_est))
        tol = max(abs_tol, cfg.rel_tol * abs(est))
        if est_err <= 10 * tol and prev_est is not None:
            return est, est_err + core_err + block_err
        prev_est = est
    if not np.isfinite(est_err) or est_err > 1e-6 * max(1.0, abs(est)):
        raise QuadratureError("PV tail did not converge", value=est, err=est_err)
    return est, est_err + core_err + block_err


def richardson_table(eps, values):
    """Neville table for polynomial extrapolation of ``values(eps)`` to eps = 0."""
    eps = np.asarray(eps, dtype=float)
    n = eps.size
    T = np.full((n, n), np.nan, dtype=complex)
    T[:, 0] = values
    for k in range(1, n):
        for j in range(k, n):
            T[j, k] = T[j, k - 1] + (T[j, k - 1] - T[j - 1, k - 1]) * eps[j] / (eps[j - k] - eps[j])
    return T


def extrapolate_to_zero(eps, values, max_order=6, value_errs=None):
    """Best extrapolated value and an error estimate from a Neville table.

    The entry with the smallest neighbouring-difference spread is chosen; the
    estimate is that spread plus the propagated noise of the inputs: ``value_errs`` (or a few ulps of
    each value when absent) weighted by the absolute Neville coefficients.
    """
    values = np.asarray(values)
    T = richardson_table(eps, values)
    W = [richardson_table(eps, np.eye(len(eps))[:, i]) for i in range(len(eps))]
    noise = 4 * np.finfo(float).eps * np.abs(values)
    if value_errs is not None:
        noise = noise + np.asarray(value_errs, dtype=float)
    n = len(eps)
    best, best_err, at = values[-1], np.inf, None
    for k in range(1, min(max_order, n - 1) + 1):
        for j in range(k + 1, n):
            e = max(abs(T[j, k] - T[j, k - 1]), abs(T[j, k] - T[j - 1, k]))
            if e < best_err:
                best, best_err, at = T[j, k], e, (j, k)
    if at is not None:
        best_err += sum(abs(W[i][at]) * noise[i] for i in range(n))
    return best, float(best_err)


def stieltjes_perron_limit(
    F: Callable[[float, float], complex],
    lam: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    *,
    eps_schedule=None,
    max_order: int = 6,
):
    """``(1/pi) * lim_{eps -> 0+} Im F(lam, eps)`` by Richardson extrapolation.

    The leading error is assumed to be a power series in ``eps``; the best
    entry of the Neville table is chosen by the size of its neighbouring
    differences, which also serves as the error estimate. ``F`` may return
    ``(value, err)`` to have its own error carried into the estimate.
    """
    eps = np.asarray(cfg.eps_schedule if eps_schedule is None else eps_schedule, dtype=float)
    vals, errs = [], []
    for e in eps:
        out = F(lam, e)
        v, ve = out if isinstance(out, tuple) else (out, 0.0)
        vals.append(np.imag(v) / math.pi)
        errs.append(ve / math.pi)
    value, err = extrapolate_to_zero(eps, np.array(vals), max_order=max_order, value_errs=errs)
    value = float(np.real(value))
    if not np.isfinite(value) or err > cfg.limit_fail_tol * max(1.0, abs(value)):
        raise LimitError(f"epsilon extrapolation did not settle at {lam!r} (err {err:.3g})", value, err)
    return value, err
