"""Finite parameter measures on the real line.

A :class:`ParameterMeasure` is a finite list of atoms plus at most one
absolutely continuous part. The continuous part is one of a few named
families (Cauchy, scaled Gaussian, uniform, piecewise-linear density table)
or a user supplied density, optionally restricted to an interval.

The Cauchy family uses the precision-type parametrisation

    density(x) = sigma / (pi * (1 + sigma**2 * (x - theta)**2)),

so the half-width at half-maximum is ``1/sigma`` and ``sigma = inf`` is the
point mass at ``theta``.
"""

from __future__ import annotations

import json
import math
from functools import cached_property
from typing import Callable, Iterable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import stats

from .errors import IndeterminateError, MeasureError, QuadratureError

__all__ = [
    "ContinuousPart",
    "ParameterMeasure",
    "Affine",
    "Discrete",
    "Cauchy",
    "GaussianScaled",
    "Uniform01Scaled",
    "UniformScaled",
    "CustomDensity",
    "DensityTableMeasure",
    "log_moment",
    "truncate",
    "pushforward",
    "thorin_measure",
    "measure_from_dict",
    "load_measure",
]

_GL_X, _GL_W = leggauss(16)
_MASS_TOL = 1e-3


class _TableDist:
    """Probability law with a piecewise-linear density on a finite grid."""

    def __init__(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        seg = 0.5 * (p[1:] + p[:-1]) * np.diff(x)
        z = seg.sum()
        self.x = x
        self.p = p / z
        self.c = np.concatenate([[0.0], np.cumsum(seg / z)])

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.x, self.p, left=0.0, right=0.0)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(self.x, t, side="right") - 1, 0, self.x.size - 2)
        x0 = self.x[i]
        h = np.diff(self.x)[i]
        p0 = self.p[i]
        slope = (self.p[i + 1] - p0) / h
        dt = np.clip(t - x0, 0.0, h)
        out = self.c[i] + p0 * dt + 0.5 * slope * dt ** 2
        return np.clip(np.where(t < self.x[0], 0.0, np.where(t >= self.x[-1], 1.0, out)), 0.0, 1.0)

    def sf(self, t):
        return 1.0 - self.cdf(t)

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        # invert the piecewise quadratic cdf segment by segment
        i = np.clip(np.searchsorted(self.c, q, side="right") - 1, 0, self.x.size - 2)
        h = np.diff(self.x)[i]
        p0 = self.p[i]
        slope = (self.p[i + 1] - p0) / h
        r = q - self.c[i]
        with np.errstate(all="ignore"):
            quad = 2.0 * r / (p0 + np.sqrt(np.maximum(p0 ** 2 + 2.0 * slope * r, 0.0)))
        lin = np.where(p0 > 0, r / np.where(p0 > 0, p0, 1.0), 0.0)
        dt = np.where(np.abs(slope) > 1e-300, quad, lin)
        dt = np.where(np.isfinite(dt), dt, 0.0)
        return self.x[i] + np.clip(dt, 0.0, h)

    def isf(self, q):
        return self.ppf(1.0 - np.asarray(q, dtype=float))


class _CustomDist:
    """Normalised law of a user density on an interval, via quadrature."""

    def __init__(self, density, lo, hi, normalize=True):
        from .quadrature import integrate_infinite, integrate_interval

        self.density = density
        self.lo, self.hi = float(lo), float(hi)
        self.z = 1.0
        if normalize:
            if np.isfinite(self.lo) and np.isfinite(self.hi):
                z, _ = integrate_interval(self._raw, self.lo, self.hi, abs_tol=1e-13, rel_tol=1e-11, raise_on_fail=False)
            else:
                z, _ = integrate_infinite(self._raw, self.lo, self.hi, abs_tol=1e-13, rel_tol=1e-11, raise_on_fail=False)
            if not (z > 0 and np.isfinite(z)):
                raise MeasureError("custom density has no positive finite integral")
            self.z = float(z)

    def _raw(self, x):
        return np.asarray(self.density(np.asarray(x, dtype=float)), dtype=float)

    @cached_property
    def _cdf_table(self):
        from .quadrature import integrate_infinite

        # cdf tabulated on a tan grid for cheap look-ups
        lo_v = -0.5 * np.pi if not np.isfinite(self.lo) else math.atan(self.lo)
        hi_v = 0.5 * np.pi if not np.isfinite(self.hi) else math.atan(self.hi)
        v = np.linspace(lo_v, hi_v, 4097)
        if not np.isfinite(self.lo):
            v = v[1:]
        if not np.isfinite(self.hi):
            v = v[:-1]
        xs = np.tan(v)
        if np.isfinite(self.lo):
            xs[0] = self.lo
        if np.isfinite(self.hi):
            xs[-1] = self.hi
        nodes = 0.5 * (xs[1:] + xs[:-1])[:, None] + 0.5 * np.diff(xs)[:, None] * _GL_X[None, :]
        vals = self.pdf(nodes.ravel()).reshape(nodes.shape)
        cs = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(xs) * (vals @ _GL_W))])
        if not np.isfinite(self.lo):
            tail, _ = integrate_infinite(self.pdf, -np.inf, xs[0], abs_tol=1e-14, raise_on_fail=False)
            cs = cs + tail
        return xs, np.clip(cs, 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        out = np.zeros(x.shape)
        if np.any(inside):
            out[inside] = self._raw(x[inside]) / self.z
        return out

    def cdf(self, x):
        xs, cs = self._cdf_table
        return np.interp(x, xs, cs, left=0.0, right=1.0)

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def ppf(self, q):
        xs, cs = self._cdf_table
        return np.interp(q, cs, xs)

    def isf(self, q):
        return self.ppf(1.0 - np.asarray(q, dtype=float))


class ContinuousPart:
    """Absolutely continuous component ``weight * law`` restricted to [lo, hi].

    ``weight`` is the mass carried by the restricted part; ``law`` is a
    probability distribution exposing ``pdf``, ``cdf``, ``sf``, ``ppf`` and
    ``isf`` (scipy frozen distributions qualify).
    """

    def __init__(self, family, params, weight, law, lo=-np.inf, hi=np.inf, breakpoints=(), heavy_tails=True):
        self.family = family
        self.params = dict(params)
        self.weight = float(weight)
        self.law = law
        self.lo = float(lo)
        self.hi = float(hi)
        self.breakpoints = tuple(float(b) for b in breakpoints)
        self.heavy_tails = heavy_tails
        if not self.weight > 0:
            raise MeasureError("continuous part needs positive mass")
        if isinstance(law, _CustomDist) and self.lo <= law.lo and self.hi >= law.hi:
            self._flo = self._fhi = 0.0
        else:
            self._flo = float(law.cdf(self.lo)) if np.isfinite(self.lo) else 0.0
            self._fhi = float(law.sf(self.hi)) if np.isfinite(self.hi) else 0.0
        self._z = 1.0 - self._flo - self._fhi
        if not self._z > 0:
            raise MeasureError("restriction interval carries no mass")

    @property
    def restricted(self):
        return np.isfinite(self.lo) or np.isfinite(self.hi)

    def pdf(self, x):
        """Mass density of this part (integrates to ``weight``)."""
        x = np.asarray(x, dtype=float)
        out = self.weight * np.asarray(self.law.pdf(x)) / self._z
        return np.where((x < self.lo) | (x > self.hi), 0.0, out)

    def cdf(self, x):
        """Mass of (-inf, x] carried by this part."""
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        return self.weight * np.clip((np.asarray(self.law.cdf(x)) - self._flo) / self._z, 0.0, 1.0)

    def sf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        return self.weight * np.clip((np.asarray(self.law.sf(x)) - self._fhi) / self._z, 0.0, 1.0)

    def ppf(self, q):
        """Quantile of the normalised restricted law."""
        q = np.asarray(q, dtype=float)
        lower = self._flo + q * self._z
        upper = self._fhi + (1.0 - q) * self._z
        out = np.where(q <= 0.5, self.law.ppf(np.minimum(lower, 1.0)), self.law.isf(np.minimum(upper, 1.0)))
        return np.clip(out, self.lo, self.hi)

    @cached_property
    def support(self):
        if isinstance(self.law, _CustomDist):
            return max(self.lo, self.law.lo), min(self.hi, self.law.hi)
        lo = self.lo if np.isfinite(self.lo) else float(self.law.ppf(0.0))
        hi = self.hi if np.isfinite(self.hi) else float(self.law.isf(0.0))
        return lo, hi

    @cached_property
    def mesh(self):
        """Panel boundaries and 16-point Gauss-Legendre nodes/mass weights.

        Panels have roughly equal mass; parts with unbounded base law get a
        geometric refinement towards both tails down to quantile 2**-57.
        """
        q = list(np.arange(1, 48) / 48.0)
        if self.heavy_tails:
            g = 2.0 ** -np.arange(6, 58)
            left, right = g, 1.0 - g[g > 1e-16]
            if np.isfinite(self.lo) and np.isfinite(self.hi):
                # on a bounded piece refine only while the pdf still varies towards the end
                left = self._varying(left, self.lo)
                right = self._varying(right, self.hi)
            q += list(left) + list(right)
        xb = list(self.ppf(np.array(sorted(q))))
        xb += [self.ppf(2.0 ** -57) if not np.isfinite(self.lo) else self.lo]
        xb += [self.ppf(1.0 - 2.0 ** -53) if not np.isfinite(self.hi) else self.hi]
        xb += [b for b in self.breakpoints if self.support[0] < b < self.support[1]]
        xb = np.unique(np.array(xb, dtype=float))
        xb = xb[np.isfinite(xb)]
        mag = np.maximum(np.abs(xb[1:]), np.abs(xb[:-1]))
        keep = np.concatenate([[True], np.diff(xb) > 1e-13 * mag])
        xb = xb[keep]
        mid = 0.5 * (xb[1:] + xb[:-1])
        half = 0.5 * np.diff(xb)
        nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
        weights = half[:, None] * _GL_W[None, :] * self.pdf(nodes)
        return xb, nodes, weights

    def _varying(self, qs, end):
        x = self.ppf(qs)
        p_end = float(self.pdf(np.array([end]))[0])
        with np.errstate(divide="ignore", invalid="ignore"):
            r = self.pdf(x) / p_end
        far = ~((r > 1 / 1.5) & (r < 1.5))
        n = int(np.argmin(far)) if not np.all(far) else far.size
        return qs[: n + 1]

    def integrate(self, h, adaptive=True, tol=1e-11):
        """``int h(x) (this part)(dx)``.

        The adaptive path works in ``x`` with a tangent map for infinite
        ends; ``adaptive=False`` uses the fixed panel rule of :attr:`mesh`.
        """
        if not adaptive:
            _, nodes, weights = self.mesh
            return np.sum(np.asarray(h(nodes.ravel())).reshape(nodes.shape) * weights)
        from .quadrature import integrate_infinite, integrate_interval

        lo, hi = self.support

        def g(x):
            return np.asarray(h(x)) * self.pdf(x)

        pts = [b for b in self.breakpoints if lo < b < hi]
        if np.isfinite(lo) and np.isfinite(hi):
            v, _ = integrate_interval(g, lo, hi, points=pts, abs_tol=tol * self.weight, rel_tol=tol, initial_splits=16)
        else:
            centre = float(self.ppf(0.5))
            spread = max(float(self.ppf(0.75) - self.ppf(0.25)), 1e-12)
            v, _ = integrate_infinite(g, lo, hi, scale=spread, center=centre, points=pts, abs_tol=tol * self.weight, rel_tol=tol, initial_splits=16, raise_on_fail=False)
        return v

    def affine(self, s, c):
        """Image under ``x -> s*x + c`` with ``s != 0``."""
        lo, hi = sorted((s * self.lo + c, s * self.hi + c))
        fam, p = self.family, self.params
        if fam == "cauchy":
            theta, sigma = s * p["theta"] + c, p["sigma"] / abs(s)
            return _cauchy_part(theta, sigma, self.weight, lo, hi)
        if fam == "gaussian":
            return _gaussian_part(s * p["theta"] + c, abs(s) * p["sd"], self.weight, lo, hi)
        if fam == "uniform":
            left = min(s * p["loc"] + c, s * (p["loc"] + p["width"]) + c)
            return _uniform_part(left, abs(s) * p["width"], self.weight, lo, hi)
        if fam == "table":
            xs = s * np.asarray(p["x"]) + c
            ps = np.asarray(p["pdf"])
            order = np.argsort(xs)
            return _table_part(xs[order], ps[order], self.weight, lo, hi)
        law = self.law

        def dens(y):
            return law.pdf((np.asarray(y) - c) / s) / abs(s)

        part = ContinuousPart(
            "custom",
            {"support": (lo, hi)},
            self.weight,
            _CustomDist(dens, *sorted((s * self.support[0] + c, s * self.support[1] + c))),
            lo,
            hi,
            breakpoints=[s * b + c for b in self.breakpoints],
            heavy_tails=self.heavy_tails,
        )
        return part

    def restrict(self, lo, hi):
        lo, hi = max(lo, self.lo), min(hi, self.hi)
        mass = self.weight * self._fraction(lo, hi)
        return ContinuousPart(self.family, self.params, mass, self.law, lo, hi, self.breakpoints, self.heavy_tails)

    def _fraction(self, lo, hi):
        return float((self.cdf(hi) - self.cdf(lo)) / self.weight)

    def discretize(self, n):
        """``n`` equal-mass atoms at the bin-median quantiles."""
        q = (np.arange(n) + 0.5) / n
        return self.ppf(q), np.full(n, self.weight / n)

    def sample(self, rng, n):
        return self.ppf(rng.random(n))

    def key(self):
        return (self.family, tuple(sorted((k, _hashable(v)) for k, v in self.params.items())), self.weight, self.lo, self.hi)


def _hashable(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return tuple(np.asarray(v, dtype=float).ravel().tolist())
    return v


def _cauchy_part(theta, sigma, weight=1.0, lo=-np.inf, hi=np.inf):
    law = stats.cauchy(loc=theta, scale=1.0 / sigma)
    return ContinuousPart("cauchy", {"theta": theta, "sigma": sigma}, weight, law, lo, hi)


def _gaussian_part(theta, sd, weight, lo=-np.inf, hi=np.inf):
    law = stats.norm(loc=theta, scale=sd)
    return ContinuousPart("gaussian", {"theta": theta, "sd": sd}, weight, law, lo, hi)


def _uniform_part(loc, width, weight, lo=-np.inf, hi=np.inf):
    law = stats.uniform(loc=loc, scale=width)
    lo, hi = max(lo, loc), min(hi, loc + width)
    return ContinuousPart("uniform", {"loc": loc, "width": width}, weight, law, lo, hi, heavy_tails=False)


def _table_part(x, p, weight, lo=-np.inf, hi=np.inf):
    law = _TableDist(x, p)
    lo, hi = max(lo, x[0]), min(hi, x[-1])
    bps = x if len(x) <= 2000 else ()
    return ContinuousPart("table", {"x": tuple(x), "pdf": tuple(p)}, weight, law, lo, hi, bps, heavy_tails=False)


class ParameterMeasure:
    """Finite measure alpha on the line: atoms plus an optional density part.

    Parameters
    ----------
    atoms_x, atoms_m : array_like
        Atom locations and strictly positive masses. Duplicate locations are
        merged.
    continuous : ContinuousPart, optional
    label : str, optional
        Free-form name used in reports.

    Notes
    -----
    Instances are treated as immutable; all derived quantities are cached.
    """

    def __init__(self, atoms_x=(), atoms_m=(), continuous: Optional[ContinuousPart] = None, label=None, _allow_empty=False):
        x = np.asarray(atoms_x, dtype=float).ravel()
        m = np.asarray(atoms_m, dtype=float).ravel()
        if x.shape != m.shape:
            raise MeasureError("atom locations and masses differ in length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(m))):
            raise MeasureError("atoms must be finite")
        if np.any(m <= 0):
            raise MeasureError("atom masses must be strictly positive")
        if x.size:
            ux, inv = np.unique(x, return_inverse=True)
            um = np.zeros(ux.size)
            np.add.at(um, inv, m)
            x, m = ux, um
        x.setflags(write=False)
        m.setflags(write=False)
        self.atoms_x = x
        self.atoms_m = m
        self.continuous = continuous
        self.label = label
        if self.total_mass <= 0 and not _allow_empty:
            raise MeasureError("measure must have positive total mass")

    # construction helpers -------------------------------------------------

    @classmethod
    def empty(cls):
        return cls(_allow_empty=True)

    def __repr__(self):
        parts = []
        if self.atoms_x.size:
            shown = ", ".join(f"{mm:g}@{xx:g}" for xx, mm in zip(self.atoms_x[:6], self.atoms_m[:6]))
            more = "" if self.atoms_x.size <= 6 else f", ... ({self.atoms_x.size} atoms)"
            parts.append(f"atoms[{shown}{more}]")
        if self.continuous is not None:
            c = self.continuous
            parts.append(f"{c.family}({c.params if c.family != 'table' else '...'}, mass={c.weight:g}, [{c.lo:g}, {c.hi:g}])")
        return f"ParameterMeasure({'; '.join(parts) or 'empty'})"

    # basic properties ------------------------------------------------------

    @property
    def kind(self):
        if self.continuous is None:
            return "discrete" if self.atoms_x.size else "empty"
        return "mixed" if self.atoms_x.size else "family"

    @cached_property
    def total_mass(self) -> float:
        c = self.continuous.weight if self.continuous is not None else 0.0
        return float(self.atoms_m.sum() + c)

    @property
    def atoms(self):
        return list(zip(self.atoms_x.tolist(), self.atoms_m.tolist()))

    @cached_property
    def hull(self):
        """Closed convex hull of the support as (lo, hi); may be infinite."""
        los, his = [], []
        if self.atoms_x.size:
            los.append(self.atoms_x[0])
            his.append(self.atoms_x[-1])
        if self.continuous is not None:
            lo, hi = self.continuous.support
            los.append(lo)
            his.append(hi)
        if not los:
            return (np.nan, np.nan)
        return (float(min(los)), float(max(his)))

    @property
    def bounded(self):
        lo, hi = self.hull
        return bool(np.isfinite(lo) and np.isfinite(hi))

    @property
    def max_atom_mass(self):
        return float(self.atoms_m.max()) if self.atoms_m.size else 0.0

    @property
    def is_degenerate(self):
        """All mass sits on a single point."""
        return self.continuous is None and self.atoms_x.size == 1

    def atom_mass_at(self, x, tol=0.0):
        hit = np.abs(self.atoms_x - x) <= tol
        return float(self.atoms_m[hit].sum())

    def cdf(self, u):
        """Distribution function ``A(u) = alpha((-inf, u])``."""
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        if self.atoms_x.size:
            cm = np.concatenate([[0.0], np.cumsum(self.atoms_m)])
            out = out + cm[np.searchsorted(self.atoms_x, u, side="right")]
        if self.continuous is not None:
            out = out + self.continuous.cdf(u)
        return out if out.ndim else float(out)

    def integrate(self, h):
        """``int h d(alpha)``; ``h`` must be vectorised."""
        total = np.sum(np.asarray(h(self.atoms_x)) * self.atoms_m) if self.atoms_x.size else 0.0
        if self.continuous is not None:
            total = total + self.continuous.integrate(h)
        return total

    def first_abs_moment(self):
        if self.continuous is not None and self.continuous.family == "cauchy" and not self.continuous.restricted:
            return np.inf
        return float(self.integrate(np.abs))

    def reflect(self):
        return pushforward(self, Affine(-1.0, 0.0))

    def is_symmetric(self, tol=1e-12):
        """True when the reflected measure coincides with this one."""
        if self.atoms_x.size:
            xs, ms = self.atoms_x, self.atoms_m
            if not (np.allclose(np.sort(-xs), xs, atol=tol) and np.allclose(ms[::-1], ms, atol=tol)):
                return False
        c = self.continuous
        if c is None:
            return True
        if abs(c.lo + c.hi) > tol * max(1.0, abs(c.lo)) and np.isfinite(c.lo + c.hi):
            return False
        if np.isfinite(c.lo) != np.isfinite(c.hi):
            return False
        if c.family in ("cauchy", "gaussian"):
            return abs(c.params["theta"]) <= tol
        if c.family == "uniform":
            return abs(2 * c.params["loc"] + c.params["width"]) <= tol
        grid = np.linspace(*c.support, 201) if np.all(np.isfinite(c.support)) else np.linspace(-50, 50, 401)
        return bool(np.allclose(c.pdf(grid), c.pdf(-grid), atol=tol, rtol=1e-9))

    def scale(self):
        """Typical length scale used to size truncation levels."""
        lo, hi = self.hull
        if np.isfinite(lo) and np.isfinite(hi):
            return max(hi - lo, abs(lo), abs(hi), 1e-12)
        c = self.continuous
        spread = float(c.ppf(0.75) - c.ppf(0.25))
        centre = float(c.ppf(0.5))
        return max(spread, abs(centre), 1e-12)

    def normalized_sampler(self):
        """Callable ``(rng, n) -> draws`` from ``alpha / a``."""
        a = self.total_mass
        xs, ms = self.atoms_x, self.atoms_m
        cw = self.continuous.weight if self.continuous is not None else 0.0
        probs = np.concatenate([ms, [cw]]) / a
        cont = self.continuous

        def draw(rng, n):
            if cont is None and xs.size == 1:
                return np.full(n, xs[0])
            which = rng.choice(probs.size, size=n, p=probs)
            out = np.empty(n)
            is_c = which == xs.size
            out[~is_c] = xs[which[~is_c]] if xs.size else 0.0
            k = int(is_c.sum())
            if k:
                out[is_c] = cont.sample(rng, k)
            return out

        return draw

    def key(self):
        c = None if self.continuous is None else self.continuous.key()
        return (tuple(self.atoms_x.tolist()), tuple(self.atoms_m.tolist()), c)

    def __eq__(self, other):
        return isinstance(other, ParameterMeasure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


# ---------------------------------------------------------------------------
# named constructors


def Discrete(atoms: Iterable, label=None) -> ParameterMeasure:
    """Discrete measure from ``[(x, mass), ...]``."""
    atoms = list(atoms)
    if not atoms:
        raise MeasureError("discrete measure needs at least one atom")
    x, m = zip(*atoms)
    return ParameterMeasure(x, m, label=label)


def Cauchy(theta: float = 0.0, sigma: float = 1.0) -> ParameterMeasure:
    """Cauchy probability with density ``sigma/(pi(1 + sigma^2 (x-theta)^2))``."""
    if not np.isfinite(theta):
        raise MeasureError("Cauchy location must be finite")
    if sigma == np.inf:
        return ParameterMeasure([theta], [1.0], label=f"cauchy({theta:g},inf)")
    if not sigma > 0:
        raise MeasureError("Cauchy sigma must be positive")
    return ParameterMeasure(continuous=_cauchy_part(float(theta), float(sigma)), label=f"cauchy({theta:g},{sigma:g})")


def GaussianScaled(a: float, theta: float = 0.0, sd: float = 1.0) -> ParameterMeasure:
    """``a`` times the N(theta, sd^2) law."""
    if not (a > 0 and sd > 0):
        raise MeasureError("Gaussian mass and sd must be positive")
    return ParameterMeasure(continuous=_gaussian_part(float(theta), float(sd), float(a)), label=f"gaussian({a:g},{theta:g},{sd:g})")


def UniformScaled(a: float, lo: float, hi: float) -> ParameterMeasure:
    if not (a > 0 and hi > lo):
        raise MeasureError("uniform measure needs a > 0 and hi > lo")
    return ParameterMeasure(continuous=_uniform_part(float(lo), float(hi - lo), float(a)), label=f"uniform({a:g},{lo:g},{hi:g})")


def Uniform01Scaled(a: float) -> ParameterMeasure:
    """``a`` times the uniform law on (0, 1)."""
    return UniformScaled(a, 0.0, 1.0)


def CustomDensity(density: Callable, support=(-np.inf, np.inf), mass: float = 1.0, breakpoints=(), label=None, normalize=True) -> ParameterMeasure:
    """Measure ``mass * density / int(density)`` on ``support``.

    The density is normalised numerically, so it only has to be
    proportional to the intended shape. Pass ``normalize=False`` when it is
    already a probability density whose integral is hard to compute.
    """
    lo, hi = map(float, support)
    if not (mass > 0 and hi > lo):
        raise MeasureError("custom density needs mass > 0 and a nonempty support")
    law = _CustomDist(density, lo, hi, normalize)
    heavy = not (np.isfinite(lo) and np.isfinite(hi))
    part = ContinuousPart("custom", {"support": (lo, hi)}, mass, law, lo, hi, breakpoints, heavy_tails=heavy)
    return ParameterMeasure(continuous=part, label=label)


def DensityTableMeasure(x, pdf, total_mass: float) -> ParameterMeasure:
    """Measure with piecewise-linear density through the points ``(x, pdf)``.

    The table is accepted when its integral matches ``total_mass`` or 1
    (relative 1e-3); a unit-integral table is scaled up to ``total_mass``.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(pdf, dtype=float)
    if x.ndim != 1 or x.size < 2 or x.shape != p.shape:
        raise MeasureError("density table needs at least two [x, pdf] rows")
    if np.any(np.diff(x) <= 0):
        raise MeasureError("density table abscissae must be strictly increasing")
    if np.any(p < 0) or not np.any(p > 0):
        raise MeasureError("density table values must be nonnegative and not all zero")
    integral = float(np.trapezoid(p, x)) if hasattr(np, "trapezoid") else float(np.trapz(p, x))
    if not (abs(integral - total_mass) <= _MASS_TOL * total_mass or abs(integral - 1.0) <= _MASS_TOL):
        raise MeasureError(f"density table integrates to {integral:.6g}, expected {total_mass:g} or 1")
    return ParameterMeasure(continuous=_table_part(x, p, float(total_mass)), label="density-table")


# ---------------------------------------------------------------------------
# measure-level operations


class Affine:
    """The map ``x -> s*x + c``; pushforward treats it exactly."""

    def __init__(self, s: float, c: float = 0.0):
        self.s = float(s)
        self.c = float(c)

    def __call__(self, x):
        return self.s * np.asarray(x, dtype=float) + self.c

    def __repr__(self):
        return f"Affine({self.s:g}, {self.c:g})"


def _octave_sum(pdf, sign, cfg_tol=1e-13, max_octaves=400):
    """Tail integral of log(1+|x|) pdf over |x| > 1 on one side, by octaves."""
    from .quadrature import integrate_interval

    total = 0.0
    prev = None
    slow = 0
    for j in range(max_octaves):
        lo, hi = 2.0 ** j, 2.0 ** (j + 1)

        def h(t):
            x = sign * t
            return np.log1p(t) * pdf(x)

        try:
            v, _ = integrate_interval(h, lo, hi, abs_tol=1e-300, rel_tol=1e-10)
        except QuadratureError as exc:
            raise IndeterminateError(f"tail quadrature failed on octave {j}") from exc
        total += v
        if prev is not None and prev > 0:
            slow = slow + 1 if v / prev > 0.75 else 0
            if slow >= 8 and v > 1e-12 * max(total, 1e-300):
                return np.inf
        if v <= cfg_tol * max(total, 1e-300) and (prev is None or v < prev or prev == 0):
            if j > 4:
                return total
        prev = v
    raise IndeterminateError("tail integral neither converged nor diverged")


def log_moment(alpha: ParameterMeasure):
    """``int log(1 + |x|) alpha(dx)`` and whether it is finite.

    Returns
    -------
    value : float
        The integral, or ``inf``.
    finite : bool

    Raises
    ------
    IndeterminateError
        When the tail test cannot decide convergence.
    """
    from .quadrature import integrate_interval

    total = float(np.sum(np.log1p(np.abs(alpha.atoms_x)) * alpha.atoms_m))
    c = alpha.continuous
    if c is None:
        return total, True
    lo, hi = c.support
    bps = [b for b in (-1.0, 0.0, 1.0) if lo < b < hi] + [b for b in c.breakpoints if max(lo, -1) < b < min(hi, 1)]
    a, b = max(lo, -1.0), min(hi, 1.0)
    if a < b:
        core, _ = integrate_interval(lambda x: np.log1p(np.abs(x)) * c.pdf(x), a, b, points=bps, abs_tol=1e-14, rel_tol=1e-12)
        total += core
    for sign, end in ((1.0, hi), (-1.0, lo)):
        if sign * end <= 1.0:
            continue
        if np.isfinite(end):
            inner = [sign * x for x in c.breakpoints if 1.0 < sign * x < sign * end]
            v, _ = integrate_interval(lambda t: np.log1p(t) * c.pdf(sign * t), 1.0, abs(end), points=inner, abs_tol=1e-14, rel_tol=1e-12, initial_splits=16)
            total += v
        else:
            v = _octave_sum(c.pdf, sign)
            if not np.isfinite(v):
                return np.inf, False
            total += v
    return float(total), True


def truncate(alpha: ParameterMeasure, k: float) -> ParameterMeasure:
    """Collapse the mass outside (-k, k) onto atoms at -k and k."""
    if not k > 0:
        raise ValueError("truncation level must be positive")
    lo, hi = alpha.hull
    if lo > -k and hi < k:
        return alpha
    x = np.clip(alpha.atoms_x, -k, k)
    m = alpha.atoms_m.copy()
    xs, ms = list(x), list(m)
    c = alpha.continuous
    part = None
    if c is not None:
        left = float(c.cdf(-k))
        right = float(c.sf(k))
        if left > 0:
            xs.append(-k)
            ms.append(left)
        if right > 0:
            xs.append(k)
            ms.append(right)
        inner = c.weight - left - right
        if inner > 1e-15 * c.weight:
            part = c.restrict(-k, k)
    return ParameterMeasure(xs, ms, part, label=f"{alpha.label or 'alpha'}^({k:g})")


def pushforward(alpha: ParameterMeasure, f, method: str = "auto", grid: Optional[int] = None) -> ParameterMeasure:
    """Image measure ``alpha o f^{-1}``.

    Parameters
    ----------
    f : callable or Affine or None
        ``None`` and ``Affine(1, 0)`` are the identity.
    method : {"auto", "exact-for-affine", "sample-grid"}
    grid : int, optional
        Number of equal-mass bins used to discretise a continuous part when
        ``f`` is not affine (or when ``method="sample-grid"``).
    """
    if f is None or (isinstance(f, Affine) and f.s == 1.0 and f.c == 0.0):
        return alpha
    c = alpha.continuous
    exact = isinstance(f, Affine) and method != "sample-grid"
    if exact:
        if f.s == 0.0:
            return ParameterMeasure([f.c], [alpha.total_mass])
        part = None if c is None else c.affine(f.s, f.c)
        return ParameterMeasure(f(alpha.atoms_x), alpha.atoms_m, part)
    if method == "exact-for-affine":
        raise MeasureError("exact pushforward needs an Affine map")
    xs = [np.asarray(f(alpha.atoms_x), dtype=float)] if alpha.atoms_x.size else []
    ms = [alpha.atoms_m] if alpha.atoms_x.size else []
    if c is not None:
        if grid is None:
            raise MeasureError("non-affine pushforward of a continuous measure needs a grid level")
        gx, gm = c.discretize(int(grid))
        xs.append(np.asarray(f(gx), dtype=float))
        ms.append(gm)
    return ParameterMeasure(np.concatenate(xs), np.concatenate(ms))


def thorin_measure(alpha: ParameterMeasure, grid: int = 4000):
    """Image of alpha under ``x -> 1/x`` with the mass at 0 dropped.

    Returns
    -------
    measure : ParameterMeasure
        Possibly empty.
    dropped : float
        Mass that sat at 0.
    """
    x, m = alpha.atoms_x, alpha.atoms_m
    zero = x == 0.0
    dropped = float(m[zero].sum())
    xs = [1.0 / x[~zero]]
    ms = [m[~zero]]
    if alpha.continuous is not None:
        gx, gm = alpha.continuous.discretize(grid)
        nz = gx != 0.0
        xs.append(1.0 / gx[nz])
        ms.append(gm[nz])
        dropped += float(gm[~nz].sum())
    return ParameterMeasure(np.concatenate(xs), np.concatenate(ms), _allow_empty=True), dropped


# ---------------------------------------------------------------------------
# measure-definition files


def _reject_constant(name):
    raise MeasureError(f"non-finite token {name!r} is not allowed in a measure file")


def _number(v, what):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise MeasureError(f"{what} must be a number")
    return float(v)


def measure_from_dict(d: dict) -> ParameterMeasure:
    """Build a measure from the parsed JSON definition."""
    if not isinstance(d, dict) or "kind" not in d:
        raise MeasureError("measure definition needs a 'kind' key")
    kind = d["kind"]
    params = d.get("params", {}) or {}
    if not isinstance(params, dict):
        raise MeasureError("'params' must be an object")
    if kind == "discrete":
        atoms = d.get("atoms")
        if not isinstance(atoms, list) or not atoms:
            raise MeasureError("discrete measure needs a nonempty 'atoms' array")
        pairs = []
        for at in atoms:
            if not isinstance(at, dict) or set(at) - {"x", "mass"} or "x" not in at or "mass" not in at:
                raise MeasureError("atoms are objects with keys 'x' and 'mass'")
            pairs.append((_number(at["x"], "atom x"), _number(at["mass"], "atom mass")))
        mu = Discrete(pairs)
        if "total_mass" in d and abs(_number(d["total_mass"], "total_mass") - mu.total_mass) > 1e-12 * mu.total_mass:
            raise MeasureError("total_mass disagrees with the atom masses")
        return mu
    if kind == "cauchy":
        theta = _number(params.get("theta", 0.0), "theta")
        sigma = params.get("sigma", 1.0)
        sigma = np.inf if sigma == "inf" else _number(sigma, "sigma")
        if "total_mass" in d and _number(d["total_mass"], "total_mass") != 1.0:
            raise MeasureError("a Cauchy parameter measure has total mass 1")
        return Cauchy(theta, sigma)
    if kind == "gaussian":
        a = _number(d.get("total_mass", 1.0), "total_mass")
        return GaussianScaled(a, _number(params.get("theta", 0.0), "theta"), _number(params.get("sigma", 1.0), "sigma"))
    if kind == "uniform01":
        return Uniform01Scaled(_number(d.get("total_mass", 1.0), "total_mass"))
    if kind == "density-table":
        rows = d.get("density_table")
        if not isinstance(rows, list) or len(rows) < 2:
            raise MeasureError("density-table needs a 'density_table' array of [x, pdf] pairs")
        for r in rows:
            if not (isinstance(r, list) and len(r) == 2):
                raise MeasureError("density_table rows are [x, pdf] pairs")
        xs = [_number(r[0], "table x") for r in rows]
        ps = [_number(r[1], "table pdf") for r in rows]
        return DensityTableMeasure(xs, ps, _number(d.get("total_mass", 1.0), "total_mass"))
    raise MeasureError(f"unknown measure kind {kind!r}")


def load_measure(source) -> ParameterMeasure:
    """Parse a measure-definition file (path, JSON text, or dict)."""
    if isinstance(source, dict):
        return measure_from_dict(source)
    text = source
    if not (isinstance(source, str) and source.lstrip().startswith("{")):
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    try:
        d = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise MeasureError(f"malformed measure file: {exc}") from exc
    return measure_from_dict(d)
