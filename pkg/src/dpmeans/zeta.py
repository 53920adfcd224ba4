"""The log-integral ``zeta(w; alpha, f) = int log(1 + w f(x)) alpha(dx)``.

The logarithm is the principal branch. For real ``w`` the points where
``1 + w f(x) < 0`` contribute ``i*pi`` times their mass.

Atoms are summed directly. A continuous part is integrated with the fixed
Gauss-Legendre panel rule of its mesh; panels that come close to the
singular point ``x0 = -1/w`` are replaced by a rule graded geometrically
towards ``Re x0``. An untruncated Cauchy part uses its closed form.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import SingularInputError
from .measure import Affine, ParameterMeasure, pushforward

__all__ = ["zeta", "zeta_prime", "log1p_principal"]

_GL_X, _GL_W = leggauss(16)
_CHUNK = 1_500_000


def log1p_principal(z):
    """``log(1 + z)`` on the principal branch with ``-0.0`` imaginary parts fixed."""
    z = np.array(z, dtype=complex, copy=True)
    z.imag += 0.0
    return np.log1p(z)


def _cauchy_zeta(w, theta, sigma):
    s = 1.0 / sigma
    out = np.empty(w.shape, dtype=complex)
    up = w.imag > 0
    dn = w.imag < 0
    re = ~(up | dn)
    out[up] = np.log(1.0 + w[up] * (theta - 1j * s))
    out[dn] = np.log(1.0 + w[dn] * (theta + 1j * s))
    if np.any(re):
        v = w[re].real
        mod = 0.5 * np.log((1.0 + v * theta) ** 2 + (v * s) ** 2)
        # P(1 + vX < 0) for X Cauchy(theta, half-width s)
        with np.errstate(divide="ignore", invalid="ignore"):
            x0 = -1.0 / v
            below = 0.5 + np.arctan((x0 - theta) / s) / math.pi
        prob = np.where(v > 0, below, np.where(v < 0, 1.0 - below, 0.0))
        out[re] = mod + 1j * math.pi * prob
    return out


def _log_kernel(w, x):
    return log1p_principal(w * x)


def _deriv_kernel(w, x):
    return x / (1.0 + w * x)


def _cauchy_zeta_prime(w, theta, sigma):
    s = 1.0 / sigma
    # real w: average of the two one-sided limits
    up = (theta - 1j * s) / (1.0 + w * (theta - 1j * s))
    dn = (theta + 1j * s) / (1.0 + w * (theta + 1j * s))
    return np.where(w.imag > 0, up, np.where(w.imag < 0, dn, 0.5 * (up + dn)))


def _panel_rule_sum(w, nodes, weights, kernel=_log_kernel):
    """sum_j weights_j kernel(w, nodes_j) for every w (chunked)."""
    n = nodes.size
    out = np.empty(w.size, dtype=complex)
    step = max(1, _CHUNK // max(n, 1))
    xn = nodes.ravel()
    wn = weights.ravel()
    for i in range(0, w.size, step):
        ww = w[i:i + step]
        out[i:i + step] = kernel(ww[:, None], xn[None, :]) @ wn
    return out


def _continuous_identity(w, part, kernel=_log_kernel):
    xb, nodes, weights = part.mesh
    total = _panel_rule_sum(w, nodes, weights, kernel)
    nz = w != 0
    if not np.any(nz):
        return total
    idx = np.nonzero(nz)[0]
    x0 = -1.0 / w[idx]
    a = xb[:-1]
    b = xb[1:]
    length = b - a
    flags_w, flags_p = [], []
    step = max(1, _CHUNK // max(a.size, 1))
    for i in range(0, idx.size, step):
        xr = x0[i:i + step].real[:, None]
        xi = x0[i:i + step].imag[:, None]
        dx = np.maximum(np.maximum(a[None, :] - xr, xr - b[None, :]), 0.0)
        dist = np.hypot(dx, xi)
        iw, ip = np.nonzero(dist < length[None, :])
        flags_w.append(iw + i)
        flags_p.append(ip)
    fw = np.concatenate(flags_w) if flags_w else np.zeros(0, int)
    fp = np.concatenate(flags_p) if flags_p else np.zeros(0, int)
    if fw.size == 0:
        return total
    ww = w[idx[fw]]
    # drop the plain-rule contribution of the flagged panels
    with np.errstate(divide="ignore", invalid="ignore"):
        plain = np.sum(kernel(ww[:, None], nodes[fp]) * weights[fp], axis=1)
    graded = _graded(ww, x0[fw], a[fp], b[fp], part, kernel)
    np.add.at(total, idx[fw], graded - plain)
    return total


def _graded(w, x0, a, b, part, kernel=_log_kernel):
    """Panel integrals with nodes graded towards the nearly singular point."""
    c = np.clip(x0.real, a, b)
    dx = np.maximum(np.maximum(a - x0.real, x0.real - b), 0.0)
    d = np.maximum(np.hypot(dx, x0.imag), 1e-15 * (b - a))
    d = np.maximum(d, 8.0 * np.spacing(np.abs(c)))
    m_max = int(min(60, max(1, math.ceil(math.log2(np.max((b - a) / d))) + 1)))
    offs = 2.0 ** np.arange(m_max + 1)
    out = np.empty(w.size, dtype=complex)
    step = max(1, _CHUNK // (2 * (m_max + 2) * 16))
    for i in range(0, w.size, step):
        sl = slice(i, i + step)
        cc, dd, aa, bb = c[sl, None], d[sl, None], a[sl, None], b[sl, None]
        bps = np.concatenate([aa, bb, cc - dd * offs[None, :], cc + dd * offs[None, :]], axis=1)
        bps = np.sort(np.clip(bps, aa, bb), axis=1)
        lo = bps[:, :-1]
        half = 0.5 * (bps[:, 1:] - lo)
        mid = lo + half
        nodes = mid[:, :, None] + half[:, :, None] * _GL_X[None, None, :]
        wts = half[:, :, None] * _GL_W[None, None, :] * part.pdf(nodes)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = kernel(w[sl, None, None], nodes)
            terms = np.where(half[:, :, None] > 0, vals * wts, 0.0)
        out[sl] = np.sum(terms, axis=(1, 2))
    return out


def zeta(w, alpha: ParameterMeasure, f=None, cfg=None):
    """``int log(1 + w f(x)) alpha(dx)`` for scalar or array ``w``.

    Parameters
    ----------
    w : complex or array_like of complex
    alpha : ParameterMeasure
    f : callable, Affine or None
        Defaults to the identity. Affine maps are applied to the measure
        exactly; other maps use the fixed panel rule on the continuous part.

    Raises
    ------
    SingularInputError
        If ``1 + w f(x) = 0`` at an atom.
    """
    if isinstance(f, Affine):
        alpha = pushforward(alpha, f)
        f = None
    w_arr = np.asarray(w, dtype=complex)
    wf = w_arr.ravel()
    out = np.zeros(wf.shape, dtype=complex)
    if alpha.atoms_x.size:
        fx = alpha.atoms_x if f is None else np.asarray(f(alpha.atoms_x), dtype=float)
        arg = wf[:, None] * fx[None, :]
        if np.any(1.0 + arg == 0):
            raise SingularInputError("1 + w f(x) vanishes at an atom")
        out += log1p_principal(arg) @ alpha.atoms_m
    part = alpha.continuous
    if part is not None:
        if f is not None:
            _, nodes, weights = part.mesh
            fx = np.asarray(f(nodes.ravel()), dtype=float)
            out += _panel_rule_sum(wf, fx, weights.ravel())
        elif part.family == "cauchy" and not part.restricted:
            out += part.weight * _cauchy_zeta(wf, part.params["theta"], part.params["sigma"])
        else:
            out += _continuous_identity(wf, part)
    out = out.reshape(w_arr.shape)
    return complex(out) if out.ndim == 0 else out


def zeta_prime(w, alpha: ParameterMeasure):
    """Derivative ``int x / (1 + w x) alpha(dx)`` of ``zeta`` in ``w``.

    ``w`` must keep ``1 + w x`` away from zero on the atoms. For an
    untruncated Cauchy part and real ``w`` the principal value is returned.
    """
    w_arr = np.asarray(w, dtype=complex)
    wf = w_arr.ravel()
    out = np.zeros(wf.shape, dtype=complex)
    if alpha.atoms_x.size:
        den = 1.0 + wf[:, None] * alpha.atoms_x[None, :]
        if np.any(den == 0):
            raise SingularInputError("1 + w x vanishes at an atom")
        out += (alpha.atoms_x[None, :] / den) @ alpha.atoms_m
    part = alpha.continuous
    if part is not None:
        if part.family == "cauchy" and not part.restricted:
            out += part.weight * _cauchy_zeta_prime(wf, part.params["theta"], part.params["sigma"])
        else:
            out += _continuous_identity(wf, part, _deriv_kernel)
    out = out.reshape(w_arr.shape)
    return complex(out) if out.ndim == 0 else out
