"""Monte Carlo ground truth for the Dirichlet mean and related laws.

All draws come from ``numpy.random.Generator(Philox)`` streams derived from
one integer seed through ``SeedSequence.spawn``, one child per chunk, so a
fixed (seed, n_samples, chunk_size) triple reproduces every sample bit for
bit regardless of how the chunks are scheduled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .measure import ParameterMeasure, pushforward

__all__ = [
    "RNG_ALGORITHM",
    "McConfig",
    "sample_mean",
    "sample_mean_and_variance",
    "sample_dirichlet_weights",
    "sample_finite_dirichlet_mean",
    "sample_gamma_functional",
    "estimators",
]

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.Philox (4x64-10) seeded by SeedSequence(seed).spawn(n_chunks)"


@dataclass(frozen=True)
class McConfig:
    """Sampling controls.

    ``rho`` bounds the stick mass left after truncation; ``None`` picks
    1e-12, or 1e-14 when alpha has Cauchy tails.
    """

    n_samples: int = 100_000
    seed: int = 0
    rho: Optional[float] = None
    chunk_size: int = 1 << 16
    discretize: int = 4000

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if not (0 <= self.seed < 2 ** 64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.rho is not None and not (0 < self.rho < 1):
            raise ValueError("rho must lie in (0, 1)")

    def chunks(self):
        """List of (start, stop, generator) covering ``n_samples``."""
        bounds = list(range(0, self.n_samples, self.chunk_size)) + [self.n_samples]
        children = np.random.SeedSequence(self.seed).spawn(len(bounds) - 1)
        return [
            (lo, hi, np.random.Generator(np.random.Philox(ss)))
            for lo, hi, ss in zip(bounds[:-1], bounds[1:], children)
        ]


def _rho_for(alpha: ParameterMeasure, cfg: McConfig):
    if cfg.rho is not None:
        return cfg.rho
    c = alpha.continuous
    if c is not None and c.family == "cauchy" and not c.restricted:
        log.info("Cauchy tails: stick residual bound 1e-14; truncation bias below the MC noise but not zero")
        return 1e-14
    return 1e-12


def _stick_breaking(alpha, cfg, f=None, with_variance=False):
    a = alpha.total_mass
    draw = alpha.normalized_sampler()
    rho = _rho_for(alpha, cfg)
    mean = np.empty(cfg.n_samples)
    second = np.empty(cfg.n_samples) if with_variance else None
    fmap = (lambda y: y) if f is None else f
    for lo, hi, rng in cfg.chunks():
        n = hi - lo
        acc = np.zeros(n)
        acc2 = np.zeros(n) if with_variance else None
        rem = np.ones(n)
        active = np.arange(n)
        while active.size:
            v = rng.beta(1.0, a, size=active.size)
            y = fmap(draw(rng, active.size))
            p = v * rem[active]
            acc[active] += p * y
            if with_variance:
                acc2[active] += p * y * y
            rem[active] *= 1.0 - v
            active = active[rem[active] >= rho]
        # leftover stick mass goes to one extra atom
        y = fmap(draw(rng, n))
        acc += rem * y
        assert np.all(rem < rho)
        mean[lo:hi] = acc
        if with_variance:
            acc2 += rem * y * y
            second[lo:hi] = acc2
    return mean, second


def sample_mean(alpha: ParameterMeasure, cfg: McConfig = McConfig(), f: Optional[Callable] = None) -> np.ndarray:
    """Draws of the random mean ``sum_j p_j f(Y_j)`` by stick breaking."""
    if alpha.is_degenerate:
        x = alpha.atoms_x[0] if f is None else float(np.asarray(f(alpha.atoms_x))[0])
        return np.full(cfg.n_samples, x)
    return _stick_breaking(alpha, cfg, f)[0]


def sample_mean_and_variance(alpha: ParameterMeasure, cfg: McConfig = McConfig()):
    """Draws of (mean, variance) of the random probability measure."""
    if alpha.is_degenerate:
        return np.full(cfg.n_samples, alpha.atoms_x[0]), np.zeros(cfg.n_samples)
    m, s2 = _stick_breaking(alpha, cfg, with_variance=True)
    return m, np.maximum(s2 - m * m, 0.0)


def sample_dirichlet_weights(masses: Sequence[float], cfg: McConfig = McConfig()) -> np.ndarray:
    """``(n_samples, K)`` Dirichlet(masses) vectors via normalised gammas."""
    m = np.asarray(masses, dtype=float)
    if m.ndim != 1 or m.size == 0 or np.any(m <= 0):
        raise ValueError("Dirichlet parameters must be positive")
    out = np.empty((cfg.n_samples, m.size))
    for lo, hi, rng in cfg.chunks():
        g = rng.standard_gamma(m, size=(hi - lo, m.size))
        out[lo:hi] = g / g.sum(axis=1, keepdims=True)
    return out


def sample_finite_dirichlet_mean(atoms: Sequence[float], masses: Sequence[float], cfg: McConfig = McConfig()) -> np.ndarray:
    """Exact draws of ``<u, x>`` with ``u ~ Dirichlet(masses)``."""
    x = np.asarray(atoms, dtype=float)
    if x.size == 1:
        return np.full(cfg.n_samples, x[0])
    return sample_dirichlet_weights(masses, cfg) @ x


def sample_gamma_functional(alpha: ParameterMeasure, f: Optional[Callable] = None, cfg: McConfig = McConfig(), normalized=False) -> np.ndarray:
    """Draws of ``sum_k f(x_k) G_k`` with independent ``G_k ~ Gamma(alpha{x_k})``.

    A continuous part is first replaced by ``cfg.discretize`` equal-mass
    atoms. With ``normalized=True`` the sum is divided by ``sum_k G_k``,
    which gives a Dirichlet mean.
    """
    if alpha.continuous is not None:
        alpha = pushforward(alpha, lambda x: x, method="sample-grid", grid=cfg.discretize)
    x = alpha.atoms_x if f is None else np.asarray(f(alpha.atoms_x), dtype=float)
    m = alpha.atoms_m
    out = np.empty(cfg.n_samples)
    for lo, hi, rng in cfg.chunks():
        g = rng.standard_gamma(m, size=(hi - lo, m.size))
        s = g @ x
        out[lo:hi] = s / g.sum(axis=1) if normalized else s
    return out


def _jackknife_blocks(values, stat, n_blocks=20):
    n = values.size
    idx = np.array_split(np.arange(n), n_blocks)
    full = stat(values)
    loo = np.array([stat(np.delete(values, b)) for b in idx])
    g = len(idx)
    se = math.sqrt((g - 1) / g * np.sum(np.abs(loo - loo.mean()) ** 2))
    return full, se


def estimators(samples, kind: str, arg=None):
    """Empirical statistic with a standard error.

    Parameters
    ----------
    samples : array_like
    kind : {"ecf", "mgf", "kde", "ks", "mean"}
        ``ecf`` -> mean of ``exp(i t X)``, ``mgf`` -> mean of ``exp(t X)``,
        ``kde`` -> Gaussian kernel density at ``xi`` with Silverman's rule
        ``h = 0.9 min(sd, IQR/1.34) n**(-1/5)``, ``ks`` -> sup distance to the
        cdf ``arg``.
    arg : float or callable
        ``t``, ``xi`` or the reference cdf.

    Returns
    -------
    value, std_err
        For means of i.i.d. terms the delete-one jackknife error reduces to
        ``sd / sqrt(n)``, which is what is returned; ``ks`` uses a 20-block
        jackknife.
    """
    x = np.asarray(samples).ravel()
    x = x.astype(complex if np.iscomplexobj(x) else float)
    if np.iscomplexobj(x) and kind != "mean":
        raise ValueError(f"{kind} needs real samples")
    n = x.size
    if n == 0:
        raise ValueError("no samples")

    def mean_se(v):
        if n < 2:
            return v.mean(), 0.0
        se = math.sqrt((np.var(v.real, ddof=1) + np.var(np.imag(v), ddof=1)) / n)
        return v.mean(), se

    if kind == "ecf":
        if arg == 0:
            return 1.0 + 0.0j, 0.0
        return mean_se(np.exp(1j * arg * x))
    if kind == "mgf":
        return mean_se(np.exp(arg * x))
    if kind == "mean":
        return mean_se(x)
    if kind == "kde":
        sd = np.std(x, ddof=1)
        iqr = np.subtract(*np.percentile(x, [75, 25]))
        spread = min(sd, iqr / 1.34) if iqr > 0 else sd
        h = 0.9 * spread * n ** (-0.2)
        if not h > 0:
            raise ValueError("degenerate sample: KDE bandwidth is zero")
        return mean_se(stats.norm.pdf((arg - x) / h) / h)
    if kind == "ks":

        def ks(v):
            v = np.sort(v)
            m = v.size
            cdf = np.asarray(arg(v))
            return max(np.max(np.arange(1, m + 1) / m - cdf), np.max(cdf - np.arange(m) / m))

        return _jackknife_blocks(x, ks)
    raise ValueError(f"unknown estimator {kind!r}")
