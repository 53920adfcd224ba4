"""Acceptance criteria, one test each; every test records one PASS/FAIL line."""

import dataclasses
import math
import time

import numpy as np
from scipy import special

from dpmeans.charfn import joint_stieltjes, mean_charfn, variance_mgf
from dpmeans.gamma_mean import gamma_mean_density
from dpmeans.mc import McConfig, estimators, sample_dirichlet_weights, sample_mean_and_variance
from dpmeans.mean_distribution import density_grid, mean_density
from dpmeans.measure import Cauchy, Discrete, truncate
from dpmeans.quadrature import DEFAULT_CONFIG
from dpmeans.suites import (
    gamma_ks,
    panel,
    suite_lauricella,
    suite_levy,
    suite_mk,
    suite_symmetry,
    variance_oracle,
)

LINES = []


def record(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}  ({detail})"
    LINES.append(line)
    print(line, flush=True)
    assert ok, line


def record_checks(number, title, checks):
    bad = [c.line() for c in checks if not c.passed]
    worst = max((c.residual for c in checks if not c.negative_control), default=0.0)
    record(number, title, not bad, f"{len(checks)} checks, max residual {worst:.2e}" + ("; " + " | ".join(bad) if bad else ""))


def kummer(a, b, z):
    total, term, n = 0j, 1 + 0j, 0
    while True:
        total += term
        term *= (a + n) / (b + n) * z / (n + 1)
        n += 1
        if abs(term) < 1e-18 * abs(total) and n > abs(z):
            return total


def beta_pdf(x, p, q):
    return np.exp(special.xlogy(p - 1, x) + special.xlog1py(q - 1, -x) - special.betaln(p, q))


def test_criterion_01_cauchy_fixed_point():
    worst, slowest = 0.0, 0.0
    for theta, sigma in [(0.0, 1.0), (2.0, 0.5)]:
        t0 = time.perf_counter()
        grid = np.linspace(theta - 5 * sigma, theta + 5 * sigma, 21)
        m = density_grid(Cauchy(theta, sigma), grid).density
        slowest = max(slowest, time.perf_counter() - t0)
        ref = sigma / (math.pi * (1 + sigma ** 2 * (grid - theta) ** 2))
        worst = max(worst, float(np.max(np.abs(m - ref))))
    record(1, "Cauchy fixed point", worst <= 1e-4 and slowest <= 60, f"max err {worst:.2e}, slowest case {slowest:.1f} s")


def test_criterion_02_beta_oracle():
    x = np.linspace(0.05, 0.95, 181)
    worst = 0.0
    for a, b in [(2, 1), (3, 1.5), (1, 0.5), (0.8, 0.4)]:
        m = density_grid(Discrete([(1.0, b), (0.0, a - b)]), x).density
        worst = max(worst, float(np.max(np.abs(m - beta_pdf(x, b, a - b)))))
    record(2, "Beta oracle in all three regimes", worst <= 1e-3, f"sup err {worst:.2e}")


def test_criterion_03_markov_krein():
    record_checks(3, "Markov-Krein identity on the panel", suite_mk(tol=1e-5))


def test_criterion_04_lauricella():
    record_checks(4, "order-c identity, c<a, c>a and c=a", suite_lauricella(tol=1e-5))


def test_criterion_05_charfn():
    alpha = Discrete([(1.0, 1.5), (0.0, 0.5)])
    e1 = max(abs(mean_charfn(t, alpha).value - kummer(1.5, 2.0, 1j * t)) for t in (0.5, 1.0, 2.0, 5.0))
    e2 = max(abs(mean_charfn(t, Cauchy(0.0, 1.0)).value - math.exp(-t)) for t in (0.5, 1.0))
    record(5, "charfn vs Kummer and Cauchy", e1 <= 1e-5 and e2 <= 1e-3, f"Kummer err {e1:.2e}, Cauchy err {e2:.2e}")


def test_criterion_06_gamma_density():
    x = np.linspace(0.1, 8.0, 400)[1:-1]
    q = np.array([gamma_mean_density(v, Discrete([(1.0, 2.0)]))[0] for v in x])
    e = float(np.max(np.abs(q - x * np.exp(-x))))
    ks, _ = gamma_ks(Discrete([(1.0, 1.0), (2.0, 1.0)]))
    record(6, "gamma-mean density", e <= 1e-5 and ks <= 0.01, f"Gamma(2) err {e:.2e}, KS {ks:.4f}")


def test_criterion_07_levy():
    record_checks(7, "Levy-Khintchine reconstruction", suite_levy(tol=1e-5))


def test_criterion_08_variance_mgf():
    alpha = Discrete([(1.0, 1.0), (0.0, 1.0)])
    e = max(abs(variance_mgf(t, alpha) - variance_oracle(t)) for t in (0.5, 1.0, 2.0))
    v = [variance_mgf(t, alpha) for t in np.linspace(0.0, 4.0, 9)]
    mono = all(b <= a for a, b in zip(v, v[1:]))
    _, var = sample_mean_and_variance(alpha, McConfig(n_samples=100_000, seed=0))
    z = max(abs(variance_mgf(t, alpha) - estimators(-var, "mgf", t)[0]) / estimators(-var, "mgf", t)[1] for t in (0.5, 1.0, 2.0))
    ok = e <= 1e-4 and mono and v[0] == 1.0 and z <= 3
    record(8, "variance MGF", ok, f"oracle err {e:.2e}, monotone {mono}, value at 0 {v[0]!r}, MC z {z:.2f}")


def test_criterion_09_symmetry():
    record_checks(9, "symmetry with asymmetric control", suite_symmetry(tol_m=1e-4, tol_im=1e-5))


def test_criterion_10_joint():
    x = np.array([-1.0, 1.0, 2.0])
    w = sample_dirichlet_weights([1.0, 1.0, 1.0], McConfig(n_samples=100_000, seed=0))
    v, se = estimators((1 + 1j * (0.4 * (w @ x) - 0.2 * (w @ x ** 2))) ** -3, "mean")
    got = joint_stieltjes([0.4, -0.2], [lambda y: y, lambda y: y * y], Discrete(list(zip(x, [1.0, 1.0, 1.0]))), 3.0)
    z = abs(got - v) / se
    record(10, "joint transform vs Dirichlet average", z <= 3, f"z {z:.2f}")


def test_criterion_11_engine_invariants():
    t0 = time.perf_counter()
    cfg2 = dataclasses.replace(DEFAULT_CONFIG, eps_schedule=tuple(0.6 * e for e in DEFAULT_CONFIG.eps_schedule))
    points = {"two-point": [0.2, 0.5, 0.8], "three-point": [-0.4, 0.9, 1.4], "cauchy": [0.0, 1.3], "truncated-gaussian": [-1.2, 0.0, 1.2]}
    bad, n = [], 0
    for key, alpha in panel().items():
        bounded = alpha if np.isfinite(alpha.hull[1]) else truncate(alpha, 20.0)
        lo, hi = bounded.hull
        for t in (0.5, 2.0):
            if bounded.total_mass > 1:
                r1 = mean_charfn(t, bounded, method="pv-line", gamma=1.0)
                r2 = mean_charfn(t, bounded, method="pv-line", gamma=2.0)
                n += 1
                if abs(r1.value - r2.value) > r1.err_est + r2.err_est:
                    bad.append(f"{key} gamma t={t}")
            c = max(1.0, 0.1 * abs(t) * (hi - lo))
            r1 = mean_charfn(t, bounded, method="loop-contour")
            r2 = mean_charfn(t, bounded, method="loop-contour", clearance=c / 2, right=0.5)
            n += 1
            if abs(r1.value - r2.value) > r1.err_est + r2.err_est:
                bad.append(f"{key} loop t={t}")
        for xi in points[key]:
            d1, e1 = mean_density(alpha, xi)
            d2, e2 = mean_density(alpha, xi, cfg2)
            n += 1
            if abs(d1 - d2) > e1 + e2:
                bad.append(f"{key} eps xi={xi}")
    record(11, "engine invariants", not bad, f"{n} comparisons, {time.perf_counter() - t0:.1f} s" + (", failing: " + ", ".join(bad) if bad else ""))


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
