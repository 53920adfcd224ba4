"""Command-line front end.

Exit codes: 0 on success, 1 on bad input or a run that could not produce
output, 2 when some grid points failed (their ``err`` column reads
``FAILED``). Floats are written with 17 significant digits.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import os
import platform
import sys
import tempfile
import time
from typing import List, Optional, Sequence

import numpy as np
import scipy

from .errors import DPMeansError
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

log = logging.getLogger("dpmeans")

FAILED = "FAILED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(v):
    if isinstance(v, str):
        return v
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "nan"
    return format(float(v), ".17g")


def _json_value(v):
    if isinstance(v, str) or v is None:
        return v
    v = float(v)
    return v if math.isfinite(v) else None


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must look like LO:HI:N, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"grid must look like LO:HI:N, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi)) or n < 1 or (n > 1 and not hi > lo):
        raise UsageError("grid needs finite LO < HI and N >= 1")
    return np.linspace(lo, hi, n)


def _parse_floats(text: str, what: str) -> List[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{what} needs finite values")
    return vals


def _load(path: Optional[str], required=True):
    from .measure import load_measure

    if path is None:
        if required:
            raise UsageError("--measure is required")
        return None, None
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    try:
        alpha = load_measure(raw.decode("utf-8"))
    except (DPMeansError, ValueError, UnicodeDecodeError) as exc:
        raise UsageError(f"{path}: {exc}") from None
    return alpha, hashlib.sha256(raw).hexdigest()


def _versions():
    from . import __version__

    return {"dpmeans": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _manifest(args, argv, digest, cfg, started, extra=None):
    m = {
        "command": ["dpmeans", *argv],
        "measure_sha256": digest,
        "cfg": {k: (list(v) if isinstance(v, tuple) else v) for k, v in dataclasses.asdict(cfg).items()},
        "versions": _versions(),
        "wall_time_s": time.time() - started,
        "threads": os.environ.get("DPMEANS_THREADS", "1"),
    }
    if extra:
        m.update(extra)
    return m


def _atomic_write(path: str, text: str):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".dpmeans-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(header: Sequence[str], rows, args, manifest):
    """Write rows as CSV (with a manifest sidecar) or JSON (manifest embedded)."""
    if args.format == "json":
        doc = {
            "columns": list(header),
            "rows": [{h: _json_value(v) for h, v in zip(header, r)} for r in rows],
            "manifest": manifest,
        }
        text = json.dumps(doc, indent=1, allow_nan=False) + "\n"
        # 17 significant digits: json.dumps already round-trips floats exactly
    else:
        lines = [",".join(header)] + [",".join(_fmt(v) for v in r) for r in rows]
        text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
        if args.format != "json" and args.verbose:
            print("# manifest: " + json.dumps(manifest), file=sys.stderr)
        return
    if args.format == "json":
        _atomic_write(args.out, text)
    else:
        _atomic_write(args.out + ".manifest.json", json.dumps(manifest, indent=1) + "\n")
        _atomic_write(args.out, text)


def _cfg(args) -> QuadratureConfig:
    return DEFAULT_CONFIG


# ---------------------------------------------------------------------------
# commands


def cmd_density(args, argv, started):
    from .mean_distribution import density_grid

    alpha, digest = _load(args.measure)
    grid = _parse_grid(args.grid)
    cfg = _cfg(args)
    tab = density_grid(alpha, grid, cfg)
    rows, failed = [], []
    for x, d, e in zip(tab.abscissae, tab.density, tab.err_est):
        ok = np.isfinite(d) and np.isfinite(e) and (args.tol is None or e <= args.tol)
        rows.append((x, d if np.isfinite(d) else float("nan"), e if ok else FAILED))
        if not ok:
            failed.append(float(x))
    extra = {
        "regime": tab.regime,
        "per_point_err": [None if not np.isfinite(e) else float(e) for e in tab.err_est],
        "failures": [{"xi": x, "message": m} for x, m in tab.failures] + [
            {"xi": x, "message": f"err_est above --tol {args.tol}"} for x in failed if x not in {f[0] for f in tab.failures}
        ],
    }
    _emit(("xi", "density", "err"), rows, args, _manifest(args, argv, digest, cfg, started, extra))
    return 2 if failed else 0


def cmd_charfn(args, argv, started):
    from .charfn import mean_charfn

    alpha, digest = _load(args.measure)
    cfg = _cfg(args)
    rows, failed = [], 0
    for t in _parse_floats(args.t, "--t"):
        try:
            r = mean_charfn(t, alpha, cfg, method=args.method)
            bad = args.tol is not None and r.err_est > args.tol
            rows.append((t, r.value.real, r.value.imag, FAILED if bad else r.err_est, r.method))
            failed += bad
        except DPMeansError as exc:
            log.warning("charfn failed at t=%g: %s", t, exc)
            rows.append((t, float("nan"), float("nan"), FAILED, "none"))
            failed += 1
    _emit(("t", "re", "im", "err", "method"), rows, args, _manifest(args, argv, digest, cfg, started))
    return 2 if failed else 0


def cmd_stieltjes(args, argv, started):
    from .identities import lauricella_stieltjes

    alpha, digest = _load(args.measure)
    cfg = _cfg(args)
    c = alpha.total_mass if args.c is None else args.c
    if not c > 0:
        raise UsageError("--c must be positive")
    rows, failed = [], 0
    for t in _parse_floats(args.t, "--t"):
        try:
            v, e = lauricella_stieltjes(t, alpha, c, cfg, return_err=True)
            rows.append((t, c, v.real, v.imag, e))
        except DPMeansError as exc:
            log.warning("transform failed at t=%g: %s", t, exc)
            rows.append((t, c, float("nan"), float("nan"), FAILED))
            failed += 1
    _emit(("t", "c", "re", "im", "err"), rows, args, _manifest(args, argv, digest, cfg, started))
    return 2 if failed else 0


def _mean_table(alpha, cfg, n=401):
    from .mean_distribution import density_grid

    lo, hi = alpha.hull
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise UsageError("the gamma command needs alpha with bounded support")
    m = 1.5 * cfg.boundary_margin * (hi - lo)
    return density_grid(alpha, np.linspace(lo + m, hi - m, n), cfg)


def cmd_gamma(args, argv, started):
    from .gamma_mean import gamma_mean_density

    alpha, digest = _load(args.measure)
    grid = _parse_grid(args.grid)
    cfg = _cfg(args)
    table = None if alpha.is_degenerate else _mean_table(alpha, cfg)
    tol = 1e-3 if args.tol is None else args.tol
    rows, failed = [], 0
    for x in grid:
        try:
            v, e = gamma_mean_density(x, alpha, table, cfg, tol=tol)
            rows.append((x, v, e))
        except (DPMeansError, ValueError) as exc:
            log.warning("gamma density failed at x=%g: %s", x, exc)
            rows.append((x, float("nan"), FAILED))
            failed += 1
    _emit(("x", "density", "err"), rows, args, _manifest(args, argv, digest, cfg, started))
    return 2 if failed else 0


def cmd_var_mgf(args, argv, started):
    from .charfn import variance_mgf

    alpha, digest = _load(args.measure)
    cfg = _cfg(args)
    rows, failed = [], 0
    for t in _parse_floats(args.t, "--t"):
        try:
            v, e = variance_mgf(t, alpha, cfg, return_err=True)
            bad = args.tol is not None and e > args.tol
            rows.append((t, v, FAILED if bad else e))
            failed += bad
        except (DPMeansError, ValueError) as exc:
            log.warning("variance transform failed at t=%g: %s", t, exc)
            rows.append((t, float("nan"), FAILED))
            failed += 1
    _emit(("t", "value", "err"), rows, args, _manifest(args, argv, digest, cfg, started))
    return 2 if failed else 0


def cmd_sample(args, argv, started):
    from .mc import RNG_ALGORITHM, McConfig, sample_mean

    alpha, digest = _load(args.measure)
    if args.n < 1:
        raise UsageError("--n must be positive")
    mc = McConfig(n_samples=args.n, seed=args.seed)
    s = sample_mean(alpha, mc)
    extra = {"seed": args.seed, "n": args.n, "chunk_size": mc.chunk_size, "rng": RNG_ALGORITHM}
    _emit(("sample",), [(v,) for v in s], args, _manifest(args, argv, digest, DEFAULT_CONFIG, started, extra))
    return 0


def cmd_verify(args, argv, started):
    from .suites import run_suite

    user = None
    if args.measure is not None:
        user, _ = _load(args.measure)
    checks = run_suite(args.suite, user, _cfg(args))
    for c in checks:
        print(c.line())
    n_bad = sum(not c.passed for c in checks)
    print(f"{len(checks) - n_bad}/{len(checks)} checks passed")
    return 0 if n_bad == 0 else 1


SUITE_NAMES = ("mk", "lauricella", "cauchy-fixed-point", "symmetry", "levy", "gamma", "var-mgf", "all")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dpmeans", description="Exact laws of Dirichlet process means from the parameter measure.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--measure", help="measure-definition JSON file")
        if out:
            sp.add_argument("--out", help="output path (default stdout)")
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--tol", type=float, default=None, help="flag points whose error estimate exceeds this")

    sp = sub.add_parser("density", help="density of the mean on a grid")
    common(sp)
    sp.add_argument("--grid", required=True, help="LO:HI:N")
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("charfn", help="characteristic function of the mean")
    common(sp)
    sp.add_argument("--t", required=True, help="comma-separated t values")
    sp.add_argument("--method", choices=("auto", "pv-line", "loop-contour"), default="auto")
    sp.set_defaults(func=cmd_charfn)

    sp = sub.add_parser("stieltjes", help="order-c transform E(1 + i t M)**-c")
    common(sp)
    sp.add_argument("--t", required=True)
    sp.add_argument("--c", type=float, default=None, help="order (default: total mass)")
    sp.set_defaults(func=cmd_stieltjes)

    sp = sub.add_parser("gamma", help="density of the gamma-process mean")
    common(sp)
    sp.add_argument("--grid", required=True, help="LO:HI:N")
    sp.set_defaults(func=cmd_gamma)

    sp = sub.add_parser("var-mgf", help="E exp(-t V) for the random variance V")
    common(sp)
    sp.add_argument("--t", required=True)
    sp.set_defaults(func=cmd_var_mgf)

    sp = sub.add_parser("sample", help="Monte Carlo draws of the mean")
    common(sp)
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("verify", help="run an identity suite")
    common(sp, out=False)
    sp.add_argument("--suite", choices=SUITE_NAMES, default="all")
    sp.set_defaults(func=cmd_verify)
    return p


_VALUE_FLAGS = ("--grid", "--t", "--c", "--tol")


def _glue_negative_values(argv):
    """``--grid -5:5:21`` -> ``--grid=-5:5:21`` so argparse does not read an option."""
    out, i = [], 0
    while i < len(argv):
        if argv[i] in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.time()
    try:
        args = build_parser().parse_args(_glue_negative_values(argv))
    except UsageError as exc:
        print(f"dpmeans: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv, started)
    except UsageError as exc:
        print(f"dpmeans: error: {exc}", file=sys.stderr)
        return 1
    except (DPMeansError, ValueError, NotImplementedError) as exc:
        print(f"dpmeans: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
