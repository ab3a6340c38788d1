"""Command-line harness: sieves, error terms, convolutions, moments, fits,
and the reproducible acceptance report.

Subcommands
-----------
sieve     build (or load) a persistent sequence cache and print a spot value
errterm   CSV `x,u` of an arithmetic error term on a geometric grid
convolve  CSV `x,value,err_est` of a (possibly iterated) self-convolution
moments   CSV `T,I,E,E2cum` from the critical-line second-moment table
fit       growth-law fit (theta, D) of a mean square over a window
verify    run an acceptance suite and write the report CSV

All floating output uses 17 significant digits so reports round-trip
losslessly; identical configuration yields byte-identical output.  The
``--threads`` flag is accepted for interface compatibility, but every
computation is deterministic and single-threaded.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .arith import (
    SIEVE_CAP,
    SequenceCache,
    abelian_error_series,
    cache_path,
    checksum_ok,
    divisor_error_series,
    load_cache,
    rankin_coeffs,
    rs_error_series,
    rs_fit_C,
    save_cache,
    sieve_abelian,
    sieve_divisor,
    sieve_divisor3,
    tau_series,
)
from .analysis import fit_theta_D, mean_square
from .convolve import iterate_convolve, self_convolve
from .errors import CacheFormatError, ConvolabError, DomainError, RangeError
from .numerics import DEFAULT_QUAD, QuadratureSpec
from .verify import run_growth_checks, run_identity_checks
from .zetaline import T_CAP, get_moment_table

CONFIG_KEYS = ("cache_dir", "t_cap", "n_cap", "tol_abs", "tol_rel", "report_path")

SIEVE_KINDS = ("divisor", "divisor3", "abelian", "tau", "rankin")
ERRTERM_KINDS = ("divisor", "abelian", "rs")

# identity-tier caches are small and always persisted; larger builds stay
# in memory unless the user sieves them explicitly
VERIFY_N = 10_000
VERIFY_ABELIAN_N = 10_000_000
VERIFY_T = 4000.0


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration: flags > CONVOLAB_CACHE > config file > defaults."""

    cache_dir: Path
    t_cap: float = T_CAP
    n_cap: int = SIEVE_CAP
    tolerances: QuadratureSpec = field(default_factory=lambda: DEFAULT_QUAD)
    report_path: Path = Path("report.csv")

    def __post_init__(self):
        if self.t_cap <= 0 or self.n_cap <= 0:
            raise DomainError("caps must be positive")
        self.cache_dir.mkdir(parents=True, exist_ok=True)


def load_config_file(path: Path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` comments; unknown keys are errors."""
    out: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line is not key = value: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise DomainError(f"unknown config key {key!r} (known: {', '.join(CONFIG_KEYS)})")
        out[key] = value
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = getattr(args, "config", None)
    file_cfg = load_config_file(config) if config else {}
    cache_dir = (
        getattr(args, "cache_dir", None)
        or os.environ.get("CONVOLAB_CACHE")
        or file_cfg.get("cache_dir")
        or "cache"
    )
    tol_abs = getattr(args, "tol_abs", None)
    tol_rel = getattr(args, "tol_rel", None)
    if tol_abs is None:
        tol_abs = float(file_cfg.get("tol_abs", DEFAULT_QUAD.abs_tol))
    if tol_rel is None:
        tol_rel = float(file_cfg.get("tol_rel", DEFAULT_QUAD.rel_tol))
    report = getattr(args, "report", None) or file_cfg.get("report_path") or "report.csv"
    return RunConfig(
        cache_dir=Path(cache_dir),
        t_cap=min(float(file_cfg.get("t_cap", T_CAP)), T_CAP),
        n_cap=min(int(float(file_cfg.get("n_cap", SIEVE_CAP))), SIEVE_CAP),
        tolerances=QuadratureSpec(abs_tol=tol_abs, rel_tol=tol_rel),
        report_path=Path(report),
    )


def _build(kind: str, n: int, force: bool, cfg: RunConfig) -> SequenceCache:
    if kind == "divisor":
        return sieve_divisor(n)
    if kind == "divisor3":
        return sieve_divisor3(n)
    if kind == "abelian":
        return sieve_abelian(n)
    if kind == "tau":
        return tau_series(n, cap=None) if force else tau_series(n)
    if kind == "rankin":
        return rankin_coeffs(n, ensure_cache("tau", n, cfg, force=force))
    raise DomainError(f"unknown sieve kind {kind!r}")


def ensure_cache(
    kind: str, n: int, cfg: RunConfig, force: bool = False, persist: bool = True
) -> SequenceCache:
    """Load the cache file if present (checksum verified), else build it."""
    if n > cfg.n_cap:
        raise RangeError(f"n = {n} beyond the configured cap {cfg.n_cap}")
    path = cache_path(cfg.cache_dir, kind, n)
    if path.exists():
        return load_cache(path)
    cache = _build(kind, n, force, cfg)
    if persist:
        save_cache(cache, path)
    return cache


def _fmt(v) -> str:
    return f"{float(v):.17g}"


def _write_rows(out_path: str | None, header: str, rows) -> None:
    lines = [header] + [",".join(_fmt(c) for c in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_sieve(args: argparse.Namespace, cfg: RunConfig) -> int:
    path = cache_path(cfg.cache_dir, args.kind, args.n)
    if path.exists():
        cache = load_cache(path)
        print(f"cache hit: {path} (checksum ok)")
    else:
        cache = ensure_cache(args.kind, args.n, cfg, force=args.force)
        print(f"wrote {path}")
    print(f"{args.kind}({args.n}) = {cache.value(args.n)}")
    return 0


def _error_series(kind: str, n: int, cfg: RunConfig):
    if kind == "divisor":
        return divisor_error_series(ensure_cache("divisor", n, cfg))
    if kind == "abelian":
        return abelian_error_series(ensure_cache("abelian", n, cfg, persist=n <= 1_000_000))
    if kind == "rs":
        if n < 1015:
            raise DomainError("rs error term needs x-hi >= 1015 to fit its mean value")
        cache = ensure_cache("rankin", n, cfg)
        return rs_error_series(rs_fit_C(cache, (1e3, float(n))))
    raise DomainError(f"unknown error-term kind {kind!r}")


def cmd_errterm(args: argparse.Namespace, cfg: RunConfig) -> int:
    series = _error_series(args.kind, int(math.ceil(args.x_hi)), cfg)
    xs = np.geomspace(args.x_lo, args.x_hi, args.points)
    _write_rows(args.out, "x,u", ((x, series.evaluator(float(x))) for x in xs))
    return 0


_F_SPECS = {
    "log": lambda _: math.log,
    "one": lambda _: (lambda y: 1.0),
    "power": lambda ns: (lambda y, r=ns.rho: y**r),
    "logpow": lambda ns: (lambda y, a=ns.alpha: math.log(y) ** a),
}


def cmd_convolve(args: argparse.Namespace, cfg: RunConfig) -> int:
    f = _F_SPECS[args.f](args)
    xs = np.geomspace(args.x_lo, args.x_hi, args.points)
    rows = []
    for x in xs:
        if args.iterate > 1:
            res = iterate_convolve(f, args.iterate, args.a, float(x), cfg.tolerances)
        else:
            res = self_convolve(f, args.a, float(x), cfg.tolerances)
        rows.append((x, res.value, res.err_est))
    _write_rows(args.out, "x,value,err_est", rows)
    return 0


def cmd_moments(args: argparse.Namespace, cfg: RunConfig) -> int:
    if args.t_hi > cfg.t_cap:
        raise RangeError(f"t-hi = {args.t_hi} beyond the configured cap {cfg.t_cap}")
    table = get_moment_table(args.t_hi)
    rows = []
    for t in np.linspace(args.t_lo, args.t_hi, args.points):
        idx = int(round(t / table.step))
        rows.append(
            (table.edges[idx], table.I[idx], table.E[idx], table.e2_cumulative[idx])
        )
    _write_rows(args.out, "T,I,E,E2cum", rows)
    return 0


def cmd_fit(args: argparse.Namespace, cfg: RunConfig) -> int:
    series = _error_series(args.kind, int(math.ceil(args.x_hi)), cfg)
    xs = np.geomspace(args.x_lo, args.x_hi, args.points)
    fit = fit_theta_D([(float(x), mean_square(series, float(x))) for x in xs])
    print(f"kind = {args.kind}")
    print(f"theta = {_fmt(fit.theta)}")
    print(f"D = {_fmt(fit.D)}")
    print(f"slope_stderr = {_fmt(fit.slope_stderr)}")
    print(f"window = [{_fmt(fit.window[0])}, {_fmt(fit.window[1])}]")
    print(f"n_samples = {fit.n_samples}")
    return 0


def _integrity_sweep(cfg: RunConfig) -> None:
    for path in sorted(cfg.cache_dir.glob("*.bin")):
        if not checksum_ok(path):
            raise CacheFormatError(f"checksum mismatch for {path}")


def cmd_verify(args: argparse.Namespace, cfg: RunConfig) -> int:
    _integrity_sweep(cfg)
    rows = []
    if args.suite in ("identities", "all"):
        caches = {kind: ensure_cache(kind, VERIFY_N, cfg) for kind in SIEVE_KINDS}
        rows.extend(run_identity_checks(caches))
    if args.suite in ("growth", "all"):
        table = get_moment_table(min(VERIFY_T, cfg.t_cap))
        abelian = ensure_cache("abelian", VERIFY_ABELIAN_N, cfg, persist=False)
        rankin = ensure_cache("rankin", VERIFY_N, cfg)
        ctx = rs_fit_C(rankin, (1e3, float(VERIFY_N)))
        rows.extend(run_growth_checks(table, abelian, ctx))
    lines = ["check_id,anchor,observed,expected,status"]
    for row in rows:
        lines.append(
            f"{row.check_id},{row.anchor},{_fmt(row.observed)},{row.expected},{row.status}"
        )
        print(f"{row.check_id:18s} {row.status:9s} observed={_fmt(row.observed)}")
    cfg.report_path.parent.mkdir(parents=True, exist_ok=True)
    cfg.report_path.write_text("\n".join(lines) + "\n")
    print(f"report written to {cfg.report_path}")
    return 0 if all(row.status != "fail" for row in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted both before and after the subcommand; the
    # SUPPRESS default keeps the subparser copy from clobbering the value
    # parsed at the top level
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument(
        "--cache-dir", default=argparse.SUPPRESS, help="cache directory (default: ./cache)"
    )
    shared.add_argument(
        "--config", type=Path, default=argparse.SUPPRESS, help="flat key = value config file"
    )
    shared.add_argument(
        "--threads",
        type=int,
        default=argparse.SUPPRESS,
        help="accepted for compatibility; execution is single-threaded",
    )
    shared.add_argument(
        "--tol-abs", type=float, default=argparse.SUPPRESS, help="absolute quadrature tolerance"
    )
    shared.add_argument(
        "--tol-rel", type=float, default=argparse.SUPPRESS, help="relative quadrature tolerance"
    )

    parser = argparse.ArgumentParser(
        prog="convolab",
        description="numerical laboratory for multiplicative convolutions "
        "and number-theoretic error terms",
        parents=[shared],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="build or load a sequence cache", parents=[shared])
    p.add_argument("--kind", choices=SIEVE_KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--force", action="store_true", help="override the tau series cap")
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("errterm", help="error-term values on a geometric grid", parents=[shared])
    p.add_argument("--kind", choices=ERRTERM_KINDS, required=True)
    p.add_argument("--x-lo", type=float, required=True)
    p.add_argument("--x-hi", type=float, required=True)
    p.add_argument("--points", type=int, default=32)
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.set_defaults(func=cmd_errterm)

    p = sub.add_parser("convolve", help="self-convolution values on a grid", parents=[shared])
    p.add_argument("--f", choices=sorted(_F_SPECS), required=True)
    p.add_argument("--rho", type=float, default=1.0, help="exponent for --f power")
    p.add_argument("--alpha", type=float, default=1.0, help="power for --f logpow")
    p.add_argument("--a", type=float, default=1.0, help="lower convolution limit")
    p.add_argument("--x-lo", type=float, required=True)
    p.add_argument("--x-hi", type=float, required=True)
    p.add_argument("--points", type=int, default=16)
    p.add_argument("--iterate", type=int, default=1, help="iteration depth k")
    p.add_argument("--out")
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("moments", help="second-moment table values", parents=[shared])
    p.add_argument("--t-lo", type=float, default=0.0)
    p.add_argument("--t-hi", type=float, required=True)
    p.add_argument("--points", type=int, default=32)
    p.add_argument("--out")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("fit", help="growth-law fit of an error-term mean square", parents=[shared])
    p.add_argument("--kind", choices=ERRTERM_KINDS, required=True)
    p.add_argument("--x-lo", type=float, required=True)
    p.add_argument("--x-hi", type=float, required=True)
    p.add_argument("--points", type=int, default=16)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="run acceptance checks and write the report", parents=[shared])
    p.add_argument("--suite", choices=("identities", "growth", "all"), default="all")
    p.add_argument("--report", help="report CSV path (default: report.csv)")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return args.func(args, cfg)
    except ConvolabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
