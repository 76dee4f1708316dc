#!/usr/bin/env python3
"""Command-line interface for lowdisc.

Usage:
    lowdisc analyze --disc -115147            # LowReport JSON
    lowdisc scan --lo -119 --hi -3            # origin classification counts
    lowdisc flow --disc -163 --m 32 --t-end 0.5 --oracle-check
    lowdisc plotdata --disc -115147 --t-min 0 --t-max 6
    lowdisc verify --disc -163                # self-checks
    lowdisc config                            # effective configuration
    lowdisc cache --clear                     # drop cached reports

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
Artifacts go to stdout; logs go to stderr.
"""

import argparse
import csv
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, TextIO

from .cache import ResultCache
from .config import get_cache, get_config
from .config_defaults import CACHE_DIR_ENV
from .discriminant import FundamentalDiscriminant, enumerate_fundamental
from .errors import ConfigurationError, DomainError, LowdiscError
from .heatflow import (
    FlowState,
    FlowStatus,
    diagnostics,
    drift_allowance,
    integrate,
    oracle_gaps,
    write_trajectory_csv,
)
from .models import FlowPayload, RunConfig
from .newman import analyze, build_evaluator
from .runtime import ScanRuntime, summarize
from .specfun import make_context, to_decimal_string
from .verify import run_checks
from .xi import gamma_scale, moments
from .zeros import find_zeros, target_height

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

DEFAULT_PLOT_POINTS = 601


class UsageError(LowdiscError):
    """Bad command-line input that argparse cannot catch."""


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code 1 instead of 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def print_json(data: Any, stream: Optional[TextIO] = None) -> None:
    """Byte-stable JSON: sorted keys, two-space indent, trailing newline."""
    (stream or sys.stdout).write(json.dumps(data, sort_keys=True, indent=2) + "\n")


def _parse_disc(value: Any) -> FundamentalDiscriminant:
    try:
        return FundamentalDiscriminant(int(value))
    except (TypeError, ValueError) as e:
        if isinstance(e, DomainError):
            raise
        raise UsageError(f"--disc must be a negative integer, got {value!r}") from e


def run_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from the config file overlaid with command-line flags."""
    cfg = get_config(args.config) if args.config else get_config()
    return cfg.to_run_config(
        precision=args.precision, eps=args.eps, zero_count=args.zeros, zero_height=args.zero_height,
        tol=args.tol, flow_m=args.m, t_end=args.t_end, samples=args.samples, flow_tol=args.flow_tol,
        format=args.format, cache_dir=args.cache_dir, workers=args.workers,
        scan_analyze=True if getattr(args, "analyze", False) else None,
    )


def open_cache(config: RunConfig) -> Optional[ResultCache]:
    """Cache when a directory is configured by flag, config file or environment."""
    base = config.cache_dir or os.environ.get(CACHE_DIR_ENV)
    return get_cache(base) if base else None


# ============ Commands ============

def cmd_analyze(args: argparse.Namespace) -> int:
    """Run the full pipeline for one discriminant and print its LowReport."""
    config = run_config(args)
    disc = _parse_disc(args.disc)
    cache = open_cache(config)
    text = cache.get(disc, config) if cache else None
    if text is None:
        report = analyze(disc, config)
        text = report.to_json() + "\n"
        if cache and report.error is None:
            cache.put(disc, config, text)
    payload = json.loads(text)
    if config.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["field", "value"])
        for key in sorted(payload):
            value = payload[key]
            writer.writerow([key, json.dumps(value, sort_keys=True) if isinstance(value, dict) else value])
    else:
        sys.stdout.write(text)
    return EXIT_NUMERICAL if payload.get("error") else EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    """Classify every fundamental discriminant in [lo, hi]."""
    config = run_config(args)
    discs = [d.neg_d for d in enumerate_fundamental(args.lo, args.hi)]
    with ScanRuntime(config.workers) as runtime:
        results = runtime.run(discs, config)
    cache = open_cache(config)
    if cache:
        for r in results:
            if r["report"] is not None and r["entry"].get("error") is None:
                cache.put(r["entry"]["disc"], config, r["report"] + "\n")
    summary = summarize(args.lo, args.hi, results)
    logger.info("scan of [%d, %d]: %d discriminants, %d positive local minima, %d failures",
                args.lo, args.hi, summary.total, len(summary.positive_local_min), len(summary.failures))
    if config.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["disc", "origin", "z0", "log_z_second", "lambda", "is_low", "error"])
        for e in summary.entries:
            writer.writerow([e.disc, e.origin, e.z0, e.log_z_second, e.lambda_value,
                             "" if e.is_low is None else e.is_low, e.error or ""])
    else:
        print_json(summary.model_dump(by_alias=True))
    return EXIT_OK


def _sample_times(ctx, t_end, samples: int) -> List[Any]:
    if samples == 1 or t_end == 0:
        return [t_end]
    return list(ctx.linspace(0, t_end, samples))


def cmd_flow(args: argparse.Namespace) -> int:
    """Integrate the truncated heat-flow system from the first m zeros."""
    config = run_config(args)
    disc = _parse_disc(args.disc)
    ctx = make_context(config.precision)
    m = config.flow_m
    t_end = ctx.mpf(config.t_end)
    digits = config.precision

    xi = build_evaluator(disc, config, max_x=target_height(disc.d, m + 1, ctx))
    mp = moments(xi)
    zl = find_zeros(xi, count=m + 1, tol=config.tol)
    s0 = FlowState.from_zeros(zl, m)
    tail = -mp.xi2 / (2 * mp.xi0) - zl.truncated(m).square_sum(ctx)
    rates = drift_allowance(s0, tail, zl.gammas[m], 1)

    result = integrate(s0, t_end, ctx.mpf(config.flow_tol), _sample_times(ctx, t_end, config.samples))
    diag = []
    for s in result.samples:
        d = diagnostics(s)
        diag.append({
            "t": to_decimal_string(d.t, digits), "f": to_decimal_string(d.f, digits),
            "g": to_decimal_string(d.g, digits), "g_prime": to_decimal_string(d.g_prime_fd, 12),
            "slack": to_decimal_string(d.slack, 6), "growth_bound_ok": d.growth_bound_ok,
        })
    oracle = oracle_gaps(xi, result.samples, rates) if args.oracle_check else []

    payload = FlowPayload(
        disc=disc.neg_d, m=m, t_start=to_decimal_string(s0.t, digits), t_end=to_decimal_string(t_end, digits),
        t_reached=to_decimal_string(result.final.t, digits), status=result.status.value,
        steps_accepted=result.accepted, steps_rejected=result.rejected,
        min_gap=to_decimal_string(min(s.min_gap for s in result.samples + [result.final]), digits),
        drift_allowance=[to_decimal_string(r * abs(t_end), 6) for r in rates],
        diagnostics=diag, oracle=oracle,
    )
    if args.diagnostics:
        with open(args.diagnostics, "w", encoding="utf-8") as f:
            print_json(payload.model_dump(), f)
    if args.format == "json":
        print_json(payload.model_dump())
    else:
        write_trajectory_csv(result.samples or [result.final], sys.stdout, digits)

    if result.status is FlowStatus.COLLISION:
        logger.error("flow for D=%d stopped by a collision at t=%s", disc.d, payload.t_reached)
        return EXIT_NUMERICAL
    if oracle and not all(g.ok for g in oracle):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_plotdata(args: argparse.Namespace) -> int:
    """Uniform samples of Z(t, chi) for external plotting."""
    config = run_config(args)
    disc = _parse_disc(args.disc)
    ctx = make_context(config.precision)
    lo, hi = ctx.mpf(args.t_min), ctx.mpf(args.t_max)
    if not lo <= hi or args.points < 1:
        raise UsageError("plotdata needs t_min <= t_max and at least one point")
    step = (hi - lo) / (args.points - 1) if args.points > 1 else ctx.mpf(0)
    xi = build_evaluator(disc, config, max_x=max(abs(lo), abs(hi)))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["t", "Z"])
    for x, value in xi.iter_grid(lo, step, args.points):
        writer.writerow([to_decimal_string(x, config.precision),
                         to_decimal_string(value / gamma_scale(xi, x), config.precision)])
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    """Run the self-checks and print one line per check."""
    config = run_config(args)
    disc = _parse_disc(args.disc)
    return EXIT_OK if run_checks(disc, config) else EXIT_NUMERICAL


def cmd_config(args: argparse.Namespace) -> int:
    """Print the effective configuration; --save writes the flag values to the config file."""
    config = run_config(args)
    cfg = get_config()
    if args.save:
        cfg.update({k: v for k, v in config.model_dump().items() if v != cfg.get(k)})
        cfg.save()
        logger.info("configuration saved to %s", cfg.config_file)
    data: Dict[str, Any] = config.model_dump()
    data["config_hash"] = config.config_hash()
    data["config_file"] = str(cfg.config_file)
    print_json(data)
    return EXIT_OK


def cmd_cache(args: argparse.Namespace) -> int:
    """List the cached reports, or delete them with --clear."""
    config = run_config(args)
    cache = get_cache(config.cache_dir)
    data: Dict[str, Any] = {"cache_dir": str(cache.base_dir)}
    if args.clear:
        data["removed"] = cache.clear()
    else:
        data["entries"] = cache.list_entries()
    print_json(data)
    return EXIT_OK


# ============ Parser ============

def _numeric_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="Working precision in decimal digits (17-200)")
    common.add_argument("--eps", help="Target absolute accuracy of Xi")
    common.add_argument("--zeros", type=int, help="Number of zeros to locate")
    common.add_argument("--zero-height", dest="zero_height", help="Locate zeros up to this height instead")
    common.add_argument("--tol", help="Zero bracket width")
    common.add_argument("--m", type=int, help="Zeros carried by the heat-flow system")
    common.add_argument("--t-end", dest="t_end", help="Final heat-flow time")
    common.add_argument("--samples", type=int, help="Trajectory sample count")
    common.add_argument("--flow-tol", dest="flow_tol", help="Per-step integrator tolerance")
    common.add_argument("--format", choices=["json", "csv"], help="Output format")
    common.add_argument("--cache-dir", dest="cache_dir", help=f"Report cache directory (default ${CACHE_DIR_ENV})")
    common.add_argument("--workers", type=int, help="Scan worker processes (default: all cores)")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="lowdisc",
        description="Low-lying zeros of quadratic L-functions and lower bounds for Lambda",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s analyze --disc -115147           Full report for Low's discriminant
  %(prog)s analyze --disc -163 --zeros 50   Use 50 zeros in the g(0) bound
  %(prog)s scan --lo -119 --hi -3           Count positive local minima at the origin
  %(prog)s scan --lo -400 --hi -120 --analyze --workers 4
  %(prog)s flow --disc -115147 --t-end 1 > trajectory.csv
  %(prog)s flow --disc -163 --t-end 0.5 --oracle-check --format json
  %(prog)s plotdata --disc -115147 --t-min 0 --t-max 6 > z.csv
  %(prog)s verify --disc -163
  %(prog)s config --precision 40 --save     Persist a setting
  %(prog)s cache --cache-dir reports        List cached reports
""",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument("--quiet", "-q", action="store_true", help="Warnings and errors only")
    parser.add_argument("--config", help="Config file (default ~/.lowdisc/config.json)")

    common = _numeric_flags()
    subparsers = parser.add_subparsers(dest="command", parser_class=_Parser, help="Command to run")

    # Analyze
    sub = subparsers.add_parser("analyze", parents=[common], help="LowReport for one discriminant")
    sub.add_argument("--disc", required=True, help="Negative fundamental discriminant, e.g. -163")
    sub.set_defaults(func=cmd_analyze)

    # Scan
    sub = subparsers.add_parser("scan", parents=[common], help="Classify the origin over a range")
    sub.add_argument("--lo", type=int, required=True, help="Lower end of the range (most negative)")
    sub.add_argument("--hi", type=int, required=True, help="Upper end of the range, negative")
    sub.add_argument("--analyze", action="store_true", help="Also run the full pipeline per discriminant")
    sub.set_defaults(func=cmd_scan)

    # Flow
    sub = subparsers.add_parser("flow", parents=[common], help="Heat-flow trajectory of the first m zeros")
    sub.add_argument("--disc", required=True, help="Negative fundamental discriminant")
    sub.add_argument("--oracle-check", dest="oracle_check", action="store_true",
                     help="Compare sampled positions with quadrature roots of Xi_t")
    sub.add_argument("--diagnostics", help="Write the diagnostics JSON to this file")
    sub.set_defaults(func=cmd_flow)

    # Plot data
    sub = subparsers.add_parser("plotdata", parents=[common], help="CSV samples of Z(t, chi)")
    sub.add_argument("--disc", required=True, help="Negative fundamental discriminant")
    sub.add_argument("--t-min", dest="t_min", default="0", help="Start of the t range")
    sub.add_argument("--t-max", dest="t_max", default="6", help="End of the t range")
    sub.add_argument("--points", type=int, default=DEFAULT_PLOT_POINTS, help="Number of samples")
    sub.set_defaults(func=cmd_plotdata)

    # Verify
    sub = subparsers.add_parser("verify", parents=[common], help="Self-checks for one discriminant")
    sub.add_argument("--disc", required=True, help="Negative fundamental discriminant")
    sub.set_defaults(func=cmd_verify)

    # Config
    sub = subparsers.add_parser("config", parents=[common], help="Show the effective configuration")
    sub.add_argument("--save", action="store_true", help="Write the effective values to the config file")
    sub.set_defaults(func=cmd_config)

    # Cache
    sub = subparsers.add_parser("cache", parents=[common], help="List or clear cached reports")
    sub.add_argument("--clear", action="store_true", help="Delete every cached report")
    sub.set_defaults(func=cmd_cache)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s: %(name)s: %(message)s", stream=sys.stderr, force=True)

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE

    try:
        return args.func(args)
    except (UsageError, DomainError, ConfigurationError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except LowdiscError as e:
        logger.error("%s failed: %s", args.command, e, exc_info=True)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
