"""Command-line entry point.

Two verbs:

  bergmanlab run <scenario.json> [...]   execute scenario files
  bergmanlab battery                     run the seeded random battery

Common flags select the output directory, report format, worker count for
scenario execution, and a uniform tolerance multiplier for exploratory
runs.  The exit status is 0 when every executed check passes, 1 when any
check fails, and 2 on configuration or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .battery import SizeBounds, max_principle_search, run_battery
from .errors import (
    InvalidConfigurationError,
    InvalidMeasureError,
    InvalidScenarioError,
    UnsupportedWeightError,
)
from .scenarios import emit_report, load_scenario_file, run_scenario

EXIT_GREEN = 0
EXIT_RED = 1
EXIT_CONFIG = 2

_CONFIG_ERRORS = (
    InvalidScenarioError,
    InvalidConfigurationError,
    InvalidMeasureError,
    UnsupportedWeightError,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bergmanlab",
        description="Kernel laboratory: scenario checks and random batteries.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--out",
        default="reports",
        help="directory for report artifacts (default: reports)",
    )
    common.add_argument(
        "--format",
        choices=("csv", "json"),
        default="csv",
        help="report format (default: csv)",
    )
    common.add_argument(
        "--workers",
        type=int,
        default=1,
        help="parallel scenario executions (default: 1)",
    )
    common.add_argument(
        "--tol-scale",
        type=float,
        default=1.0,
        help="uniform multiplier on check tolerances (default: 1)",
    )

    run_p = sub.add_parser(
        "run", parents=[common], help="execute one or more scenario files"
    )
    run_p.add_argument("files", nargs="+", help="scenario JSON files")

    bat_p = sub.add_parser(
        "battery", parents=[common], help="run the seeded random battery"
    )
    bat_p.add_argument("--n", type=int, default=200, help="instances (default 200)")
    bat_p.add_argument("--seed", type=int, default=0, help="rng seed (default 0)")
    bat_p.add_argument(
        "--max-principle",
        type=int,
        default=0,
        metavar="N",
        help="also run the maximum-principle search over N instances",
    )
    return parser


def _run_verb(args) -> int:
    try:
        configs = [load_scenario_file(path) for path in args.files]
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seen = set()
    for config in configs:
        if config.scenario_id in seen:
            print(
                f"error: duplicate scenario id {config.scenario_id!r}",
                file=sys.stderr,
            )
            return EXIT_CONFIG
        seen.add(config.scenario_id)

    try:
        if args.workers > 1:
            with ThreadPoolExecutor(max_workers=args.workers) as pool:
                reports = list(
                    pool.map(lambda c: run_scenario(c, args.tol_scale), configs)
                )
        else:
            reports = [run_scenario(c, args.tol_scale) for c in configs]
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    written = emit_report(
        reports, args.out, format=args.format, extra={"tol_scale": args.tol_scale}
    )
    for report in reports:
        for check in report.results:
            mark = "ok" if check.passed else "FAIL"
            print(f"{report.scenario_id}: {check.name} {mark}")
    green = all(r.green for r in reports)
    print(f"{'green' if green else 'red'}; reports in {args.out}")
    for path in written:
        print(f"  {path}")
    return EXIT_GREEN if green else EXIT_RED


def _battery_verb(args) -> int:
    if args.n < 1:
        print("error: --n must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    dump_dir = os.path.join(args.out, "failures")
    report = run_battery(
        n_instances=args.n,
        seed=args.seed,
        size_bounds=SizeBounds(),
        dump_dir=dump_dir,
        tol_scale=args.tol_scale,
    )
    for line in report.summary_lines():
        print(line)
    extra = {
        "battery": {
            "n_instances": report.n_instances,
            "seed": report.seed,
            "tol_scale": args.tol_scale,
            "worst_trace_error": report.worst_trace_error,
            "worst_reproducing_residual": report.worst_reproducing_residual,
            "worst_comparison_deficit": report.worst_comparison_deficit,
            "worst_three_form_dev": report.worst_three_form_dev,
            "min_sign_split": report.min_sign_split,
            "worst_fd_match_ratio": report.worst_fd_match_ratio,
            "worst_monotonicity_drop": report.worst_monotonicity_drop,
            "worst_endpoint_dev": report.worst_endpoint_dev,
            "bound_violations": report.bound_violations,
            "sandwich_failures": report.sandwich_failures,
            "order_slope": report.order_slope,
            "failing_instances": report.failures,
            "failure_dumps": report.failure_dumps,
            "elapsed_seconds": report.elapsed_seconds,
        }
    }
    green = report.all_green

    if args.max_principle > 0:
        search = max_principle_search(args.max_principle, seed=args.seed)
        print(
            f"max principle search: {search.n_instances} instances, "
            f"premises-fail {search.premises_fail}, "
            f"conclusion-holds {search.conclusion_holds}, "
            f"counterexamples {len(search.counterexamples)}"
        )
        extra["max_principle_search"] = {
            "n_instances": search.n_instances,
            "seed": search.seed,
            "premises_fail": search.premises_fail,
            "conclusion_holds": search.conclusion_holds,
            "counterexamples": search.counterexamples,
            "elapsed_seconds": search.elapsed_seconds,
        }
        green = green and not search.found_counterexample

    written = emit_report([], args.out, format=args.format, extra=extra)
    print(f"{'green' if green else 'red'}; reports in {args.out}")
    for path in written:
        print(f"  {path}")
    return EXIT_GREEN if green else EXIT_RED


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.verb == "run":
        return _run_verb(args)
    return _battery_verb(args)


if __name__ == "__main__":
    sys.exit(main())
