"""Command-line entry point.

Subcommands::

    heisenlab run <scenario.json> [--out-dir DIR] [--no-plots] [--basis-levels N]
    heisenlab verify [--config FILE] [--basis-levels N] [--interior-fraction F]
                     [--tolerance T] [--seed S] [--out-dir DIR] [--no-report]
    heisenlab plot <report.json> [--out-dir DIR]

Exit codes: 0 success, 1 identity-check failure, 2 usage or configuration
error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .scenarios import BUILTIN_SCENARIOS, ScenarioError, load_builtin_scenario, parse_scenario
from .verify import VerifyConfig, report_to_json, run_all


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heisenlab",
        description="Operator equations of motion vs classical dynamics, at machine precision.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario file (or a builtin scenario by name)")
    run_p.add_argument(
        "scenario",
        help=f"path to a scenario JSON file, or one of the builtins: {', '.join(BUILTIN_SCENARIOS)}",
    )
    run_p.add_argument("--out-dir", default="out", help="output directory (default: ./out)")
    run_p.add_argument("--no-plots", action="store_true", help="skip plot rendering")
    run_p.add_argument(
        "--basis-levels", type=int, default=None, help="override the scenario's basis n_levels"
    )

    verify_p = sub.add_parser("verify", help="run the operator-identity verification suite")
    verify_p.add_argument(
        "--config",
        default=None,
        help="JSON file with suite-configuration overrides (same field names as the report's config block)",
    )
    verify_p.add_argument("--basis-levels", type=int, default=None, help="n_levels for 1-dof checks")
    verify_p.add_argument(
        "--pair-levels", type=int, default=None, help="n_levels per dof for 2-dof checks"
    )
    verify_p.add_argument(
        "--interior-fraction", type=float, default=None, help="interior block fraction (default 0.5)"
    )
    verify_p.add_argument(
        "--tolerance", type=float, default=None, help="override every check tolerance"
    )
    verify_p.add_argument("--seed", type=int, default=None, help="seed for randomized Hamiltonians")
    verify_p.add_argument(
        "--n-random", type=int, default=None, help="number of randomized Hamiltonians (default 20)"
    )
    verify_p.add_argument("--out-dir", default="out", help="where to write the JSON report")
    verify_p.add_argument("--no-report", action="store_true", help="print results only")

    plot_p = sub.add_parser("plot", help="re-render plots from a run report and its CSV")
    plot_p.add_argument("report", help="path to a *_report.json produced by `run`")
    plot_p.add_argument("--out-dir", default=None, help="plot directory (default: next to the report)")
    return parser


def _cmd_run(args) -> int:
    from .runner import run

    if os.path.exists(args.scenario):
        scenario = parse_scenario(args.scenario)
    elif args.scenario in BUILTIN_SCENARIOS:
        scenario = load_builtin_scenario(args.scenario)
    else:
        raise ScenarioError("scenario", f"no such file or builtin scenario: {args.scenario!r}")
    if args.basis_levels is not None:
        raw = scenario.to_json_dict()
        raw["basis"]["n_levels"] = args.basis_levels
        from .scenarios import parse_scenario_dict

        scenario = parse_scenario_dict(raw, source=args.scenario)
    report = run(scenario, args.out_dir, make_plots=not args.no_plots)
    print(f"scenario {scenario.name}: max |<q> - q_cl| = {report.divergence['max_abs_gap']:.3e}")
    print(f"linear-exact scenario: {report.linear_exactness}")
    for name in ("csv", "report"):
        print(f"wrote {os.path.join(args.out_dir, report.outputs[name])}")
    for plot_name in report.outputs["plots"]:
        print(f"wrote {os.path.join(args.out_dir, plot_name)}")
    if report.check_summary is not None and not report.check_summary["all_passed"]:
        print(f"identity checks FAILED: {report.check_summary}", file=sys.stderr)
        return 1
    return 0


def _cmd_verify(args) -> int:
    cfg = VerifyConfig()
    if args.config is not None:
        with open(args.config) as fh:
            file_overrides = json.load(fh)
        if not isinstance(file_overrides, dict):
            raise ScenarioError(args.config, "expected a JSON object of config fields")
        known = {f.name for f in dataclasses.fields(VerifyConfig)}
        unknown = set(file_overrides) - known
        if unknown:
            raise ScenarioError(args.config, f"unknown config key(s) {sorted(unknown)}")
        if "e_field" in file_overrides:
            file_overrides["e_field"] = tuple(file_overrides["e_field"])
        cfg = dataclasses.replace(cfg, **file_overrides)
    overrides = {}
    if args.basis_levels is not None:
        overrides["n_levels"] = args.basis_levels
    if args.pair_levels is not None:
        overrides["n_levels_pair"] = args.pair_levels
    if args.interior_fraction is not None:
        if not 0.0 < args.interior_fraction <= 1.0:
            raise ScenarioError("--interior-fraction", "must lie in (0, 1]")
        overrides["interior_fraction"] = args.interior_fraction
    if args.tolerance is not None:
        overrides["tolerance_override"] = args.tolerance
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.n_random is not None:
        overrides["n_random"] = args.n_random
    cfg = dataclasses.replace(cfg, **overrides)
    results, summary = run_all(cfg)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name}: error {result.measured_error:.3e} (tol {result.tolerance:.1e})")
    print(
        f"{summary['n_passed']}/{summary['n_checks']} identity checks passed"
        + ("" if summary["all_passed"] else f", {summary['n_failed']} FAILED")
    )
    if not args.no_report:
        os.makedirs(args.out_dir, exist_ok=True)
        path = os.path.join(args.out_dir, "verify_report.json")
        from .runner import _atomic_write_text

        _atomic_write_text(path, report_to_json(cfg, results))
        print(f"wrote {path}")
    return 0 if summary["all_passed"] else 1


def _cmd_plot(args) -> int:
    from .plots import emit_plots
    from .timeseries import TimeSeries

    with open(args.report) as fh:
        report = json.load(fh)
    report_dir = os.path.dirname(os.path.abspath(args.report))
    csv_path = os.path.join(report_dir, report["outputs"]["csv"])
    if not os.path.exists(csv_path):
        raise ScenarioError("report.outputs.csv", f"trajectory CSV not found at {csv_path}")
    ts = TimeSeries.from_csv(csv_path)

    class _View:
        def __init__(self, doc):
            self.scenario = doc["scenario"]
            self.divergence = doc["divergence"]

    out_dir = args.out_dir or report_dir
    os.makedirs(out_dir, exist_ok=True)
    for path in emit_plots(_View(report), ts, out_dir):
        print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_plot(args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
