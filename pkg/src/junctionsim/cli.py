"""Command-line front end.

    junctionsim run SCENARIO --controller {static,adaptive} -o result.csv [--seed N] [--trace]
    junctionsim compare SCENARIO -o OUTDIR [--replications N] [--seed N] [--trace]
    junctionsim suite -o OUTDIR [--replications N] [--workers N]
    junctionsim validate SCENARIO

Exit codes: 0 success, 2 usage error, 3 scenario/config error, 4 run aborted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .experiment import (
    RunAborted,
    run_comparison,
    run_simulation,
    write_report,
    write_runs_csv,
)
from .scenario import ConfigError, dump_scenario, parse_scenario
from .signals import ControllerKind
from .suite import scenario_suite_paper
from .trace import EventTrace

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_RUNTIME = 4

log = logging.getLogger("junctionsim")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="junctionsim", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one controller on one scenario")
    run.add_argument("scenario", type=Path)
    run.add_argument("--controller", required=True, choices=[k.value for k in ControllerKind])
    run.add_argument("-o", "--output", type=Path, required=True, help="CSV file for the run result")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--trace", action="store_true", help="also write OUTPUT with suffix .trace.jsonl")

    cmp_ = sub.add_parser("compare", help="static vs adaptive on one scenario")
    cmp_.add_argument("scenario", type=Path)
    cmp_.add_argument("-o", "--output", type=Path, required=True, help="output directory")
    cmp_.add_argument("--replications", type=int, default=5)
    cmp_.add_argument("--seed", type=int)
    cmp_.add_argument("--trace", action="store_true", help="write replication-0 traces for both controllers")

    suite = sub.add_parser("suite", help="run the built-in 15-scenario comparison")
    suite.add_argument("-o", "--output", type=Path, required=True, help="output directory")
    suite.add_argument("--replications", type=int, default=5)
    suite.add_argument("--workers", type=int, default=1)
    suite.add_argument("--dump-scenarios", action="store_true", help="also write each scenario as YAML")

    val = sub.add_parser("validate", help="parse and validate a scenario file")
    val.add_argument("scenario", type=Path)
    val.add_argument("--print", action="store_true", help="echo the scenario with defaults filled in")
    return p


def _load(path: Path, seed: int | None):
    s = parse_scenario(path)
    if seed is not None:
        if seed < 0:
            raise ConfigError(f"--seed must be non-negative, got {seed}")
        s = replace(s, seed=seed)
    return s


def _trace_path(output: Path) -> Path:
    return output.with_name(output.stem + ".trace.jsonl")


def _cmd_run(args) -> int:
    s = _load(args.scenario, args.seed)
    trace = EventTrace() if args.trace else None
    result = run_simulation(s, args.controller, trace=trace)
    args.output.parent.mkdir(parents=True, exist_ok=True)
    write_runs_csv([result], args.output)
    if trace is not None:
        trace.write(_trace_path(args.output))
    log.info("%s/%s: %d crossed of %d spawned", s.name, result.controller.value, result.total_crossed, result.spawned)
    return EXIT_OK


def _cmd_compare(args) -> int:
    s = _load(args.scenario, args.seed)
    if args.replications < 1:
        raise ConfigError(f"--replications must be >= 1, got {args.replications}")
    report = run_comparison([s], args.replications)
    write_report(report, args.replications, args.output)
    if args.trace:
        for kind in ControllerKind:
            trace = EventTrace()
            run_simulation(s, kind, trace=trace)
            trace.write(args.output / f"trace_{kind.value}.jsonl")
    row = report.rows[0]
    print(f"{row.scenario}: static {row.static_mean:.1f}  adaptive {row.adaptive_mean:.1f}  "
          f"improvement {row.improvement_percent:+.2f}%")
    return EXIT_OK


def _cmd_suite(args) -> int:
    if args.replications < 1:
        raise ConfigError(f"--replications must be >= 1, got {args.replications}")
    scenarios = scenario_suite_paper()
    report = run_comparison(scenarios, args.replications, workers=args.workers)
    write_report(report, args.replications, args.output)
    if args.dump_scenarios:
        sdir = args.output / "scenarios"
        sdir.mkdir(exist_ok=True)
        for s in scenarios:
            (sdir / f"{s.name}.yaml").write_text(dump_scenario(s), encoding="utf-8")
    for row in report.rows:
        print(f"{row.scenario:<28} {row.regime:<10} static {row.static_mean:7.1f}  "
              f"adaptive {row.adaptive_mean:7.1f}  {row.improvement_percent:+7.2f}%")
    for regime, mean in report.regime_means().items():
        if mean is not None:
            print(f"regime {regime:<10} mean improvement {mean:+.2f}%")
    return EXIT_OK


def _cmd_validate(args) -> int:
    s = parse_scenario(args.scenario)
    if args.print:
        sys.stdout.write(dump_scenario(s))
    else:
        print(f"{args.scenario}: ok ({s.name})")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "compare": _cmd_compare, "suite": _cmd_suite, "validate": _cmd_validate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.subcommand](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunAborted as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
