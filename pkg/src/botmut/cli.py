"""``botmut`` command line: validate, mutate, test, analyze, report."""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import analysis
from .equivalence import DEFAULT_DEPTH
from .model import DuplicateName, validate
from .mutgen import generate_mutants
from .operators import parse_operators
from .rasa import MalformedDocument, MissingDomainFile, parse_project
from .scripts import MalformedScript, load_suite

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BROKEN = 2
EXIT_BASELINE_RED = 3
EXIT_RUNNER = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def _operators(value: str):
    names = [v.strip() for v in value.split(",") if v.strip()]
    try:
        return parse_operators(names)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="botmut", description="Mutation testing for Rasa-style task-based chatbots.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="report structural problems in a project")
    v.add_argument("project")

    m = sub.add_parser("mutate", help="generate mutants")
    m.add_argument("project")
    m.add_argument("-o", "--output", required=True, help="directory for mutants and mutants.json")
    m.add_argument("--operators", type=_operators, default=None,
                   help="comma-separated operator names (default: all eleven)")
    m.add_argument("--jobs", type=_positive, default=None)

    t = sub.add_parser("test", help="run a conversation suite against one project")
    t.add_argument("project")
    t.add_argument("--suite", required=True)
    t.add_argument("--repeat", type=_positive, default=5)
    t.add_argument("--runner", default="builtin", help="builtin or exec:<command>")

    a = sub.add_parser("analyze", help="classify every mutant and write report.json")
    a.add_argument("project")
    a.add_argument("--mutants", required=True)
    a.add_argument("--suite", required=True)
    a.add_argument("--runner", default="builtin", help="builtin or exec:<command>")
    a.add_argument("--repeat", type=_positive, default=5)
    a.add_argument("--equivalence-depth", type=_positive, default=DEFAULT_DEPTH)
    a.add_argument("--jobs", type=_positive, default=None)
    a.add_argument("--drop-flaky", action="store_true",
                   help="drop scripts whose verdict varies across repetitions of the baseline")
    a.add_argument("--mark-equivalent", default="",
                   help="comma-separated mutant ids to classify as equivalent")
    a.add_argument("-o", "--output", default="report.json")
    a.add_argument("--format", choices=("table", "json"), default="table")
    a.add_argument("--timestamp", action="store_true", help="record generation time in the report")

    r = sub.add_parser("report", help="render a report.json")
    r.add_argument("report")
    r.add_argument("--format", choices=("table", "json"), default="table")
    return p


def _err(message: str) -> None:
    print(f"botmut: {message}", file=sys.stderr)


def _jobs(value: Optional[int]) -> int:
    return value if value is not None else analysis.jobs_from_env()


def _cmd_validate(args) -> int:
    report = validate(parse_project(args.project))
    for issue in report.issues:
        print(f"{issue.severity:7} {issue.code:28} {issue.location}: {issue.message}")
    if not report.deployable:
        _err(f"{len(report.broken)} broken issue(s)")
        return EXIT_BROKEN
    print(f"ok ({len(report.issues)} warning(s))")
    return EXIT_OK


def _cmd_mutate(args) -> int:
    manifest = generate_mutants(args.project, args.operators, args.output, jobs=_jobs(args.jobs))
    print(f"{len(manifest)} mutants generated")
    split = manifest.by_category()
    for cat in ("ChatbotStructure", "Flow"):
        print(f"  {cat}: {split.get(cat, 0)}")
    return EXIT_OK


def _cmd_test(args) -> int:
    runner = analysis.make_runner(args.runner)
    if args.runner == "builtin":
        load_suite(args.suite)  # surface MalformedScript early
    result = runner.run(Path(args.project), Path(args.suite), args.repeat)
    for name, runs in result.results:
        failure = next((r for r in runs if not r.passed), None)
        print(f"{name}: {'pass' if failure is None else failure.summary()}")
    print(f"{len(result.results) - len(result.failing)}/{len(result.results)} scripts passed "
          f"({result.executions} executions)")
    return EXIT_OK if result.passed else EXIT_BASELINE_RED


def _cmd_analyze(args) -> int:
    equivalent = [x.strip() for x in args.mark_equivalent.split(",") if x.strip()]
    report = analysis.analyze(
        args.project, args.mutants, args.suite,
        runner=args.runner, repeat=args.repeat, depth=args.equivalence_depth,
        jobs=_jobs(args.jobs), drop_flaky=args.drop_flaky, equivalent=equivalent,
    )
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if args.timestamp else None
    path = analysis.write_report(report, args.output, stamp)
    print(report.table() if args.format == "table" else report.dumps(), end="")
    print(f"report written to {path}")
    return EXIT_OK


def _cmd_report(args) -> int:
    report = analysis.load_report(args.report)
    print(report.table() if args.format == "table" else report.dumps(), end="")
    return EXIT_OK


COMMANDS = {
    "validate": _cmd_validate,
    "mutate": _cmd_mutate,
    "test": _cmd_test,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except analysis.BaselineRed as exc:
        _err(str(exc))
        return EXIT_BASELINE_RED
    except analysis.RunnerFailure as exc:
        _err(str(exc))
        return EXIT_RUNNER
    except (MissingDomainFile, MalformedDocument, DuplicateName, MalformedScript,
            OSError, ValueError, KeyError) as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
