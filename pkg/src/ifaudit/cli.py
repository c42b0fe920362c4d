"""Command-line interface.

Exit codes: 0 ok, 2 validation error, 3 no scorable groups, 4 configuration
mismatch between compared reports, 5 I/O failure, 64 usage error. Every failure
prints exactly one JSON line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, replace
from pathlib import Path

from ifaudit.comparison import DEFAULT_TAU, compare_evaluations
from ifaudit.config import load_config
from ifaudit.engine import axis_sweep, run_audit
from ifaudit.errors import ConfigMismatchError, NoScorableGroupsError, ValidationError
from ifaudit.fileio import (
    curve_csv,
    emit_report,
    load_dataset,
    load_report,
    report_to_json,
    sweep_csv,
    verdicts_to_json,
    write_text,
)
from ifaudit.harness import efficiency_case_explorer

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_SCORABLE = 3
EXIT_MISMATCH = 4
EXIT_IO = 5
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(kind: str, code: int, message: str) -> int:
    line = json.dumps({"error": kind, "exit_code": code, "message": " ".join(str(message).split())})
    print(line, file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ifaudit", description="Intersectional fairness audits of classifier predictions.")
    sub = parser.add_subparsers(
        dest="command", metavar="{audit,compare,sweep-axes,sweep-alpha,validate}", parser_class=_Parser
    )

    p = sub.add_parser("audit", help="audit one model's predictions")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--csv-dir", type=Path)
    p.add_argument("--model", help="override the model name from the config")

    p = sub.add_parser("compare", help="compare a candidate report against a baseline")
    p.add_argument("--baseline", required=True, type=Path)
    p.add_argument("--candidate", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--tau", type=float, default=DEFAULT_TAU)
    p.add_argument("--strict", action="store_true", help="leveling down requires no group to improve")

    p = sub.add_parser("sweep-axes", help="audit every prefix of the axis list")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--model")

    p = sub.add_parser("sweep-alpha", help="emit (alpha, IF_alpha, DF) rows from a report")
    p.add_argument("--report", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--measure", help="measure kind (default: first in the report)")

    p = sub.add_parser("validate", help="check input against the config schema")
    p.add_argument("--input", required=True, type=Path)
    p.add_argument("--config", required=True, type=Path)

    # hidden: not listed in the metavar above
    p = sub.add_parser("explore")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-points", type=int, default=101)
    return parser


def _load(args):
    config = load_config(args.config)
    if getattr(args, "model", None):
        config = replace(config, model=args.model)
    return config, load_dataset(args.input, config)


def _cmd_audit(args) -> int:
    config, data = _load(args)
    report = run_audit(data, config)
    emit_report(report, args.out, args.csv_dir)
    return EXIT_OK


def _cmd_compare(args) -> int:
    baseline, candidate = load_report(args.baseline), load_report(args.candidate)
    kinds = [ev.kind for ev in baseline.evaluations if ev.kind in candidate.config.measures]
    if not kinds:
        raise ConfigMismatchError("reports share no measure kind")
    if baseline.config.alpha_grid != candidate.config.alpha_grid:
        raise ConfigMismatchError("reports use different alpha grids")
    verdicts = [
        compare_evaluations(baseline.evaluation(k), candidate.evaluation(k), args.tau, strict=args.strict)
        for k in kinds
    ]
    write_text(args.out, verdicts_to_json(verdicts))
    return EXIT_OK


def _cmd_sweep_axes(args) -> int:
    config, data = _load(args)
    reports = axis_sweep(data, config)
    for report in reports:
        write_text(args.out_dir / f"report_k{len(report.config.axes)}.json", report_to_json(report))
    write_text(args.out_dir / "axis_sweep.csv", sweep_csv(reports))
    return EXIT_OK


def _cmd_sweep_alpha(args) -> int:
    report = load_report(args.report)
    try:
        ev = report.evaluation(args.measure) if args.measure else report.evaluations[0]
    except KeyError:
        raise ValidationError(f"report has no measure {args.measure!r}") from None
    write_text(args.out, curve_csv(ev))
    return EXIT_OK


def _cmd_validate(args) -> int:
    _, data = _load(args)
    print(json.dumps({"valid": True, "rows": len(data)}))
    return EXIT_OK


def _cmd_explore(args) -> int:
    report = efficiency_case_explorer(args.samples, args.seed, args.grid_points)
    print(json.dumps({**asdict(report), "ok": report.ok}, indent=2))
    return EXIT_OK if report.ok else 1


COMMANDS = {
    "audit": _cmd_audit,
    "compare": _cmd_compare,
    "sweep-axes": _cmd_sweep_axes,
    "sweep-alpha": _cmd_sweep_alpha,
    "validate": _cmd_validate,
    "explore": _cmd_explore,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
    except UsageError as exc:
        return _fail("usage", EXIT_USAGE, exc)
    try:
        return COMMANDS[args.command](args)
    except NoScorableGroupsError as exc:
        return _fail("no_scorable_groups", EXIT_NO_SCORABLE, exc)
    except ConfigMismatchError as exc:
        return _fail("config_mismatch", EXIT_MISMATCH, exc)
    except ValidationError as exc:
        return _fail("validation", EXIT_VALIDATION, exc)
    except OSError as exc:
        return _fail("io", EXIT_IO, f"{exc.strerror or exc}: {exc.filename or ''}")


if __name__ == "__main__":
    sys.exit(main())
