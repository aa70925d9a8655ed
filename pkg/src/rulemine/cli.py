"""Command-line front end.

Three subcommands: `extract` mines rules from a model, `coverage` prints
the pattern-by-notation expressibility matrix (with match counts when a
model is given), `validate` reports structural problems. Exit codes: 0
success, 1 validation errors, 2 parse errors, 3 usage errors. Primary
output goes to stdout and is byte-deterministic; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ParseError, RuleMineError, ValidationFailedError
from .graph import Notation, ProcessGraph, normalize_petri, validate
from .model_io import SCHEMA_VERSION, parse_document, parse_epml, parse_native, parse_pnml
from .patterns import EXPRESSIBLE, extract_all
from .rules import RuleSet, render_text, to_json

VERSION = "0.1.0"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE = 2
EXIT_USAGE = 3

PATTERN_LABELS = {
    1: "Rules concerning programmed decision (XOR connector)",
    2: "Rules concerning other connector logics",
    3: "Rules concerning data object state",
    4: "Authorization rules",
}

_FORCED_PARSERS = {"pnml": parse_pnml, "epml": parse_epml, "native": parse_native}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage problems; this tool reserves 2 for
    parse errors, so usage problems must exit 3 instead."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _patterns_arg(text: str) -> tuple[int, ...]:
    try:
        values = sorted({int(part) for part in text.split(",")})
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"patterns must be a comma-separated subset of 1,2,3,4: got {text!r}")
    if not values or any(v not in PATTERN_LABELS for v in values):
        raise argparse.ArgumentTypeError(
            f"patterns must be a comma-separated subset of 1,2,3,4: got {text!r}")
    return tuple(values)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rulemine",
                     description="Mine business rules from process models.")
    parser.add_argument("--version", action="version",
                        version=f"rulemine {VERSION} (schema {SCHEMA_VERSION})")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add_format(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=["auto", "pnml", "epml", "native"],
                       default="auto", help="input format (default: detect)")

    extract = sub.add_parser("extract", help="extract rules from a model")
    extract.add_argument("input", help="model file (PNML, EPML, or native JSON)")
    add_format(extract)
    extract.add_argument("--patterns", type=_patterns_arg, default=(1, 2, 3, 4),
                         help="comma-separated pattern numbers (default: 1,2,3,4)")
    extract.add_argument("--output", choices=["text", "json"], default="text")
    extract.set_defaults(func=cmd_extract)

    coverage = sub.add_parser("coverage", help="pattern/notation coverage matrix")
    coverage.add_argument("input", nargs="?", default=None,
                          help="optional model file to count matches in")
    add_format(coverage)
    coverage.add_argument("--output", choices=["text", "json"], default="text")
    coverage.set_defaults(func=cmd_coverage)

    val = sub.add_parser("validate", help="check a model's structure")
    val.add_argument("input", help="model file")
    add_format(val)
    val.set_defaults(func=cmd_validate)

    return parser


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None


def _parse(document: bytes, fmt: str,
           warnings: list[str] | None = None) -> ProcessGraph:
    if fmt == "auto":
        return parse_document(document, warnings)
    return _FORCED_PARSERS[fmt](document, warnings)


def _print_validation_errors(issues, stream) -> None:
    for issue in issues:
        print(f"ERROR {issue.code} [{issue.locus}]: {issue.message}", file=stream)


def _load_for_analysis(args) -> ProcessGraph | None:
    """Parse, validate, and normalize one model; None means validation
    failed and the caller should exit with EXIT_VALIDATION."""
    warnings: list[str] = []
    graph = _parse(_read(args.input), args.format, warnings)
    for warning in warnings:
        print(f"parse warning: {warning}", file=sys.stderr)
    report = validate(graph)
    if not report.ok():
        _print_validation_errors(report.errors, sys.stderr)
        return None
    if graph.notation is Notation.PETRI_NET:
        graph = normalize_petri(graph)
    return graph


def _print_rules_text(ruleset: RuleSet, patterns: tuple[int, ...]) -> None:
    print(f"model: {ruleset.model_name} ({ruleset.notation.value})")
    skipped = {int(note.split()[1]): note for note in ruleset.skip_notes}
    for p in sorted(set(patterns)):
        if p in skipped:
            print(f"Pattern {p}: skipped ({skipped[p]})")
            continue
        group = [rule for rule in ruleset.rules if rule.source_pattern == p]
        if not group:
            print(f"Pattern {p}: (none)")
            continue
        print(f"Pattern {p}:")
        for rule in group:
            print(f"  {render_text(rule)}  [{', '.join(rule.provenance)}]")


def cmd_extract(args) -> int:
    graph = _load_for_analysis(args)
    if graph is None:
        return EXIT_VALIDATION
    ruleset = extract_all(graph, args.patterns)
    if args.output == "json":
        sys.stdout.buffer.write(to_json(ruleset))
        sys.stdout.buffer.flush()
    else:
        _print_rules_text(ruleset, args.patterns)
    for note in ruleset.notes:
        print(f"note: {note}", file=sys.stderr)
    return EXIT_OK


def _coverage_data(graph: ProcessGraph | None) -> tuple[dict, list[str]]:
    """The matrix as nested dicts, plus the notation column order."""
    columns = [Notation.PETRI_NET, Notation.EPC]
    counts: dict[int, int] = {}
    if graph is not None:
        if graph.notation not in columns:
            columns.append(graph.notation)
        ruleset = extract_all(graph, (1, 2, 3, 4))
        for rule in ruleset.rules:
            counts[rule.source_pattern] = counts.get(rule.source_pattern, 0) + 1
    data: dict = {}
    for p in sorted(PATTERN_LABELS):
        row = {}
        for notation in columns:
            cell: dict = {"expressible": p in EXPRESSIBLE[notation]}
            if graph is not None and notation is graph.notation:
                cell["matched"] = counts.get(p, 0)
            row[notation.value] = cell
        data[str(p)] = row
    return data, [n.value for n in columns]


def _coverage_text(data: dict, columns: list[str],
                   matched_for: str | None) -> str:
    headers = ["Rule pattern"] + list(columns)
    if matched_for is not None:
        headers.append(f"matched ({matched_for})")
    rows = [headers]
    for p in sorted(PATTERN_LABELS):
        row = [PATTERN_LABELS[p]]
        for notation in columns:
            row.append("yes" if data[str(p)][notation]["expressible"] else "no")
        if matched_for is not None:
            row.append(str(data[str(p)][matched_for]["matched"]))
        rows.append(row)
    widths = [max(len(row[i]) for row in rows) for i in range(len(headers))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
             for row in rows]
    return "\n".join(lines) + "\n"


def cmd_coverage(args) -> int:
    graph = None
    if args.input is not None:
        graph = _load_for_analysis(args)
        if graph is None:
            return EXIT_VALIDATION
    data, columns = _coverage_data(graph)
    if args.output == "json":
        doc = {"version": SCHEMA_VERSION, "patterns": data}
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        matched_for = graph.notation.value if graph is not None else None
        sys.stdout.write(_coverage_text(data, columns, matched_for))
    return EXIT_OK


def cmd_validate(args) -> int:
    warnings: list[str] = []
    graph = _parse(_read(args.input), args.format, warnings)
    for warning in warnings:
        print(f"parse warning: {warning}", file=sys.stderr)
    report = validate(graph)
    for issue in report.errors:
        print(f"ERROR {issue.code} [{issue.locus}]: {issue.message}")
    for issue in report.warnings:
        print(f"WARNING {issue.code} [{issue.locus}]: {issue.message}")
    print(f"{len(report.errors)} errors, {len(report.warnings)} warnings")
    return EXIT_OK if report.ok() else EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ValidationFailedError as exc:
        if exc.report is not None:
            _print_validation_errors(exc.report.errors, sys.stderr)
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ParseError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except RuleMineError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def run() -> int:
    return main()
