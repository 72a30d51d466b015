"""Command-line entry point.

Exit codes: 0 extendable / valid / accepted, 1 not extendable / invalid /
rejected, 2 input error, 3 search budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .diagram import (
    GermError,
    export_dot,
    germ_from_json,
    load_json_document,
    parse_germ,
    serialize_germ,
    validate_germ,
    validate_klein_germ,
)
from .oracle import GeneratorParams, UnsatisfiableParams, random_germ
from .search import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    KleinRejected,
    decide,
    enumerate_witnesses,
    extension_from_json,
    witness_to_json,
)
from .sweep import check_trace, trace_from_json

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    try:
        return Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _cmd_validate(args: argparse.Namespace) -> int:
    d = parse_germ(_read(args.file))
    report = validate_germ(d)
    for line in report.lines():
        print(line)
    if not args.klein:
        print("valid")
        return EXIT_OK
    check = validate_klein_germ(d, strict=not args.no_strict)
    for w in check.warnings:
        print(f"warning: {w}")
    for f in check.failures:
        print(f"invalid: {f}")
    if check:
        print("valid Klein-bottle germ")
    return EXIT_OK if check else EXIT_NO


def _cmd_decide(args: argparse.Namespace) -> int:
    d = parse_germ(_read(args.file))
    verdict = decide(d, args.mode, args.budget, strict=not args.no_strict)
    print(verdict.summary())
    print(f"accepting runs: {verdict.witness_count}")
    return EXIT_OK if verdict.extendable else EXIT_NO


def _cmd_witness(args: argparse.Namespace) -> int:
    d = parse_germ(_read(args.file))
    verdict = decide(d, args.mode, args.budget, strict=not args.no_strict)
    print(verdict.summary())
    if not verdict.extendable:
        return EXIT_NO
    _write(args.out, json.dumps(witness_to_json(verdict.witness, args.mode), indent=2) + "\n")
    if args.dot:
        _write(args.dot, export_dot(verdict.witness.extension))
    return EXIT_OK


def _cmd_enumerate(args: argparse.Namespace) -> int:
    d = parse_germ(_read(args.file))
    witnesses = enumerate_witnesses(d, args.mode, args.limit, args.budget, strict=not args.no_strict)
    print(json.dumps([witness_to_json(w, args.mode) for w in witnesses], indent=2))
    return EXIT_OK if witnesses else EXIT_NO


def _cmd_check_trace(args: argparse.Namespace) -> int:
    if args.germ == "-" and args.trace == "-":
        raise InputError("only one input may come from standard input")
    d = parse_germ(_read(args.germ))
    try:
        doc = load_json_document(_read(args.trace))
        trace = trace_from_json(doc["trace"] if isinstance(doc, dict) and "trace" in doc else doc)
    except (ValueError, TypeError, KeyError) as exc:
        raise InputError(f"bad trace file: {exc}") from None
    result = check_trace(d, trace)
    if result:
        print("accept")
        return EXIT_OK
    print(f"reject: {result.reason}" + (f" at vertex {result.vertex}" if result.vertex else ""))
    return EXIT_NO


def _cmd_random(args: argparse.Namespace) -> int:
    mobius = args.mobius if args.mobius == "any" else int(args.mobius)
    params = GeneratorParams(
        seed=args.seed,
        max_vertices=args.max_vertices,
        mobius=mobius,
        euler=args.euler,
        connected=args.connected,
        extremum_bias=args.extremum_bias,
    )
    _write(args.out, serialize_germ(random_germ(params)))
    return EXIT_OK


def _cmd_export_dot(args: argparse.Namespace) -> int:
    doc = load_json_document(_read(args.file))
    if isinstance(doc, dict) and "extension" in doc:
        try:
            target = extension_from_json(doc["extension"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad witness file: {exc}") from None
    else:
        target = germ_from_json(doc)
    _write(args.out, export_dot(target))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morse-extension",
        description="Decide non-singular extendability of Morse germs from their signed Reeb diagrams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def germ_input(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", help="germ file, or - for standard input")

    def search_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--mode", choices=("general", "klein"), required=True)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search node budget")
        p.add_argument("--no-strict", action="store_true", help="downgrade Klein pattern failures to warnings")

    p = sub.add_parser("validate", help="print the germ report")
    germ_input(p)
    p.add_argument("--klein", action="store_true", help="also check Klein-bottle germ conditions")
    p.add_argument("--no-strict", action="store_true")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("decide", help="decide extendability")
    germ_input(p)
    search_flags(p)
    p.set_defaults(func=_cmd_decide)

    p = sub.add_parser("witness", help="write the first witness bundle")
    germ_input(p)
    search_flags(p)
    p.add_argument("--out", required=True, help="witness file (- for standard output)")
    p.add_argument("--dot", help="also write the extension diagram as DOT")
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("enumerate", help="list up to LIMIT witnesses")
    germ_input(p)
    search_flags(p)
    p.add_argument("--limit", type=int, default=10)
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("check-trace", help="replay a trace against a germ")
    p.add_argument("germ")
    p.add_argument("trace", help="trace file or witness bundle")
    p.set_defaults(func=_cmd_check_trace)

    p = sub.add_parser("random", help="write a random germ file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--max-vertices", type=int, default=8)
    p.add_argument("--euler", type=int)
    p.add_argument("--mobius", choices=("0", "2", "any"), default="any")
    p.add_argument("--connected", action="store_true")
    p.add_argument("--extremum-bias", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_random)

    p = sub.add_parser("export-dot", help="export a germ or witness file as DOT")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_export_dot)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except KleinRejected as exc:
        print(f"invalid Klein-bottle germ: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GermError, InputError, UnsatisfiableParams) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
