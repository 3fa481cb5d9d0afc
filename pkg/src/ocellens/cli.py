"""Command-line front door: validate, inspect, transform, discover, serve.

Logs stream through stdin/stdout when a path is ``-``, and every output
file is canonical, so pipelines are diff-able:

    ocellens drill-down -i run.jsonocel --object-type Test --attribute type \
      | ocellens unfold --event-type ot --object-type 'Test~type=ECG' \
      | ocellens discover --format dot

Exit codes: 0 success, 1 invalid input log, 2 usage error, 3 I/O error,
4 operation error (unknown type, malformed request, ...).
"""
from __future__ import annotations

import argparse
import json
import sys

from . import ops
from .discovery import dfg_to_json, discover_ocdfg, render_dot
from .errors import (
    JsonSyntaxError,
    MalformedTypeName,
    OperationError,
    SchemaError,
    ValidationError,
)
from .model import validate
from .ocel_json import read_ocel_json, write_ocel_json
from .service import ServiceConfig, serve
from .typenames import decode_event_type, decode_object_type

EXIT_OK = 0
EXIT_INVALID_LOG = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_OPERATION = 4


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message


def _read_bytes(path: str) -> bytes:
    try:
        if path == "-":
            return sys.stdin.buffer.read()
        with open(path, "rb") as handle:
            return handle.read()
    except OSError as exc:
        raise _CliFailure(EXIT_IO, f"cannot read {path}: {exc}") from exc


def _write_bytes(path: str, data: bytes):
    try:
        if path == "-":
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()
        else:
            with open(path, "wb") as handle:
                handle.write(data)
    except OSError as exc:
        raise _CliFailure(EXIT_IO, f"cannot write {path}: {exc}") from exc


def _load_log(path: str):
    data = _read_bytes(path)
    try:
        return read_ocel_json(data)
    except (JsonSyntaxError, SchemaError, MalformedTypeName, ValidationError) as exc:
        raise _CliFailure(EXIT_INVALID_LOG, f"{path}: {exc}") from exc


def _decode_flag(value: str, decoder, flag: str):
    try:
        return decoder(value)
    except MalformedTypeName as exc:
        raise _CliFailure(EXIT_USAGE, f"{flag}: {exc}") from exc


def _build_request(args) -> ops.OperationRequest:
    object_type = _decode_flag(args.object_type, decode_object_type, "--object-type")
    if args.command in ("drill-down", "roll-up"):
        return ops.OperationRequest(
            kind=args.command, object_type=object_type, attribute=args.attribute
        )
    event_type = _decode_flag(args.event_type, decode_event_type, "--event-type")
    qualifiers = None
    if args.command == "unfold" and args.qualifier:
        qualifiers = frozenset(args.qualifier)
    return ops.OperationRequest(
        kind=args.command,
        object_type=object_type,
        event_type=event_type,
        qualifiers=qualifiers,
    )


def _cmd_validate(args) -> int:
    report = validate(_load_log(args.input))
    for violation in report.violations:
        print(f"{violation.rule}: {violation.message}")
    if report.ok:
        print("ok")
        return EXIT_OK
    return EXIT_INVALID_LOG


def _cmd_info(args) -> int:
    from .service import summarize

    log = _load_log(args.input)
    print(json.dumps(summarize(log), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_transform(args) -> int:
    log = _load_log(args.input)
    request = _build_request(args)
    try:
        result = ops.apply(log, request)
    except OperationError as exc:
        raise _CliFailure(EXIT_OPERATION, f"{type(exc).__name__}: {exc}") from exc
    _write_bytes(args.output, write_ocel_json(result))
    return EXIT_OK


def _cmd_discover(args) -> int:
    log = _load_log(args.input)
    dfg = discover_ocdfg(log)
    if args.format == "dot":
        text = render_dot(dfg, min_arc_frequency=args.min_arc_frequency)
    else:
        doc = dfg_to_json(dfg, min_arc_frequency=args.min_arc_frequency)
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    _write_bytes(args.output, text.encode("utf-8"))
    return EXIT_OK


def _cmd_serve(args) -> int:
    config = ServiceConfig.from_env()
    if args.addr:
        config.addr = args.addr
    serve(config)
    return EXIT_OK


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return number


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ocellens",
        description="Granularity operations and OC-DFG discovery for OCEL 2.0 logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def io_flags(p, output=True):
        p.add_argument("-i", "--input", default="-", help="input log path or - for stdin")
        if output:
            p.add_argument(
                "-o", "--output", default="-", help="output path or - for stdout"
            )

    p = sub.add_parser("validate", help="check a log's structural invariants")
    io_flags(p, output=False)

    p = sub.add_parser("info", help="counts and type catalog as JSON")
    io_flags(p, output=False)

    for name in ("drill-down", "roll-up"):
        p = sub.add_parser(name, help=f"{name} an object type by an attribute")
        io_flags(p)
        p.add_argument("--object-type", required=True, help="encoded composite type")
        p.add_argument("--attribute", required=True)

    p = sub.add_parser("unfold", help="refine an event type by an object type")
    io_flags(p)
    p.add_argument("--event-type", required=True, help="encoded composite type")
    p.add_argument("--object-type", required=True, help="encoded composite type")
    p.add_argument(
        "--qualifier",
        action="append",
        default=[],
        help="restrict to this qualifier (repeatable; default: all)",
    )

    p = sub.add_parser("fold", help="undo an unfold")
    io_flags(p)
    p.add_argument("--event-type", required=True, help="encoded composite type")
    p.add_argument("--object-type", required=True, help="encoded composite type")

    p = sub.add_parser("discover", help="discover the OC-DFG")
    io_flags(p)
    p.add_argument("--format", choices=("dot", "json"), default="dot")
    p.add_argument("--min-arc-frequency", type=_positive, default=1)

    p = sub.add_parser("serve", help="run the HTTP session service")
    p.add_argument("--addr", help="bind address host:port (default from OCELLENS_ADDR)")

    return parser


_COMMANDS = {
    "validate": _cmd_validate,
    "info": _cmd_info,
    "drill-down": _cmd_transform,
    "roll-up": _cmd_transform,
    "unfold": _cmd_transform,
    "fold": _cmd_transform,
    "discover": _cmd_discover,
    "serve": _cmd_serve,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _CliFailure as failure:
        print(failure.message, file=sys.stderr)
        return failure.code
    except OperationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_OPERATION


def main():
    raise SystemExit(run())
