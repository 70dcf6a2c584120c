"""``restql`` command line.

Exit codes: 0 success, 1 input/IO/usage error, 2 strict mode skipped
operations (partial output still written), 3 schema violations.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from .bench import BenchConfig, run_bench
from .defmodel import model_to_data
from .diagnostics import report
from .executor.backend import FixtureBackend, HttpBackend
from .executor.server import serve
from .generator import BindingManifest, GenerationError, check_manifest
from .gqllex import GraphQLSyntaxError
from .pipeline import load_surface, run_pipeline
from .plugins import IngestionError, default_registry
from .processor import ConfigError, ProcessorConfig
from .schema_validation import validate_schema
from .sdl import parse_sdl

EXIT_OK, EXIT_INPUT, EXIT_PARTIAL, EXIT_INVALID = 0, 1, 2, 3

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "partial schema"
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _config(args: argparse.Namespace) -> ProcessorConfig:
    config = ProcessorConfig.load(args.config) if args.config else ProcessorConfig()
    return replace(config, mode=args.mode) if args.mode else config


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def cmd_convert(args: argparse.Namespace) -> int:
    config = _config(args)
    result = run_pipeline(load_surface(args.input, args.plugin), config)
    _write(args.out, result.sdl)
    _write(args.bindings, result.manifest.to_json())
    if args.diagnostics:
        _write(args.diagnostics, report(result.diagnostics, "json"))
    if result.diagnostics:
        sys.stderr.write(report(result.diagnostics, "text"))
    violations = result.schema_violations + result.model_violations
    for v in violations:
        print(v, file=sys.stderr)
    if violations:
        return EXIT_INVALID
    if result.skipped:
        print(f"strict mode skipped {result.skipped} of {result.surface.operation_count} operations", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    schema = parse_sdl(_read(args.schema))
    violations = validate_schema(schema)
    for v in violations:
        print(v)
    return EXIT_INVALID if violations else EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    schema = parse_sdl(_read(args.schema))
    manifest = BindingManifest.from_json(_read(args.bindings))
    problems = [str(v) for v in validate_schema(schema)] + check_manifest(manifest, schema)
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return EXIT_INVALID
    pass_headers = tuple(args.pass_header or ())
    if args.fixtures:
        backend = FixtureBackend(json.loads(_read(args.fixtures)), args.latency_ms)
    else:
        backend = HttpBackend(args.backend, args.timeout, pass_headers)
    serve(schema, manifest, backend, args.port, pass_headers)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    try:
        config = BenchConfig(args.chain, args.latency_ms, args.trials)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sys.stdout.write(run_bench(config).format())
    return EXIT_OK


def cmd_explain(args: argparse.Namespace) -> int:
    result = run_pipeline(load_surface(args.input, args.plugin), _config(args))
    data = model_to_data(result.model, include_logs=True)
    # logs are only shown when something was logged
    data = {k: v for k, v in data.items() if k in ("operations", "types") or v}
    print(json.dumps(data, sort_keys=True, separators=(",", ":")))
    return EXIT_OK


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IngestionError(exc.strerror or str(exc), path) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="restql", description="Turn REST API descriptions into a GraphQL gateway.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    plugins = default_registry().names()

    def pipeline_opts(p: argparse.ArgumentParser) -> None:
        p.add_argument("--plugin", choices=plugins, help="input format (default: guessed from the file name)")
        p.add_argument("--input", required=True, help="API description file")
        p.add_argument("--mode", choices=("strict", "non-strict"), help="failure handling (default: config or non-strict)")
        p.add_argument("--config", help="processor config (TOML or JSON): wrappers, custom scalars, depth limit")

    p = sub.add_parser("convert", help="generate SDL, bindings and diagnostics")
    pipeline_opts(p)
    p.add_argument("--out", required=True, help="SDL output path")
    p.add_argument("--bindings", required=True, help="binding manifest output path")
    p.add_argument("--diagnostics", help="diagnostics JSON output path")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("validate", help="check an SDL file")
    p.add_argument("schema")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="serve a generated schema over HTTP")
    p.add_argument("--schema", required=True)
    p.add_argument("--bindings", required=True)
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--backend", help="base URL of the REST service")
    target.add_argument("--fixtures", help="fixture JSON answering REST calls")
    p.add_argument("--port", type=int, default=4000)
    p.add_argument("--pass-header", action="append", metavar="NAME", help="request header forwarded to the backend")
    p.add_argument("--timeout", type=float, default=10.0, help="backend timeout in seconds")
    p.add_argument("--latency-ms", type=float, default=0.0, help="per-call latency added by fixtures")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("bench", help="dependent REST calls vs one nested GraphQL request")
    p.add_argument("--chain", type=int, default=5)
    p.add_argument("--latency-ms", type=float, default=50.0)
    p.add_argument("--trials", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("explain", help="print the definition model as JSON")
    pipeline_opts(p)
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("RESTQL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    for name in ("input", "schema", "fixtures", "config"):
        value = getattr(args, name, None)
        if value and not Path(value).is_file():
            print(f"restql: {value}: no such file", file=sys.stderr)
            return EXIT_INPUT
    try:
        return args.func(args)
    except (IngestionError, GraphQLSyntaxError, ConfigError, GenerationError, UsageError, OSError, ValueError) as exc:
        print(f"restql: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
