"""Ingestion CLI: convert raw HotpotQA JSON and validate the output."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .ingest import ConversionError, ingest_file
from .validate import ValidatorUnavailable, validate_against_schema


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hotpot-ingest",
        description="Convert raw HotpotQA distractor JSON into canonical JSONL.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="convert a raw file")
    p.add_argument("raw", help="raw HotpotQA JSON (array of examples)")
    p.add_argument("out", help="canonical JSONL output")
    p.add_argument("--annotator", default="rule",
                   help="annotation pipeline name (default: rule)")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel conversion workers (output order preserved)")
    p.add_argument("--report", default=None, help="write the drop report here")
    p.add_argument("--validate", action="store_true",
                   help="run the core validator on the output and fail if dirty")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="validate a JSONL file via the core CLI")
    p.add_argument("jsonl", help="canonical JSONL file")
    p.add_argument("--out", default=None, help="write the validation report here")
    p.set_defaults(func=cmd_validate)
    return parser


def cmd_run(args) -> int:
    report = ingest_file(args.raw, args.out, annotator_name=args.annotator,
                         workers=args.workers)
    payload = report.to_dict()
    if args.report:
        Path(args.report).write_text(json.dumps(payload, indent=1) + "\n",
                                     encoding="utf-8")
    print(json.dumps(payload))
    if args.validate:
        validation = validate_against_schema(args.out)
        print(json.dumps(validation.to_dict()))
        if not validation.clean:
            return 1
    return 0


def cmd_validate(args) -> int:
    report = validate_against_schema(args.jsonl)
    if args.out:
        Path(args.out).write_text(json.dumps(report.to_dict(), indent=1) + "\n",
                                  encoding="utf-8")
    print(json.dumps(report.to_dict()))
    return 0 if report.clean else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConversionError, ValidatorUnavailable, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
