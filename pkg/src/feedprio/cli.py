"""Command-line entry point.

Every subcommand takes a config file (plus optional ``--set`` overrides) and
maps failures onto stable exit codes: 0 success, 1 configuration error,
2 data error, 3 external-service error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Callable, Sequence

from . import pipeline
from .config import RunConfig, load_config
from .errors import ConfigurationError, DataError, ExternalServiceError

COMMANDS: dict[str, Callable[[RunConfig], dict]] = {
    "ingest": pipeline.run_ingest,
    "topics": pipeline.run_topics,
    "prioritize": pipeline.run_prioritize,
    "evaluate": pipeline.run_evaluate,
    "mine": pipeline.run_mine,
    "dvalue": pipeline.run_dvalue,
    "nrp": pipeline.run_nrp,
    "report": pipeline.run_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feedprio",
        description="Feedback-driven requirements prioritization and release planning.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        doc_lines = (fn.__doc__ or "").strip().splitlines()
        cmd = sub.add_parser(name, help=doc_lines[0] if doc_lines else None)
        cmd.add_argument("--config", required=True, help="experiment config file (JSON)")
        cmd.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable)",
        )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = load_config(args.config, args.overrides)
        summary = COMMANDS[args.command](config)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ExternalServiceError as exc:
        print(f"external service error: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
