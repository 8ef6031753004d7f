"""
Majority Lab command-line entry point.

Each subcommand module registers its parser and handler; errors are mapped
to exit codes by the handlers in ``majority.exceptions``.
"""

import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from .. import __version__
from ..exceptions import (
    EXIT_USAGE,
    MajorityLabError,
    handle_lab_error,
    handle_unexpected_error,
    handle_validation_error,
)
from . import bounds, replay, simulate, stages, sweep, verify
from .common import FLAG_NAMES

COMMANDS = (simulate, bounds, verify, sweep, stages, replay)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="majority",
        description="Majority dynamics on dynamic Erdős–Rényi graphs: simulation, bounds and verification",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags and 0 for --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    try:
        return args.handler(args, argv)
    except ValidationError as exc:
        return handle_validation_error(exc, args.command, FLAG_NAMES)
    except MajorityLabError as exc:
        return handle_lab_error(exc, args.command)
    except Exception as exc:
        return handle_unexpected_error(exc, args.command)


if __name__ == "__main__":
    sys.exit(main())
