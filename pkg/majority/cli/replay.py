"""
replay: re-execute the command recorded in a run manifest.
"""

import argparse
import json
from typing import List

from pydantic import ValidationError

from ..exceptions import InvalidParameterError
from ..models import RunManifest
from .common import logger


def register(subparsers) -> None:
    parser = subparsers.add_parser("replay", help="Re-run a recorded manifest")
    parser.add_argument("manifest", help="Path to a <out>.manifest.json file")
    parser.add_argument("--out", default=None, help="Write to this file instead of the recorded output")
    parser.set_defaults(handler=run)


def _without_out(argv: List[str]) -> List[str]:
    stripped, skip = [], False
    for token in argv:
        if skip:
            skip = False
        elif token == "--out":
            skip = True
        elif not token.startswith("--out="):
            stripped.append(token)
    return stripped


def load_manifest(path: str) -> RunManifest:
    try:
        with open(path, encoding="utf-8") as handle:
            return RunManifest.model_validate(json.load(handle))
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        raise InvalidParameterError(f"cannot read manifest {path}: {exc}", field="manifest") from exc


def run(args: argparse.Namespace, argv: List[str]) -> int:
    from .main import main

    manifest = load_manifest(args.manifest)
    replayed = list(manifest.argv)
    if args.out is not None:
        replayed = _without_out(replayed) + ["--out", args.out]
    logger.info("replay_started", manifest=args.manifest, subcommand=manifest.subcommand)
    return main(replayed)
