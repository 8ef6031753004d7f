"""
sweep: one EstimateReport per (n, λ, ξ) grid point.
"""

import argparse
import itertools
from typing import List

from ..models import EventSpec
from ..monte_carlo import trajectory_sweep, write_reports
from .common import (
    add_output_flags,
    add_protocol_flags,
    add_run_flags,
    finish,
    open_output,
    parse_grid,
    parse_int_grid,
    resolve_threads,
)
from .simulate import build_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="Estimate P{event} across a grid of configurations")
    parser.add_argument("--n", required=True, help="Grid of n values")
    parser.add_argument("--lambda", dest="lam", required=True, help="Grid of λ values")
    parser.add_argument("--xi", default="0.5", help="Grid of ξ values")
    parser.add_argument("--event", required=True, help="con:r | mcon:r | ge:l:t | le:l:t")
    add_protocol_flags(parser)
    add_run_flags(parser)
    add_output_flags(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, argv: List[str]) -> int:
    configs = [
        build_config(args, n, lam, xi)
        for n, lam, xi in itertools.product(
            parse_int_grid(args.n, "--n"),
            parse_grid(args.lam, "--lambda"),
            parse_grid(args.xi, "--xi"),
        )
    ]
    event = EventSpec.parse(args.event)
    reports = trajectory_sweep(configs, event, args.trials, resolve_threads(args))
    with open_output(args.out) as handle:
        write_reports(reports, handle, args.format)
    return finish(args, argv, configs[0].master_seed if configs else None)
