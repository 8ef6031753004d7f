"""
stages: distribution of the zero-count imbalance after rounds 0, 1 and 2.
"""

import argparse
from typing import List

from ..monte_carlo import stage_statistics, write_stage_summaries
from .common import add_output_flags, add_run_flags, finish, open_output, resolve_threads
from .simulate import build_config


def register(subparsers) -> None:
    parser = subparsers.add_parser("stages", help="Imbalance quantiles per round and scale")
    parser.add_argument("--n", type=int, required=True, help="Half the number of agents")
    parser.add_argument("--lambda", dest="lam", type=float, required=True, help="Edge-density constant")
    parser.add_argument("--xi", type=float, default=0.5, help="Edge probability exponent in [1/2, 1)")
    parser.add_argument("--rounds", type=int, default=2, help="Communication rounds per trial (at least 2)")
    parser.add_argument("--trials", type=int, required=True, help="Independent trials")
    parser.add_argument("--redraw", default="every", help="every|fixed")
    parser.add_argument("--initial", default="coin", help="coin|zeros=K")
    parser.add_argument("--condition", choices=("all", "zero-majority"), default="all",
                        help="Restrict to trials with an initial zero majority")
    add_run_flags(parser)
    add_output_flags(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, argv: List[str]) -> int:
    config = build_config(args, args.n, args.lam, args.xi)
    condition = None if args.condition == "all" else args.condition
    summaries = stage_statistics(config, args.trials, resolve_threads(args), condition=condition)
    with open_output(args.out) as handle:
        write_stage_summaries(summaries, handle, args.format)
    return finish(args, argv, config.master_seed)
