"""
simulate: estimate one event probability for one experiment configuration.
"""

import argparse
from typing import List

from ..dynamics import round_graph, write_trajectories
from ..models import EventSpec, ExperimentConfig
from ..monte_carlo import estimate_event, run_trials, write_reports
from ..rng_graph import write_edge_list
from .common import (
    add_output_flags,
    add_protocol_flags,
    add_run_flags,
    finish,
    logger,
    open_output,
    parse_float_list,
    parse_initial,
    parse_redraw,
    resolve_seed,
    resolve_threads,
)


def register(subparsers) -> None:
    parser = subparsers.add_parser("simulate", help="Estimate P{event} by Monte Carlo")
    parser.add_argument("--n", type=int, required=True, help="Half the number of agents")
    parser.add_argument("--lambda", dest="lam", type=float, required=True, help="Edge-density constant")
    parser.add_argument("--xi", type=float, default=0.5, help="Edge probability exponent in [1/2, 1)")
    parser.add_argument("--per-round-xi", default=None, help="Comma-separated xi per round")
    parser.add_argument("--event", required=True, help="con:r | mcon:r | ge:l:t | le:l:t")
    parser.add_argument("--trajectories", default=None, help="Also write per-trial zero counts here")
    parser.add_argument("--dump-graph", default=None, help="Write the round-0 graph of trial 0 as an edge list")
    add_protocol_flags(parser)
    add_run_flags(parser)
    add_output_flags(parser)
    parser.set_defaults(handler=run)


def build_config(args: argparse.Namespace, n: int, lam: float, xi: float) -> ExperimentConfig:
    per_round_xi = getattr(args, "per_round_xi", None)
    return ExperimentConfig(
        n=n,
        lam=lam,
        xi=xi,
        rounds=args.rounds,
        redraw=parse_redraw(args.redraw),
        per_round_xi=tuple(parse_float_list(per_round_xi, "--per-round-xi")) if per_round_xi else None,
        initial_zeros=parse_initial(args.initial),
        master_seed=resolve_seed(args),
    )


def run(args: argparse.Namespace, argv: List[str]) -> int:
    config = build_config(args, args.n, args.lam, args.xi)
    event = EventSpec.parse(args.event)
    event.check(config)
    threads = resolve_threads(args)
    logger.info("simulate_started", n=config.n, event_label=event.label(), trials=args.trials, threads=threads)

    trajectories = run_trials(config, args.trials, threads)
    report = estimate_event(config, event, args.trials, threads, trajectories=trajectories)
    with open_output(args.out) as handle:
        write_reports([report], handle, args.format)
    if args.trajectories:
        with open_output(args.trajectories) as handle:
            write_trajectories(enumerate(trajectories), handle)
    if args.dump_graph:
        with open_output(args.dump_graph) as handle:
            write_edge_list(round_graph(config, 0, 0), handle)
    return finish(args, argv, config.master_seed, [args.trajectories, args.dump_graph])
