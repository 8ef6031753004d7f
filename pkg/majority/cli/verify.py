"""
verify: run oracle and simulation suites; exit 1 if any case fails.
"""

import argparse
from typing import List

from ..exceptions import EXIT_FAILURE, EXIT_OK
from ..verification import SUITES, SuiteOptions, all_passed, run_suite, write_cases
from .common import add_output_flags, add_run_flags, finish, logger, open_output, resolve_seed, resolve_threads


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="Check bounds against exact oracles and simulations")
    parser.add_argument("--suite", required=True,
                        help=f"Comma-separated suites: {', '.join(SUITES)}")
    parser.add_argument("--grid-size", type=int, default=None, help="Random pairs or instances")
    parser.add_argument("--trials", type=int, default=None, help="Trials for simulation suites")
    parser.add_argument("--n", type=int, default=None, help="Override n of simulation suites")
    add_run_flags(parser)
    add_output_flags(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, argv: List[str]) -> int:
    options = SuiteOptions(
        seed=resolve_seed(args),
        grid_size=args.grid_size,
        trials=args.trials,
        threads=resolve_threads(args),
        n=args.n,
    )
    names = [name.strip() for name in args.suite.split(",") if name.strip()]
    cases = []
    for name in names:
        cases.extend(run_suite(name, options))
    with open_output(args.out) as handle:
        write_cases(cases, handle, args.format)
    finish(args, argv, options.seed)
    passed = all_passed(cases)
    logger.info("verify_completed", suites=names, cases=len(cases), passed=passed)
    return EXIT_OK if passed else EXIT_FAILURE
