"""
bounds: evaluate a registered constant or bound over a parameter grid.
"""

import argparse
import itertools
from typing import Dict, List

from ..bounds import BOUND_REGISTRY, evaluate_many, write_bound_reports
from .common import add_output_flags, finish, logger, open_output, parse_grid

# CLI parameter -> help text; every parameter accepts grid syntax
PARAMETERS: Dict[str, str] = {
    "n": "Half the number of agents",
    "alpha": "Initial imbalance scale α",
    "beta": "Second-round imbalance scale β",
    "gamma": "Majority fraction γ in (0, 1)",
    "lambda": "Edge-density constant λ",
    "xi": "Edge probability exponent ξ (default 0.5)",
    "epsilon": "Failure budget ε",
    "a": "First Bernoulli parameter",
    "b": "Second Bernoulli parameter",
    "bn": "Overshoot Bn",
    "pupper": "Upper bound Pn on the update probability",
    "psin": "Imbalance ψn",
    "theta": "Exponent θ",
    "cn": "Imbalance Cn",
    "i": "Collision offset",
    "rho": "Exponent ρ in (0, 3/2)",
    "kappa": "Constant κ",
}


def register(subparsers) -> None:
    parser = subparsers.add_parser("bounds", help="Evaluate closed-form constants and bounds", allow_abbrev=False)
    parser.add_argument("--which", required=True, choices=sorted(BOUND_REGISTRY), help="Bound to evaluate")
    for name, text in PARAMETERS.items():
        parser.add_argument(f"--{name}", dest=name, default=None,
                            help=f"{text}: a,b,c | start:stop:log10 | start:stop:log2 | start:stop:step")
    add_output_flags(parser)
    parser.set_defaults(handler=run)


def expand(args: argparse.Namespace) -> List[Dict[str, float]]:
    """Cartesian product of the grids of the parameters the bound takes."""
    entry = BOUND_REGISTRY[args.which]
    ignored = [name for name in PARAMETERS if getattr(args, name) is not None and name not in entry.params]
    if ignored:
        logger.warning("bounds_parameters_ignored", which=args.which, parameters=ignored)
    names = [name for name in entry.params if getattr(args, name) is not None]
    grids = [parse_grid(getattr(args, name), f"--{name}") for name in names]
    return [dict(zip(names, point)) for point in itertools.product(*grids)]


def run(args: argparse.Namespace, argv: List[str]) -> int:
    reports = evaluate_many(args.which, expand(args))
    with open_output(args.out) as handle:
        write_bound_reports(reports, handle, args.format)
    return finish(args, argv)
