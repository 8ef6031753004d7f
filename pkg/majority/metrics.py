"""
Prometheus metrics for Majority Lab.
Counts trials, rounds, bound evaluations and verification outcomes.
"""

from pathlib import Path
from typing import Union

from prometheus_client import CollectorRegistry, Counter, Gauge, generate_latest, write_to_textfile

# Create isolated registry to avoid duplicate registration across test re-imports
registry = CollectorRegistry()

trials_total = Counter(
    "majority_trials_total",
    "Protocol executions completed",
    registry=registry
)

rounds_total = Counter(
    "majority_rounds_total",
    "Communication rounds simulated",
    registry=registry
)

graphs_sampled_total = Counter(
    "majority_graphs_sampled_total",
    "Erdos-Renyi graphs sampled for protocol rounds",
    registry=registry
)

bound_evaluations_total = Counter(
    "majority_bound_evaluations_total",
    "Closed-form bound evaluations",
    ["name"],
    registry=registry
)

verify_cases_total = Counter(
    "majority_verify_cases_total",
    "Verification cases evaluated",
    ["suite", "outcome"],
    registry=registry
)

last_p_hat = Gauge(
    "majority_last_p_hat",
    "Empirical probability of the most recent estimate",
    registry=registry
)


def record_trials(trials: int, rounds: int, graphs_per_trial: int) -> None:
    """Account for a finished batch of protocol executions."""
    trials_total.inc(trials)
    rounds_total.inc(trials * rounds)
    graphs_sampled_total.inc(trials * graphs_per_trial)


def render() -> bytes:
    """Current registry in Prometheus text exposition format."""
    return generate_latest(registry)


def write_metrics(path: Union[str, Path]) -> None:
    """Write the registry to ``path`` for the node-exporter textfile collector."""
    write_to_textfile(str(path), registry)
