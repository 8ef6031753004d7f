"""
Trial orchestration, event estimation and parameter sweeps.

Trials are independent given their SeedPath, so results never depend on the
worker count: ``Pool.map`` preserves trial order and aggregation is a sum.
"""

import csv
import json
import math
from multiprocessing import Pool
from typing import Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np

from . import metrics
from .config import settings
from .dynamics import Trajectory, consensus_status, run_protocol
from .exceptions import InvalidParameterError
from .models import (
    ESTIMATE_FIELDS,
    STAGE_FIELDS,
    EstimateReport,
    EventSpec,
    ExperimentConfig,
    StageSummary,
    format_value,
)
from .rng_graph import mix_seed
from .utils.log import get_logger

logger = get_logger("monte_carlo")

STAGE_ROUNDS = (0, 1, 2)


def _run_one(job) -> Trajectory:
    config, trial_index = job
    return run_protocol(config, trial_index)


def run_trials(config: ExperimentConfig, trials: int, threads: int = 1) -> List[Trajectory]:
    """Trajectories for trial indices 0..trials-1, in order."""
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials}", field="trials")
    if threads < 1:
        raise InvalidParameterError(f"threads must be at least 1, got {threads}", field="threads")
    jobs = [(config, index) for index in range(trials)]
    if threads == 1 or trials == 1:
        results = [_run_one(job) for job in jobs]
    else:
        with Pool(processes=min(threads, trials)) as pool:
            results = pool.map(_run_one, jobs, chunksize=max(1, trials // (4 * threads)))
    graphs_per_trial = min(config.rounds, 1) if config.redraw == "fixed-graph" else config.rounds
    metrics.record_trials(trials, config.rounds, graphs_per_trial)
    return results


def event_holds(event: EventSpec, traj: Trajectory) -> bool:
    if event.kind == "con":
        return consensus_status(traj, event.round).con
    if event.kind == "mcon":
        return consensus_status(traj, event.round).mcon
    count = traj.zero_counts[event.round]
    if event.kind == "ge":
        return count >= event.threshold
    return count <= event.threshold


def wilson_interval(successes: int, trials: int, z: float = 1.96):
    """Wilson score interval for a binomial proportion, clamped to [0, 1].

    Returns (low, high) with low <= successes/trials <= high.
    """
    if trials < 1:
        raise InvalidParameterError(f"trials must be at least 1, got {trials}", field="trials")
    if not 0 <= successes <= trials:
        raise InvalidParameterError(f"successes {successes} outside [0, {trials}]", field="successes")
    if not z > 0:
        raise InvalidParameterError(f"z must be positive, got {z}", field="z")
    p_hat = successes / trials
    z2 = z * z
    denominator = 1.0 + z2 / trials
    center = (p_hat + z2 / (2 * trials)) / denominator
    half_width = z * math.sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4 * trials * trials)) / denominator
    low = min(max(0.0, center - half_width), p_hat)
    high = max(min(1.0, center + half_width), p_hat)
    return low, high


def summarize(config: ExperimentConfig, event: EventSpec, trajectories: Sequence[Trajectory], z: float) -> EstimateReport:
    successes = sum(1 for traj in trajectories if event_holds(event, traj))
    trials = len(trajectories)
    low, high = wilson_interval(successes, trials, z)
    return EstimateReport(
        n=config.n,
        lam=config.lam,
        xi=config.xi,
        rounds=config.rounds,
        redraw=config.redraw,
        event=event.label(),
        trials=trials,
        successes=successes,
        p_hat=successes / trials,
        ci_low=low,
        ci_high=high,
        master_seed=config.master_seed,
    )


def estimate_event(
    config: ExperimentConfig,
    event: EventSpec,
    trials: int,
    threads: int = 1,
    z: Optional[float] = None,
    trajectories: Optional[Sequence[Trajectory]] = None,
) -> EstimateReport:
    """Estimate P{event} from trials 0..trials-1 with a Wilson interval.

    Already computed ``trajectories`` of the same config are reused instead
    of re-running the trials.
    """
    event.check(config)
    z = settings.wilson_z if z is None else z
    if trajectories is None:
        trajectories = run_trials(config, trials, threads)
    trials = len(trajectories)
    report = summarize(config, event, trajectories, z)
    metrics.last_p_hat.set(report.p_hat)
    logger.info(
        "estimate_completed",
        n=config.n,
        event_label=report.event,
        trials=trials,
        successes=report.successes,
        p_hat=report.p_hat,
        master_seed=config.master_seed,
    )
    return report


def sweep_seeded(config: ExperimentConfig) -> ExperimentConfig:
    """Config with its master seed mixed with the config content fingerprint."""
    return config.model_copy(update={"master_seed": mix_seed(config.master_seed, config.fingerprint())})


def trajectory_sweep(
    configs: Sequence[ExperimentConfig],
    event: EventSpec,
    trials: int,
    threads: int = 1,
    z: Optional[float] = None,
) -> List[EstimateReport]:
    """estimate_event per config, in order, each on its own seed stream."""
    for config in configs:
        event.check(config)
    return [estimate_event(sweep_seeded(config), event, trials, threads, z) for config in configs]


def _summary(values: np.ndarray, round_index: int, scale: str) -> StageSummary:
    q05, q25, median, q75, q95 = np.quantile(values, [0.05, 0.25, 0.5, 0.75, 0.95])
    return StageSummary(
        round=round_index,
        scale=scale,
        trials=int(values.size),
        mean=float(values.mean()),
        q05=float(q05),
        q25=float(q25),
        median=float(median),
        q75=float(q75),
        q95=float(q95),
        abs_median=float(np.median(np.abs(values))),
    )


def imbalance_scales(n: int) -> Dict[str, float]:
    return {"sqrt_n": math.sqrt(n), "n_3_4": n ** 0.75, "n": float(n)}


def stage_imbalances(trajectories: Sequence[Trajectory], condition: Optional[str] = None) -> np.ndarray:
    """Matrix of N(X_l;0) - n for l = 0, 1, 2, one row per (selected) trial."""
    selected = [t for t in trajectories if condition is None or t.initial_majority == "zeros"]
    if not selected:
        return np.empty((0, len(STAGE_ROUNDS)))
    return np.array([[t.zero_counts[r] - t.n for r in STAGE_ROUNDS] for t in selected], dtype=np.float64)


def stage_statistics(
    config: ExperimentConfig,
    trials: int,
    threads: int = 1,
    condition: Optional[str] = None,
    trajectories: Optional[Sequence[Trajectory]] = None,
) -> List[StageSummary]:
    """Summaries of (N(X_l;0) - n)/scale for l = 0, 1, 2 and scales sqrt(n), n^(3/4), n.

    ``condition="zero-majority"`` keeps only trials whose initial state has a
    strict zero majority.
    """
    if config.rounds < 2:
        raise InvalidParameterError(f"stage statistics need at least 2 rounds, got {config.rounds}", field="rounds")
    if condition not in (None, "zero-majority"):
        raise InvalidParameterError(f"unknown condition {condition}", field="condition")
    if trajectories is None:
        trajectories = run_trials(config, trials, threads)
    imbalances = stage_imbalances(trajectories, condition)
    if imbalances.shape[0] == 0:
        raise InvalidParameterError("no trial satisfies the stage condition", field="condition")
    summaries = []
    for column, round_index in enumerate(STAGE_ROUNDS):
        for scale, divisor in imbalance_scales(config.n).items():
            summaries.append(_summary(imbalances[:, column] / divisor, round_index, scale))
    logger.info("stage_statistics_completed", n=config.n, trials=int(imbalances.shape[0]), condition=condition)
    return summaries


def write_reports(reports: Iterable[EstimateReport], handle: TextIO, fmt: str = "csv") -> None:
    """EstimateReports as CSV (documented header) or as a JSON list with the same field names."""
    if fmt == "json":
        json.dump([report.row() for report in reports], handle, indent=2)
        handle.write("\n")
        return
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(ESTIMATE_FIELDS)
    for report in reports:
        writer.writerow(report.csv_row())


def write_stage_summaries(summaries: Iterable[StageSummary], handle: TextIO, fmt: str = "csv") -> None:
    if fmt == "json":
        json.dump([summary.model_dump() for summary in summaries], handle, indent=2)
        handle.write("\n")
        return
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(STAGE_FIELDS)
    for summary in summaries:
        data = summary.model_dump()
        writer.writerow([format_value(data[name]) for name in STAGE_FIELDS])
