"""
Verification suites: exact oracle values and desk-scale simulations checked
against the closed-form bounds.

Every suite returns VerificationCase rows. A lower-bound check passes when
``oracle_value >= bound_value``; an upper-bound check when
``oracle_value <= bound_value``. ``margin`` is signed so that a
non-negative margin means the check holds.
"""

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, TextIO

import numpy as np
from scipy import sparse

from . import bounds, metrics, oracle
from .config import settings
from .dynamics import (
    OpinionState,
    force_initial,
    init_random_opinions,
    round_half_up,
    smp_round,
    smp_round_naive,
)
from .exceptions import UnknownSuiteError
from .models import VERIFY_FIELDS, BinomialSpec, EventSpec, ExperimentConfig, VerificationCase, format_value
from .monte_carlo import estimate_event, run_trials, stage_imbalances, sweep_seeded
from .rng_graph import GraphSample, SeedPath, derive_stream, sample_gnp
from .utils.log import get_logger

logger = get_logger("verification")

# Rounding slack for comparisons of quantities that can coincide exactly
TOLERANCE = 1e-12
PINSKER_TOLERANCE = 1e-14

# Sizes from which the asymptotic statements are checked
LEMMA1_MIN_N = 400
PROP2_MIN_N = 400
LEMMA2_MIN_N = 100
PROP8_MIN_N = 100
PROP1_MIN_N = 400


@dataclass(frozen=True)
class SuiteOptions:
    seed: int = 0
    grid_size: Optional[int] = None
    trials: Optional[int] = None
    threads: int = 1
    n: Optional[int] = None


def _params(**values: float) -> str:
    return ";".join(f"{key}={format_value(value)}" for key, value in values.items())


def lower_check(suite: str, case: str, params: str, oracle_value: float, bound_value: float,
                tolerance: float = TOLERANCE) -> VerificationCase:
    margin = oracle_value - bound_value
    return VerificationCase(
        suite=suite, case=case, params=params,
        oracle_value=oracle_value, bound_value=bound_value,
        margin=margin, passed=bool(margin >= -tolerance),
    )


def upper_check(suite: str, case: str, params: str, oracle_value: float, bound_value: float,
                tolerance: float = TOLERANCE) -> VerificationCase:
    margin = bound_value - oracle_value
    return VerificationCase(
        suite=suite, case=case, params=params,
        oracle_value=oracle_value, bound_value=bound_value,
        margin=margin, passed=bool(margin >= -tolerance),
    )


# Divergence inequalities
def pinsker_suite(options: SuiteOptions) -> List[VerificationCase]:
    size = options.grid_size or 10_000
    stream = derive_stream(SeedPath(options.seed, 0, 0))
    a_values = stream.random(size)
    b_values = 0.05 + 0.9 * stream.random(size)
    cases = []
    for index, (a, b) in enumerate(zip(a_values.tolist(), b_values.tolist())):
        divergence = bounds.binary_kl(a, b)
        params = _params(a=a, b=b)
        cases.append(lower_check("pinsker", f"pair-{index}/pinsker", params,
                                 divergence, bounds.pinsker_lower(a, b), PINSKER_TOLERANCE))
        cases.append(upper_check("pinsker", f"pair-{index}/reverse", params,
                                 divergence, bounds.reverse_pinsker_upper(a, b), PINSKER_TOLERANCE))
    identical = max(bounds.binary_kl(b, b) for b in b_values.tolist())
    cases.append(upper_check("pinsker", "identical-arguments", _params(pairs=size), identical, 0.0))
    return cases


# Binomial collisions
def lemma1_suite(options: SuiteOptions) -> List[VerificationCase]:
    cases = []
    for n in (400, 2500, 10_000):
        for lam in (0.5, 1.0, 2.0):
            p = lam / math.sqrt(n)
            for i in range(int(math.floor(lam * math.sqrt(n))) + 1):
                exact = oracle.collision_prob(n, p, i)
                lower = bounds.lemma1_collision_lower(n, lam, i).raw_value
                cases.append(lower_check("lemma1", f"n={n}/lambda={lam}/i={i}",
                                         _params(n=n, **{"lambda": lam}, i=i, n0=LEMMA1_MIN_N), exact, lower))
    return cases


def _psi(n: int) -> int:
    return int(math.ceil(math.sqrt(n) * math.sqrt(math.log(n))))


LARGE_N_GRID = (100, 400, 1600, 2500, 4900, 6400, 10_000)


def lemma2_suite(options: SuiteOptions) -> List[VerificationCase]:
    theta = 6.0
    cases = []
    for n in LARGE_N_GRID:
        if n < LEMMA2_MIN_N:
            continue
        psi = _psi(n)
        for lam in (1.0, 2.0):
            exact = oracle.collision_prob(n - psi, lam / math.sqrt(n), 0)
            upper = bounds.lemma2_collision_upper(n, psi, lam, theta).raw_value
            cases.append(upper_check("lemma2", f"n={n}/lambda={lam}",
                                     _params(n=n, psin=psi, **{"lambda": lam}, theta=theta), exact, upper))
    return cases


# Update probabilities
def prop1_suite(options: SuiteOptions) -> List[VerificationCase]:
    cases = []
    for n in (400, 2500, 10_000):
        atom = math.exp(oracle.log_pmf(BinomialSpec(trials=2 * n, p=0.5), n))
        for epsilon in (0.05, 0.1, 0.25, 0.5, 1.0, 1.5):
            alpha = bounds.alpha_for_epsilon(epsilon)
            exact = oracle.initial_imbalance_prob(n, alpha)
            params = _params(n=n, epsilon=epsilon, alpha=alpha)
            cases.append(lower_check("prop1", f"n={n}/epsilon={epsilon}", params, exact, 1.0 - epsilon))
            # the limit value is 1 - epsilon/2; lattice effects are within two central atoms
            cases.append(upper_check("prop1", f"n={n}/epsilon={epsilon}/calibration", params,
                                     abs(exact - (1.0 - epsilon / 2.0)), 2.0 * atom))
    return cases


def _update_rows(suite: str, case: str, params: str, n: int, imbalance: int, p: float,
                 bound_value: float, upper: bool) -> List[VerificationCase]:
    rows = []
    for own in (0, 1):
        result = oracle.equal_split_update_prob(n, imbalance, p, own)
        check = upper_check if upper else lower_check
        rows.append(check(suite, f"{case}/own={own}", params, result.exact, bound_value))
        if own == 0:
            rows.append(lower_check(suite, f"{case}/own=0/surrogate-slack", params, result.surrogate, result.exact))
    return rows


def prop2_suite(options: SuiteOptions) -> List[VerificationCase]:
    cases = []
    for n in (400, 2500):
        for alpha in (0.5, 1.0, 2.0):
            for lam in (0.5, 1.0, 2.0):
                imbalance = round_half_up(alpha * math.sqrt(n))
                bound = bounds.prop2_update_lower(n, alpha, lam).raw_value
                cases.extend(_update_rows(
                    "prop2", f"n={n}/alpha={alpha}/lambda={lam}",
                    _params(n=n, alpha=alpha, **{"lambda": lam}, imbalance=imbalance),
                    n, imbalance, lam / math.sqrt(n), bound, upper=False,
                ))
    return cases


def prop4_suite(options: SuiteOptions) -> List[VerificationCase]:
    cases = []
    for n in (400, 2500):
        for beta in (0.25, 0.5, 1.0):
            for lam in (0.5, 1.0, 2.0):
                imbalance = round_half_up(beta * n ** 0.75)
                bound = bounds.prop4_update_lower(beta, lam).raw_value
                cases.extend(_update_rows(
                    "prop4", f"n={n}/beta={beta}/lambda={lam}",
                    _params(n=n, beta=beta, **{"lambda": lam}, imbalance=imbalance),
                    n, imbalance, lam / math.sqrt(n), bound, upper=False,
                ))
    return cases


def prop8_suite(options: SuiteOptions) -> List[VerificationCase]:
    theta, lam = 6.0, 1.0
    cases = []
    for n in LARGE_N_GRID:
        if n < PROP8_MIN_N:
            continue
        psi = _psi(n)
        report = bounds.prop8_update_upper(n, psi, lam, theta)
        cases.extend(_update_rows(
            "prop8", f"n={n}",
            _params(n=n, psin=psi, **{"lambda": lam}, theta=theta, valid=report.valid),
            n, psi, lam / math.sqrt(n), report.raw_value, upper=True,
        ))
    return cases


# Chernoff machinery
def prop7_suite(options: SuiteOptions) -> List[VerificationCase]:
    cases = []
    for n in (100, 400, 1600):
        tau = math.sqrt(n) * math.sqrt(math.log(n))
        for label, b_n in (("sqrt", math.sqrt(n)), ("2sqrt", 2 * math.sqrt(n)), ("tau", tau), ("4sqrt", 4 * math.sqrt(n))):
            report = bounds.prop7_overshoot_bound(n, b_n, 0.5)
            exact = oracle.chernoff_mgf_bound_check(n, 0, 0.5, 0.5, n + b_n).exact_tail
            params = _params(n=n, bn=b_n, pupper=0.5)
            cases.append(upper_check("prop7", f"n={n}/bn={label}/exact", params, exact, report.raw_value))
            cases.append(upper_check("prop7", f"n={n}/bn={label}/pinsker", params,
                                     report.raw_value, report.components["pinsker_relaxed"]))
    return cases


def chernoff_suite(options: SuiteOptions) -> List[VerificationCase]:
    cases = []
    for n in (100, 400, 1600):
        below = oracle.chernoff_mgf_bound_check(n, 0, 0.3, 0.7, -1)
        cases.append(lower_check("chernoff", f"n={n}/below-support", _params(n=n, threshold=-1), below.exact_tail, 1.0))

        tau = math.sqrt(n) * math.sqrt(math.log(n))
        fair = oracle.chernoff_mgf_bound_check(n, 0, 0.5, 0.5, n + tau)
        kl_form = bounds.prop7_overshoot_bound(n, tau, 0.5).raw_value
        params = _params(n=n, threshold=n + tau)
        cases.append(upper_check("chernoff", f"n={n}/fair/tilted", params, fair.exact_tail, fair.analytic_bound))
        cases.append(upper_check("chernoff", f"n={n}/fair/divergence-form", params, fair.exact_tail, kl_form))

        imbalance = round_half_up(math.sqrt(n))
        phi = bounds.prop2_update_lower(n, 1.0, 1.0).raw_value
        prop3 = bounds.prop3_success_bound(n, 1.0, 1.0)
        threshold = prop3.components["threshold"]
        biased = oracle.chernoff_mgf_bound_check(n, imbalance, phi, phi, threshold)
        params = _params(n=n, a_n=imbalance, q=phi, threshold=threshold)
        cases.append(lower_check("chernoff", f"n={n}/first-round/tilted", params, biased.exact_tail, biased.analytic_bound))
        cases.append(lower_check("chernoff", f"n={n}/first-round/prop3", params, biased.exact_tail, prop3.raw_value))
    return cases


# Protocol properties
def _permuted(graph: GraphSample, perm: np.ndarray) -> GraphSample:
    """Graph with vertex a of the result playing the role of vertex perm[a]."""
    adjacency = sparse.csr_matrix(graph.adjacency[perm][:, perm])
    adjacency.sort_indices()
    return GraphSample(vertex_count=graph.vertex_count, adjacency=adjacency)


def _mismatches(left: OpinionState, right: OpinionState) -> int:
    return int(np.count_nonzero(left.opinions != right.opinions))


def dynamics_suite(options: SuiteOptions) -> List[VerificationCase]:
    instances = options.grid_size or 1000
    cases = []
    for index in range(instances):
        stream = derive_stream(SeedPath(options.seed, index, 0))
        agents = 2 * int(stream.integers(1, 17))
        p = float(stream.uniform(0.1, 0.9))
        graph = sample_gnp(agents, p, stream)
        state = init_random_opinions(agents, stream)
        updated = smp_round(state, graph)

        mismatches = _mismatches(updated, smp_round_naive(state, graph))
        mismatches += _mismatches(smp_round(state.flipped(), graph), updated.flipped())
        for unanimous in (force_initial(agents, 0), force_initial(0, agents)):
            mismatches += _mismatches(smp_round(unanimous, graph), unanimous)
        perm = stream.permutation(agents)
        relabeled = smp_round(OpinionState(state.opinions[perm]), _permuted(graph, perm))
        mismatches += _mismatches(relabeled, OpinionState(updated.opinions[perm]))

        cases.append(upper_check("dynamics", f"instance-{index}", _params(agents=agents, p=p),
                                 float(mismatches), 0.0, tolerance=0.0))
    return cases


# Desk-scale simulations
def prop6_suite(options: SuiteOptions) -> List[VerificationCase]:
    n = options.n or 2500
    gamma, lam = 0.5, 1.0
    trials = options.trials or 1000
    config = ExperimentConfig(n=n, lam=lam, rounds=1, initial_zeros=n + math.ceil(gamma * n),
                              master_seed=options.seed)
    report = estimate_event(config, EventSpec(kind="ge", round=1, threshold=2 * n), trials, options.threads)
    bound = bounds.prop6_consensus_bound(n, gamma, lam).clamped_probability
    half_width = (report.ci_high - report.ci_low) / 2.0
    return [lower_check("prop6", f"n={n}", _params(n=n, gamma=gamma, **{"lambda": lam}, trials=trials),
                        report.p_hat, bound - half_width)]


def theorem1_suite(options: SuiteOptions) -> List[VerificationCase]:
    n = options.n or 10_000
    trials = options.trials or 500
    config = ExperimentConfig(n=n, lam=1.0, rounds=3, master_seed=options.seed)
    report = estimate_event(config, EventSpec(kind="mcon", round=3), trials, options.threads)
    params = _params(n=n, **{"lambda": 1.0}, trials=trials, successes=report.successes)
    return [
        lower_check("theorem1", f"n={n}/p_hat", params, report.p_hat, settings.theorem1_min_p_hat, 0.0),
        lower_check("theorem1", f"n={n}/ci_low", params, report.ci_low, settings.theorem1_min_ci_low, 0.0),
    ]


def theorem2_suite(options: SuiteOptions) -> List[VerificationCase]:
    largest = options.n or 10_000
    sizes = [n for n in (400, 1600, 6400) if n < largest] + [largest]
    trials = options.trials or 500
    event = EventSpec(kind="con", round=2)
    reports = [
        estimate_event(sweep_seeded(ExperimentConfig(n=n, lam=1.0, rounds=2, master_seed=options.seed)),
                       event, trials, options.threads)
        for n in sizes
    ]
    cases = []
    for previous, current in zip(reports, reports[1:]):
        cases.append(upper_check("theorem2", f"n={previous.n}->{current.n}/non-increasing",
                                 _params(trials=trials), current.ci_low, previous.ci_high, 0.0))
    last = reports[-1]
    cases.append(upper_check("theorem2", f"n={last.n}/p_hat", _params(n=last.n, trials=trials),
                             last.p_hat, settings.theorem2_max_p_hat, 0.0))
    return cases


def stages_suite(options: SuiteOptions) -> List[VerificationCase]:
    n = options.n or 10_000
    trials = options.trials or 500
    config = ExperimentConfig(n=n, lam=1.0, rounds=2, master_seed=options.seed)
    trajectories = run_trials(config, trials, options.threads)
    all_rows = stage_imbalances(trajectories)
    zero_majority = stage_imbalances(trajectories, condition="zero-majority")
    params = _params(n=n, **{"lambda": 1.0}, trials=trials, conditioned=int(zero_majority.shape[0]))

    abs_median = float(np.median(np.abs(all_rows[:, 0]))) / math.sqrt(n)
    calibration = bounds.alpha_for_epsilon(1.0)
    cases = [upper_check("stages", "round0/abs-median", params,
                         abs(abs_median - calibration), 0.2 * calibration, 0.0)]
    if zero_majority.shape[0] == 0:
        return cases
    alpha_hat = zero_majority[:, 0] / math.sqrt(n)
    c0_median = float(np.median([bounds.c0(a, 1.0) for a in alpha_hat]))
    round1 = float(np.median(zero_majority[:, 1] / n ** 0.75))
    round2 = float(np.median(zero_majority[:, 2] / n))
    for case, value in (("round1/median-positive", round1), ("round2/median-positive", round2)):
        cases.append(VerificationCase(suite="stages", case=case, params=params,
                                      oracle_value=value, bound_value=0.0,
                                      margin=value, passed=value > 0.0))
    cases.append(lower_check("stages", "round1/median-vs-c0", params, round1, c0_median, 0.0))
    return cases


SUITES: Dict[str, Callable[[SuiteOptions], List[VerificationCase]]] = {
    "pinsker": pinsker_suite,
    "lemma1": lemma1_suite,
    "lemma2": lemma2_suite,
    "prop1": prop1_suite,
    "prop2": prop2_suite,
    "prop4": prop4_suite,
    "prop7": prop7_suite,
    "prop8": prop8_suite,
    "chernoff": chernoff_suite,
    "dynamics": dynamics_suite,
    "prop6": prop6_suite,
    "theorem1": theorem1_suite,
    "theorem2": theorem2_suite,
    "stages": stages_suite,
}

SIMULATION_SUITES = frozenset({"prop6", "theorem1", "theorem2", "stages"})


def run_suite(name: str, options: Optional[SuiteOptions] = None) -> List[VerificationCase]:
    """Run a registered suite and account for its outcomes."""
    suite = SUITES.get(name)
    if suite is None:
        raise UnknownSuiteError(name, list(SUITES))
    options = options or SuiteOptions()
    cases = suite(options)
    failed = sum(1 for case in cases if not case.passed)
    metrics.verify_cases_total.labels(suite=name, outcome="passed").inc(len(cases) - failed)
    metrics.verify_cases_total.labels(suite=name, outcome="failed").inc(failed)
    if failed:
        worst = min(cases, key=lambda case: case.margin)
        logger.warning("suite_failed", suite=name, cases=len(cases), failed=failed,
                       worst_case=worst.case, worst_margin=worst.margin)
    else:
        logger.info("suite_passed", suite=name, cases=len(cases))
    return cases


def all_passed(cases: Iterable[VerificationCase]) -> bool:
    return all(case.passed for case in cases)


def write_cases(cases: Iterable[VerificationCase], handle: TextIO, fmt: str = "csv") -> None:
    if fmt == "json":
        json.dump([case.model_dump() for case in cases], handle, indent=2)
        handle.write("\n")
        return
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(VERIFY_FIELDS)
    for case in cases:
        data = case.model_dump()
        writer.writerow([format_value(data[name]) for name in VERIFY_FIELDS])
