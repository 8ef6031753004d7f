"""
Closed-form constants and probability bounds for majority dynamics on
G(2n, λ/n^ξ), each evaluated with domain validation and clamping.

Hard domain violations raise InvalidParameterError. Failed preconditions of
the underlying result only mark the report ``valid=False`` with a reason:
the value is still computed and returned.
"""

import csv
import json
import math
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, TextIO, Tuple

import numpy as np
from scipy import optimize, special

from . import metrics
from .exceptions import InvalidParameterError
from .models import BOUND_FIELDS, BoundReport
from .utils.log import get_logger

logger = get_logger("bounds")

ALPHA_XTOL = 1e-12
PSI_P_TOLERANCE = 1e-12


def _require(condition: bool, message: str, field: str) -> None:
    if not condition:
        raise InvalidParameterError(message, field=field)


def _finish(report: BoundReport) -> BoundReport:
    metrics.bound_evaluations_total.labels(name=report.name).inc()
    if not report.valid:
        logger.warning("bound_precondition_failed", name=report.name, params=report.params, reason=report.reason)
    elif report.vacuous:
        logger.warning("bound_vacuous", name=report.name, params=report.params, raw_value=report.raw_value)
    return report


def _exp(x: float) -> float:
    with np.errstate(over="ignore"):
        return float(np.exp(x))


def _reasons(*checks: Tuple[bool, str]) -> Tuple[bool, Optional[str]]:
    failed = [message for ok, message in checks if not ok]
    return (not failed, "; ".join(failed) or None)


# Divergences
def binary_kl(a: float, b: float) -> float:
    """D(a||b) between Ber(a) and Ber(b), with 0 log 0 = 0 and +inf for singular cases."""
    _require(0.0 <= a <= 1.0, f"a = {a} outside [0, 1]", "a")
    _require(0.0 <= b <= 1.0, f"b = {b} outside [0, 1]", "b")
    return float(special.rel_entr(a, b) + special.rel_entr(1.0 - a, 1.0 - b))


def pinsker_lower(a: float, b: float) -> float:
    """2(a-b)^2 <= D(a||b)."""
    return 2.0 * (a - b) ** 2


def reverse_pinsker_upper(a: float, b: float) -> float:
    """D(a||b) <= 2(a-b)^2 / min(b, 1-b), for b strictly inside (0, 1)."""
    _require(0.0 < b < 1.0, f"b = {b} must lie strictly inside (0, 1)", "b")
    return 2.0 * (a - b) ** 2 / min(b, 1.0 - b)


# Constants
def c0(alpha: float, lam: float) -> float:
    """C0(α,λ) = (π/8e^4)·([αλ - sqrt(2αλ)]_+ + 1)·e^(-4/λ)/λ."""
    _require(alpha > 0, f"alpha must be positive, got {alpha}", "alpha")
    _require(lam > 0, f"lambda must be positive, got {lam}", "lambda")
    positive_part = max(alpha * lam - math.sqrt(2.0 * alpha * lam), 0.0)
    return math.pi / (8.0 * math.exp(4.0)) * (positive_part + 1.0) * math.exp(-4.0 / lam) / lam


def c1(beta: float, lam: float) -> float:
    """C1(β,λ) = (πβ)^(3/2)·e^(-(4+2β)/λ)·e^(-4β²λ)/(e^6·sqrt(λ))."""
    _require(beta > 0, f"beta must be positive, got {beta}", "beta")
    _require(lam > 0, f"lambda must be positive, got {lam}", "lambda")
    log_value = (
        1.5 * math.log(math.pi * beta)
        - (4.0 + 2.0 * beta) / lam
        - 4.0 * beta * beta * lam
        - 6.0
        - 0.5 * math.log(lam)
    )
    return math.exp(log_value)


def alpha_for_epsilon(epsilon: float) -> float:
    """α with P{|Z| >= α} = 1 - ε/2 for Z ~ N(0, 1/2).

    For that variance P{|Z| >= α} = erfc(α); the root is bracketed in
    [0, 10] and found by bisection.
    """
    _require(0.0 < epsilon < 2.0, f"epsilon must lie in (0, 2), got {epsilon}", "epsilon")
    target = 1.0 - epsilon / 2.0
    return float(optimize.bisect(lambda a: special.erfc(a) - target, 0.0, 10.0, xtol=ALPHA_XTOL))


def stirling_envelope(n: int) -> Tuple[float, float]:
    """(log lower, log upper) with sqrt(2πn)·n^n·e^-n <= n! <= e·sqrt(n)·n^n·e^-n."""
    _require(n >= 1 and float(n).is_integer(), f"n must be a positive integer, got {n}", "n")
    base = n * math.log(n) - n
    return 0.5 * math.log(2.0 * math.pi * n) + base, 1.0 + 0.5 * math.log(n) + base


def _check_n(n: float) -> None:
    _require(n >= 1, f"n must be at least 1, got {n}", "n")


def _check_lambda(lam: float) -> None:
    _require(lam > 0, f"lambda must be positive, got {lam}", "lambda")


def _delta_n(n: float, theta: float) -> float:
    """δn from n^δn = sqrt(log(n^θ))."""
    return math.log(theta * math.log(n)) / (2.0 * math.log(n))


# Update probabilities after the first and second rounds
def prop2_update_lower(n: float, alpha: float, lam: float) -> BoundReport:
    """1/2 + C0(α,λ)/n^(1/4): lower bound on deciding for the √n-scale majority."""
    _check_n(n)
    constant = c0(alpha, lam)
    return _finish(BoundReport.probability(
        "prop2",
        {"n": n, "alpha": alpha, "lambda": lam},
        0.5 + constant / n ** 0.25,
        components={"c0": constant},
    ))


def prop4_update_lower(beta: float, lam: float) -> BoundReport:
    """1/2 + C1(β,λ): lower bound on deciding for the n^(3/4)-scale majority."""
    constant = c1(beta, lam)
    return _finish(BoundReport.probability(
        "prop4",
        {"beta": beta, "lambda": lam},
        0.5 + constant,
        components={"c1": constant},
    ))


def prop3_success_bound(n: float, alpha: float, lam: float) -> BoundReport:
    """1 - exp(-C0²·sqrt(n)); threshold n + C0·n^(3/4) rounded half up."""
    _check_n(n)
    constant = c0(alpha, lam)
    raw = -math.expm1(-constant * constant * math.sqrt(n))
    return _finish(BoundReport.probability(
        "prop3",
        {"n": n, "alpha": alpha, "lambda": lam},
        raw,
        components={"c0": constant, "threshold": float(math.floor(n + constant * n ** 0.75 + 0.5))},
    ))


def prop5_success_bound(n: float, beta: float, lam: float) -> BoundReport:
    """1 - exp(-C1²·n); threshold n + C1·n rounded half up."""
    _check_n(n)
    constant = c1(beta, lam)
    raw = -math.expm1(-constant * constant * n)
    return _finish(BoundReport.probability(
        "prop5",
        {"n": n, "beta": beta, "lambda": lam},
        raw,
        components={"c1": constant, "threshold": float(math.floor(n + constant * n + 0.5))},
    ))


def prop6_consensus_bound(n: float, gamma: float, lam: float, xi: float = 0.5) -> BoundReport:
    """1 - 2n·sqrt((1+γ)/(1-γ))·exp(-λγ²·n^(1-ξ)): consensus after one round from a γn majority."""
    _check_n(n)
    _check_lambda(lam)
    _require(0.0 < gamma < 1.0, f"gamma must lie in (0, 1), got {gamma}", "gamma")
    _require(0.5 <= xi < 1.0, f"xi must lie in [1/2, 1), got {xi}", "xi")
    log_failure = (
        math.log(2.0 * n)
        + 0.5 * (math.log1p(gamma) - math.log1p(-gamma))
        - lam * gamma * gamma * n ** (1.0 - xi)
    )
    raw = -float(np.expm1(log_failure)) if log_failure < 700 else -math.inf
    return _finish(BoundReport.probability(
        "prop6",
        {"n": n, "gamma": gamma, "lambda": lam, "xi": xi},
        raw,
        components={"forced_zeros": float(n + math.ceil(gamma * n)), "log_failure": log_failure},
    ))


def prop7_overshoot_bound(n: float, b_n: float, p_upper: float) -> BoundReport:
    """exp(-2n·D(1/2 + Bn/2n || Pn)): the zero count cannot jump past n + Bn in one round."""
    _check_n(n)
    _require(b_n > 0, f"b_n must be positive, got {b_n}", "bn")
    _require(0.0 < p_upper < 1.0, f"p_upper must lie in (0, 1), got {p_upper}", "pupper")
    level = 0.5 + b_n / (2.0 * n)
    _require(level <= 1.0, f"1/2 + Bn/2n = {level} exceeds 1", "bn")
    divergence = binary_kl(level, p_upper)
    valid, reason = _reasons((level >= p_upper, "threshold 1/2 + Bn/2n lies below Pn"))
    return _finish(BoundReport.probability(
        "prop7",
        {"n": n, "bn": b_n, "pupper": p_upper},
        _exp(-2.0 * n * divergence),
        valid=valid,
        reason=reason,
        components={
            "level": level,
            "divergence": divergence,
            "pinsker_relaxed": _exp(-4.0 * n * (level - p_upper) ** 2),
        },
    ))


def prop8_update_upper(n: float, psi_n: float, lam: float, theta: float) -> BoundReport:
    """1/2 + 60·ψn·pn·sqrt(θ log n)/(λ·n^(1/4)), equivalently 1/2 + 60ψn·pn/(λ·n^(1/4-δn))."""
    _require(n > 1, f"n must exceed 1, got {n}", "n")
    _check_lambda(lam)
    _require(psi_n > 0, f"psi_n must be positive, got {psi_n}", "psin")
    p_n = lam / math.sqrt(n)
    psi_p = psi_n * p_n
    theta_log_n = theta * math.log(n)
    valid, reason = _reasons(
        (psi_p >= 1.0 - PSI_P_TOLERANCE, f"psi_n*p_n = {psi_p!r} < 1"),
        (theta > 5, f"theta = {theta} <= 5"),
        (theta_log_n > 1, f"theta*log(n) = {theta_log_n!r} <= 1"),
    )
    components = {"p_n": p_n, "psi_p": psi_p}
    if theta_log_n > 0:
        delta = _delta_n(n, theta)
        components["delta_n"] = delta
        components["alt_form"] = 0.5 + 60.0 * psi_p / (lam * n ** (0.25 - delta))
    raw = 0.5 + 60.0 * psi_p * math.sqrt(max(theta_log_n, 0.0)) / (lam * n ** 0.25)
    return _finish(BoundReport.probability(
        "prop8",
        {"n": n, "psin": psi_n, "lambda": lam, "theta": theta},
        raw,
        valid=valid,
        reason=reason,
        components=components,
    ))


def prop9_consensus_upper(n: float, c_n: float, lam: float) -> BoundReport:
    """exp(-(n·Cn²/(2(n+Cn)))·exp(-32λCn²/(sqrt(n)(n-Cn)))): no consensus in a single round."""
    _check_n(n)
    _check_lambda(lam)
    _require(c_n >= 0, f"c_n must be non-negative, got {c_n}", "cn")
    _require(c_n < n, f"c_n = {c_n} must be below n = {n}", "cn")
    valid, reason = _reasons((c_n <= n / 2.0, f"c_n = {c_n} exceeds n/2"))
    if c_n == 0:
        raw = 1.0
    else:
        log_rate = (
            math.log(n) + 2.0 * math.log(c_n) - math.log(2.0 * (n + c_n))
            - 32.0 * lam * c_n * c_n / (math.sqrt(n) * (n - c_n))
        )
        raw = _exp(-_exp(log_rate))
    return _finish(BoundReport.probability(
        "prop9",
        {"n": n, "cn": c_n, "lambda": lam},
        raw,
        valid=valid,
        reason=reason,
    ))


# Collision probabilities of two independent binomials
def lemma1_collision_lower(n: float, lam: float, i: float) -> BoundReport:
    """(π/e^4)·e^(-4/λ)/(λ·n^(1/4))·exp(-i²/(λ·sqrt(n))) for 0 <= i <= λ·sqrt(n)."""
    _check_n(n)
    _check_lambda(lam)
    _require(0 <= i <= lam * math.sqrt(n), f"i = {i} outside [0, lambda*sqrt(n)]", "i")
    value = (
        math.pi / math.exp(4.0) * math.exp(-4.0 / lam) / (lam * n ** 0.25)
        * math.exp(-i * i / (lam * math.sqrt(n)))
    )
    return _finish(BoundReport.probability("lemma1", {"n": n, "lambda": lam, "i": i}, value))


def lemma2_collision_upper(n: float, psi_n: float, lam: float, theta: float) -> BoundReport:
    """15·sqrt(θ log n)/(λ·n^(1/4)) = 15/(λ·n^(1/4-δn))."""
    _require(n > 1, f"n must exceed 1, got {n}", "n")
    _check_lambda(lam)
    _require(n - psi_n >= 1, f"N = n - psi_n = {n - psi_n} must be at least 1", "psin")
    theta_log_n = theta * math.log(n)
    valid, reason = _reasons(
        (theta > 5, f"theta = {theta} <= 5"),
        (theta_log_n > 1, f"theta*log(n) = {theta_log_n!r} <= 1"),
    )
    components = {"N": float(n - psi_n)}
    if theta_log_n > 0:
        delta = _delta_n(n, theta)
        components["delta_n"] = delta
        components["alt_form"] = 15.0 / (lam * n ** (0.25 - delta))
    raw = 15.0 * math.sqrt(max(theta_log_n, 0.0)) / (lam * n ** 0.25)
    return _finish(BoundReport.probability(
        "lemma2",
        {"n": n, "psin": psi_n, "lambda": lam, "theta": theta},
        raw,
        valid=valid,
        reason=reason,
        components=components,
    ))


# Three-round chains
def theorem2_total_bound(n: float, lam: float, rho: float, kappa: float, theta: float) -> BoundReport:
    """Sum of the three failure terms bounding P{Con(2)}, with σn and τn echoed."""
    _require(n > 1, f"n must exceed 1, got {n}", "n")
    _check_lambda(lam)
    _require(kappa > 0, f"kappa must be positive, got {kappa}", "kappa")
    _require(rho > 0, f"rho must be positive, got {rho}", "rho")
    _require(theta > 0, f"theta must be positive, got {theta}", "theta")
    log_n = math.log(n)
    valid, reason = _reasons(
        (rho < 1.5, f"rho = {rho} not in (0, 3/2)"),
        (theta > 5, f"theta = {theta} <= 5"),
    )
    sigma = n ** 0.75 / math.sqrt(64.0 * lam) * math.sqrt(rho * log_n)
    tau = math.sqrt(n) / math.sqrt(64.0 * lam) * math.sqrt(kappa * log_n)
    log_two_n = math.log(2.0 * n)
    first = _exp(log_two_n - rho / (256.0 * lam) * log_n * n ** (1.5 - rho))
    second = _exp(log_two_n - theta * kappa / lam * log_n * log_n * math.sqrt(n))
    third = _exp(-kappa / (64.0 * lam) * log_n)
    return _finish(BoundReport.probability(
        "thm2",
        {"n": n, "lambda": lam, "rho": rho, "kappa": kappa, "theta": theta},
        first + second + third,
        valid=valid,
        reason=reason,
        components={
            "addend_sigma": first,
            "addend_theta": second,
            "addend_tau": third,
            "sigma_n": sigma,
            "tau_n": tau,
        },
    ))


def theorem1_chain_bound(n: float, lam: float, epsilon: float) -> BoundReport:
    """Product of the stage probabilities behind three-round majority consensus.

    α = α(ε), β = C0(α,λ), γ = C1(β,λ); stages: initial imbalance (1-ε),
    first round (prop3), second round (prop5), third round (prop6 with γ).
    """
    alpha = alpha_for_epsilon(epsilon)
    beta = c0(alpha, lam)
    gamma = c1(beta, lam)
    stages = {
        "initial": max(0.0, 1.0 - epsilon),
        "round1": prop3_success_bound(n, alpha, lam).clamped_probability,
        "round2": prop5_success_bound(n, beta, lam).clamped_probability,
        "round3": prop6_consensus_bound(n, gamma, lam).clamped_probability,
    }
    return _finish(BoundReport.probability(
        "thm1",
        {"n": n, "lambda": lam, "epsilon": epsilon},
        float(np.prod(list(stages.values()))),
        components={"alpha": alpha, "beta": beta, "gamma": gamma, **stages},
    ))


def _constant_report(name: str, params: Dict[str, float], value: float) -> BoundReport:
    return _finish(BoundReport(name=name, params=params, raw_value=value))


def _stirling_report(n: float) -> BoundReport:
    log_lower, log_upper = stirling_envelope(int(n) if float(n).is_integer() else n)
    return _finish(BoundReport(
        name="stirling",
        params={"n": n},
        raw_value=float(special.gammaln(n + 1.0)),
        components={"log_lower": log_lower, "log_upper": log_upper},
    ))


class BoundEntry(NamedTuple):
    evaluate: Callable[..., BoundReport]
    params: Tuple[str, ...]


# name -> evaluator taking the listed CLI parameters in order
BOUND_REGISTRY: Dict[str, BoundEntry] = {
    "c0": BoundEntry(lambda a, l: _constant_report("c0", {"alpha": a, "lambda": l}, c0(a, l)), ("alpha", "lambda")),
    "c1": BoundEntry(lambda b, l: _constant_report("c1", {"beta": b, "lambda": l}, c1(b, l)), ("beta", "lambda")),
    "alpha": BoundEntry(lambda e: _constant_report("alpha", {"epsilon": e}, alpha_for_epsilon(e)), ("epsilon",)),
    "kl": BoundEntry(lambda a, b: _constant_report("kl", {"a": a, "b": b}, binary_kl(a, b)), ("a", "b")),
    "stirling": BoundEntry(_stirling_report, ("n",)),
    "prop2": BoundEntry(prop2_update_lower, ("n", "alpha", "lambda")),
    "prop3": BoundEntry(prop3_success_bound, ("n", "alpha", "lambda")),
    "prop4": BoundEntry(prop4_update_lower, ("beta", "lambda")),
    "prop5": BoundEntry(prop5_success_bound, ("n", "beta", "lambda")),
    "prop6": BoundEntry(prop6_consensus_bound, ("n", "gamma", "lambda", "xi")),
    "prop7": BoundEntry(prop7_overshoot_bound, ("n", "bn", "pupper")),
    "prop8": BoundEntry(prop8_update_upper, ("n", "psin", "lambda", "theta")),
    "prop9": BoundEntry(prop9_consensus_upper, ("n", "cn", "lambda")),
    "lemma1": BoundEntry(lemma1_collision_lower, ("n", "lambda", "i")),
    "lemma2": BoundEntry(lemma2_collision_upper, ("n", "psin", "lambda", "theta")),
    "thm1": BoundEntry(theorem1_chain_bound, ("n", "lambda", "epsilon")),
    "thm2": BoundEntry(theorem2_total_bound, ("n", "lambda", "rho", "kappa", "theta")),
}


# Parameters that may be omitted
PARAM_DEFAULTS: Dict[str, float] = {"xi": 0.5, "theta": 6.0}


def evaluate(name: str, **params: float) -> BoundReport:
    """Evaluate a registered bound from keyword parameters named as on the CLI."""
    entry = BOUND_REGISTRY.get(name)
    if entry is None:
        raise InvalidParameterError(f"unknown bound '{name}'", field="which")
    params = {**PARAM_DEFAULTS, **params}
    missing = [p for p in entry.params if p not in params]
    if missing:
        raise InvalidParameterError(
            f"bound '{name}' needs {', '.join('--' + p for p in missing)}",
            field=missing[0],
        )
    return entry.evaluate(*(params[p] for p in entry.params))


def evaluate_many(name: str, grid: List[Dict[str, float]]) -> List[BoundReport]:
    reports = [evaluate(name, **point) for point in grid]
    logger.info("bounds_evaluated", name=name, count=len(reports))
    return reports


def write_bound_reports(reports: Iterable[BoundReport], handle: TextIO, fmt: str = "csv") -> None:
    """CSV with component rows, or a JSON list of the same rows and field names."""
    if fmt == "json":
        rows = [row for report in reports for row in report.json_rows()]
        json.dump(rows, handle, indent=2, allow_nan=False)
        handle.write("\n")
        return
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(BOUND_FIELDS)
    for report in reports:
        writer.writerows(report.csv_rows())
