"""
Exact binomial computations used as ground truth for the bounds module.

All sums run in log space. Supports larger than ``settings.oracle_exact_limit``
are truncated to the central quantile range leaving at most
``settings.oracle_tail_mass`` outside on each side; the dropped mass is
reported with the result.
"""

import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np
from scipy import optimize, special, stats

from .config import settings
from .exceptions import InvalidParameterError
from .models import BinomialSpec
from .rng_graph import SeedPath, derive_stream
from .utils.log import get_logger

logger = get_logger("oracle")


def _spec(trials: int, p: float) -> BinomialSpec:
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"probability {p!r} outside [0, 1]", field="p")
    if trials < 0:
        raise InvalidParameterError(f"trials must be non-negative, got {trials}", field="trials")
    return BinomialSpec(trials=trials, p=p)


def _log_pmf_array(spec: BinomialSpec, k: np.ndarray) -> np.ndarray:
    n, p = spec.trials, spec.p
    return (
        special.gammaln(n + 1.0) - special.gammaln(k + 1.0) - special.gammaln(n - k + 1.0)
        + special.xlogy(k, p) + special.xlog1py(n - k, -p)
    )


def log_pmf(spec: BinomialSpec, k: int) -> float:
    """log P{Bin(spec.trials, spec.p) = k}; exact point masses for p in {0, 1}."""
    if not 0 <= k <= spec.trials:
        raise InvalidParameterError(f"k = {k} outside [0, {spec.trials}]", field="k")
    return float(_log_pmf_array(spec, np.asarray(float(k))))


@dataclass(frozen=True)
class Support:
    """log-PMF over k = low..high and the probability mass left outside."""
    low: int
    log_pmf: np.ndarray
    dropped_mass: float

    @property
    def high(self) -> int:
        return self.low + self.log_pmf.size - 1


def support(spec: BinomialSpec) -> Support:
    """Full support, or the truncated central range for large binomials."""
    n, p = spec.trials, spec.p
    low, high, dropped = 0, n, 0.0
    if n > settings.oracle_exact_limit and 0.0 < p < 1.0:
        tail = settings.oracle_tail_mass
        low = max(0, int(stats.binom.ppf(tail, n, p)) - 1)
        high = min(n, int(stats.binom.isf(tail, n, p)) + 1)
        dropped = float(stats.binom.cdf(low - 1, n, p) + stats.binom.sf(high, n, p))
        logger.debug("support_truncated", trials=n, p=p, low=low, high=high, dropped_mass=dropped)
    k = np.arange(low, high + 1, dtype=np.float64)
    return Support(low=low, log_pmf=_log_pmf_array(spec, k), dropped_mass=dropped)


def _log_sf(sup: Support) -> np.ndarray:
    """log P{X >= k} for k = low..high (restricted to the kept support)."""
    return np.logaddexp.accumulate(sup.log_pmf[::-1])[::-1]


def collision_prob(n: int, p: float, i: int) -> float:
    """P{X + i = Y} for independent X, Y ~ Bin(n, p)."""
    if i < 0:
        raise InvalidParameterError(f"i must be non-negative, got {i}", field="i")
    if i > n:
        return 0.0
    sup = support(_spec(n, p))
    # X = l, Y = l + i with both inside the kept support
    overlap = sup.log_pmf.size - i
    if overlap <= 0:
        return 0.0
    terms = sup.log_pmf[:overlap] + sup.log_pmf[i:]
    return float(min(1.0, np.exp(special.logsumexp(terms))))


def prob_at_least(a: int, b: int, p: float, shift: int = 0) -> Tuple[float, float]:
    """P{X >= Y + shift} for independent X ~ Bin(a, p), Y ~ Bin(b, p).

    Returns (probability, dropped support mass).
    """
    x = support(_spec(a, p))
    y = support(_spec(b, p))
    log_sf = _log_sf(x)
    needed = np.arange(y.low, y.high + 1) + shift
    tail = np.where(
        needed <= x.low,
        0.0,
        np.where(needed > x.high, -np.inf, log_sf[np.clip(needed - x.low, 0, log_sf.size - 1)]),
    )
    total = special.logsumexp(y.log_pmf + tail)
    return float(min(1.0, max(0.0, np.exp(total)))), x.dropped_mass + y.dropped_mass


@dataclass(frozen=True)
class UpdateProbability:
    """Probability that an agent's next opinion is 0."""
    exact: float
    surrogate: float
    truncated_mass: float

    @property
    def slack(self) -> float:
        return self.surrogate - self.exact


def update_to_zero_exact(own: int, zeros: int, ones: int, p: float) -> UpdateProbability:
    """P{agent decides 0} when ``zeros``/``ones`` agents (itself included) hold 0/1.

    A 0-agent keeps 0 on ties: P{Bin(zeros-1, p) >= Bin(ones, p)}.
    A 1-agent needs a strict zero majority: P{Bin(zeros, p) > Bin(ones-1, p)}.
    The surrogate adds one phantom zero message to a 0-agent's tally; for a
    1-agent it coincides with the exact event.
    """
    if own not in (0, 1):
        raise InvalidParameterError(f"own opinion must be 0 or 1, got {own}", field="own")
    if zeros < 0 or ones < 0 or zeros + ones < 1:
        raise InvalidParameterError("counts must be non-negative with at least one agent", field="counts")
    if own == 0:
        if zeros < 1:
            raise InvalidParameterError("a 0-agent requires zeros >= 1", field="zeros")
        exact, dropped = prob_at_least(zeros - 1, ones, p, shift=0)
        surrogate, _ = prob_at_least(zeros - 1, ones, p, shift=-1)
    else:
        if ones < 1:
            raise InvalidParameterError("a 1-agent requires ones >= 1", field="ones")
        exact, dropped = prob_at_least(zeros, ones - 1, p, shift=1)
        surrogate = exact
    if dropped > 0:
        logger.warning("oracle_truncated", own=own, zeros=zeros, ones=ones, p=p, truncated_mass=dropped)
    return UpdateProbability(exact=exact, surrogate=surrogate, truncated_mass=dropped)


def equal_split_update_prob(n: int, imbalance: int, p: float, own: int) -> UpdateProbability:
    """update_to_zero_exact with n + imbalance zeros and n - imbalance ones."""
    if abs(imbalance) > n:
        raise InvalidParameterError(f"|imbalance| = {abs(imbalance)} exceeds n = {n}", field="imbalance")
    return update_to_zero_exact(own, n + imbalance, n - imbalance, p)


def initial_imbalance_prob(n: int, alpha: float) -> float:
    """P{|N(X0;0) - n| >= α·sqrt(n)} for a fair-coin state of 2n agents."""
    if n < 1:
        raise InvalidParameterError(f"n must be positive, got {n}", field="n")
    if alpha < 0:
        raise InvalidParameterError(f"alpha must be non-negative, got {alpha}", field="alpha")
    sup = support(_spec(2 * n, 0.5))
    k = np.arange(sup.low, sup.high + 1)
    far = np.abs(k - n) >= alpha * math.sqrt(n)
    if not far.any():
        return 0.0
    return float(min(1.0, np.exp(special.logsumexp(sup.log_pmf[far]))))


@dataclass(frozen=True)
class ChernoffCheck:
    """Tail P{S >= threshold} next to its exponential-tilt bound."""
    exact_tail: float
    analytic_bound: float
    tail: Literal["upper", "lower"]
    mode: Literal["exact", "monte-carlo"]


def _sum_pmf(n: int, a_n: int, q0: float, q1: float) -> np.ndarray:
    first = stats.binom.pmf(np.arange(n + a_n + 1), n + a_n, q0)
    second = stats.binom.pmf(np.arange(n - a_n + 1), n - a_n, q1)
    return np.convolve(first, second)


def _log_mgf(s: float, sizes: Tuple[int, int], probs: Tuple[float, float]) -> float:
    return sum(m * math.log1p(q * math.expm1(s)) for m, q in zip(sizes, probs) if m)


def _tilted_exponent(threshold: float, sizes: Tuple[int, int], probs: Tuple[float, float], upper: bool) -> float:
    """min over s of log MGF(s) - s·t, with s >= 0 for the upper tail, s <= 0 for the lower."""
    sign = 1.0 if upper else -1.0

    def objective(s: float) -> float:
        return _log_mgf(sign * s, sizes, probs) - sign * s * threshold

    result = optimize.minimize_scalar(objective, bounds=(0.0, 50.0), method="bounded", options={"xatol": 1e-12})
    return min(0.0, float(result.fun))


def chernoff_mgf_bound_check(
    n: int,
    a_n: int,
    q0: float,
    q1: float,
    threshold: float,
    seed: int = 0,
) -> ChernoffCheck:
    """Exact (or sampled) tail of S = Bin(n+An, q0) + Bin(n-An, q1) against its Chernoff bound.

    Above the mean the analytic value bounds P{S >= t} from above; below the
    mean it bounds P{S >= t} from below through the lower-tail bound on
    P{S <= t - 1}.
    """
    if not (0.0 <= q0 <= 1.0 and 0.0 <= q1 <= 1.0):
        raise InvalidParameterError("q0 and q1 must lie in [0, 1]", field="q")
    if n < 1 or abs(a_n) > n:
        raise InvalidParameterError(f"need n >= 1 and |a_n| <= n, got n={n}, a_n={a_n}", field="a_n")
    sizes = (n + a_n, n - a_n)
    probs = (q0, q1)
    mean = sizes[0] * q0 + sizes[1] * q1
    cut = math.ceil(threshold)

    if n <= settings.chernoff_exact_limit:
        pmf = _sum_pmf(n, a_n, q0, q1)
        exact_tail = float(min(1.0, pmf[max(cut, 0):].sum())) if cut <= 2 * n else 0.0
        mode = "exact"
    else:
        stream = derive_stream(SeedPath(seed, 0, 0))
        draws = stream.binomial(sizes[0], q0, settings.chernoff_mc_samples) + stream.binomial(
            sizes[1], q1, settings.chernoff_mc_samples
        )
        exact_tail = float(np.mean(draws >= cut))
        mode = "monte-carlo"
        logger.warning("chernoff_monte_carlo_fallback", n=n, samples=settings.chernoff_mc_samples)

    if cut <= 0:
        return ChernoffCheck(exact_tail=exact_tail, analytic_bound=1.0, tail="lower", mode=mode)
    if threshold >= mean:
        bound = math.exp(_tilted_exponent(threshold, sizes, probs, upper=True))
        return ChernoffCheck(exact_tail=exact_tail, analytic_bound=bound, tail="upper", mode=mode)
    lower_tail = math.exp(_tilted_exponent(cut - 1, sizes, probs, upper=False))
    return ChernoffCheck(exact_tail=exact_tail, analytic_bound=max(0.0, 1.0 - lower_tail), tail="lower", mode=mode)
