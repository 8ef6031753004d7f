"""
Pydantic models for experiment configuration and report schemas.
"""

import hashlib
import json
import math
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .exceptions import InvalidParameterError
from .utils.time import utc_now_iso_z

MAX_SEED = 2**64 - 1


def format_value(value: Any) -> str:
    """Render a CSV cell; floats use the shortest round-trip representation."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def json_value(value: Any) -> Any:
    """JSON-safe cell: non-finite floats become their CSV text."""
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    return value


def clamp_probability(value: float) -> float:
    """min(1, max(0, value)); NaN stays NaN."""
    if math.isnan(value):
        return value
    return min(1.0, max(0.0, value))


# Experiment Models
class ExperimentConfig(BaseModel):
    """Parameters of one majority-dynamics experiment on G(2n, λ/n^ξ)."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n: int = Field(..., ge=1, description="Half the number of agents (2n agents)")
    lam: float = Field(..., alias="lambda", gt=0.0, description="Edge-density constant λ")
    xi: float = Field(default=0.5, ge=0.5, lt=1.0, description="Edge probability exponent ξ")
    rounds: int = Field(..., ge=0, description="Number of communication rounds")
    redraw: Literal["every-round", "fixed-graph"] = Field(
        default="every-round",
        description="Draw a fresh graph per round or reuse the round-0 graph"
    )
    per_round_xi: Optional[Tuple[float, ...]] = Field(
        default=None,
        description="Optional per-round ξ overriding xi, one value per round"
    )
    initial_zeros: Optional[int] = Field(
        default=None,
        ge=0,
        description="Forced initial zero count; None draws a fair-coin initial state"
    )
    master_seed: int = Field(default=0, ge=0, le=MAX_SEED, description="Master seed")

    @field_validator("per_round_xi")
    @classmethod
    def _check_per_round_xi(cls, value: Optional[Tuple[float, ...]]) -> Optional[Tuple[float, ...]]:
        if value is not None:
            for xi in value:
                if not 0.5 <= xi < 1.0:
                    raise ValueError(f"per-round xi {xi} outside [1/2, 1)")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        if self.per_round_xi is not None and len(self.per_round_xi) != self.rounds:
            raise ValueError(
                f"per_round_xi has {len(self.per_round_xi)} entries for {self.rounds} rounds"
            )
        if self.initial_zeros is not None and self.initial_zeros > self.agents:
            raise ValueError(f"forced zeros {self.initial_zeros} exceeds 2n = {self.agents}")
        for exponent in set(self.per_round_xi or ()) | {self.xi}:
            p = self.lam / self.n ** exponent
            if not 0.0 < p <= 1.0:
                raise ValueError(f"edge probability lambda/n^xi = {p!r} outside (0, 1]")
        return self

    @property
    def agents(self) -> int:
        return 2 * self.n

    @property
    def initial_label(self) -> str:
        return "coin" if self.initial_zeros is None else f"zeros={self.initial_zeros}"

    def edge_probability(self, round_index: int = 0) -> float:
        """p = λ/n^ξ for the given (0-based) round."""
        xi = self.per_round_xi[round_index] if self.per_round_xi else self.xi
        return self.lam / self.n ** xi

    def fingerprint(self) -> int:
        """64-bit digest of the configuration content, excluding the seed."""
        canonical = json.dumps(
            self.model_dump(mode="json", by_alias=True, exclude={"master_seed"}),
            sort_keys=True,
            separators=(",", ":"),
        )
        return int.from_bytes(hashlib.sha256(canonical.encode()).digest()[:8], "big")


class EventSpec(BaseModel):
    """Con(r), MCon(r), ZeroCountAtLeast(ℓ, t) or ZeroCountAtMost(ℓ, t)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["con", "mcon", "ge", "le"]
    round: int = Field(..., ge=0)
    threshold: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _check_threshold(self) -> "EventSpec":
        needs_threshold = self.kind in ("ge", "le")
        if needs_threshold and self.threshold is None:
            raise ValueError(f"event {self.kind} requires a threshold")
        if not needs_threshold and self.threshold is not None:
            raise ValueError(f"event {self.kind} takes no threshold")
        return self

    @classmethod
    def parse(cls, text: str) -> "EventSpec":
        """Parse ``con:r``, ``mcon:r``, ``ge:l:t`` or ``le:l:t``."""
        parts = text.strip().lower().split(":")
        try:
            if parts[0] in ("con", "mcon") and len(parts) == 2:
                return cls(kind=parts[0], round=int(parts[1]))
            if parts[0] in ("ge", "le") and len(parts) == 3:
                return cls(kind=parts[0], round=int(parts[1]), threshold=int(parts[2]))
        except ValueError as exc:
            raise InvalidParameterError(f"Malformed event '{text}': {exc}", field="event") from exc
        raise InvalidParameterError(
            f"Malformed event '{text}'; expected con:r, mcon:r, ge:l:t or le:l:t",
            field="event",
        )

    def label(self) -> str:
        if self.threshold is None:
            return f"{self.kind}:{self.round}"
        return f"{self.kind}:{self.round}:{self.threshold}"

    def check(self, config: ExperimentConfig) -> None:
        """Raise if the event refers to rounds or counts the config cannot produce."""
        if self.round > config.rounds:
            raise InvalidParameterError(
                f"event round {self.round} exceeds configured rounds {config.rounds}",
                field="event",
            )
        if self.threshold is not None and self.threshold > config.agents:
            raise InvalidParameterError(
                f"event threshold {self.threshold} outside [0, {config.agents}]",
                field="event",
            )


# Report Models
ESTIMATE_FIELDS = (
    "n", "lambda", "xi", "rounds", "redraw", "event",
    "trials", "successes", "p_hat", "ci_low", "ci_high", "master_seed",
)


class EstimateReport(BaseModel):
    """Event-probability estimate with a Wilson interval and the config echo."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    n: int
    lam: float = Field(..., alias="lambda")
    xi: float
    rounds: int
    redraw: str
    event: str
    trials: int = Field(..., ge=1)
    successes: int = Field(..., ge=0)
    p_hat: float = Field(..., ge=0.0, le=1.0)
    ci_low: float = Field(..., ge=0.0, le=1.0)
    ci_high: float = Field(..., ge=0.0, le=1.0)
    master_seed: int

    @model_validator(mode="after")
    def _check_order(self) -> "EstimateReport":
        if self.successes > self.trials:
            raise ValueError("successes exceed trials")
        if not self.ci_low <= self.p_hat <= self.ci_high:
            raise ValueError("interval does not contain p_hat")
        return self

    def row(self) -> Dict[str, Any]:
        return self.model_dump(by_alias=True)

    def csv_row(self) -> List[str]:
        data = self.row()
        return [format_value(data[name]) for name in ESTIMATE_FIELDS]


BOUND_FIELDS = ("name", "param_list", "raw_value", "clamped", "valid")


class BoundReport(BaseModel):
    """Named evaluation of a constant or probability bound."""
    model_config = ConfigDict(frozen=True)

    name: str
    params: Dict[str, float]
    raw_value: float
    clamped_probability: Optional[float] = None
    valid: bool = True
    reason: Optional[str] = None
    components: Dict[str, float] = Field(default_factory=dict)

    @classmethod
    def probability(cls, name: str, params: Dict[str, float], raw_value: float, **kwargs: Any) -> "BoundReport":
        """Report for a probability-valued bound; the raw value is kept unmodified."""
        return cls(
            name=name,
            params=params,
            raw_value=raw_value,
            clamped_probability=clamp_probability(raw_value),
            **kwargs,
        )

    @property
    def vacuous(self) -> bool:
        """True when a probability bound fell outside [0, 1] and carries no information."""
        return self.clamped_probability is not None and self.clamped_probability != self.raw_value

    def param_list(self) -> str:
        return ";".join(f"{key}={format_value(value)}" for key, value in self.params.items())

    def rows(self) -> List[Dict[str, Any]]:
        """Main row followed by one ``<name>.<component>`` row per component, keyed by BOUND_FIELDS."""
        rows = [dict(zip(BOUND_FIELDS, (
            self.name, self.param_list(), self.raw_value, self.clamped_probability, self.valid,
        )))]
        for key, value in self.components.items():
            clamped = clamp_probability(value) if self.clamped_probability is not None else None
            rows.append(dict(zip(BOUND_FIELDS, (
                f"{self.name}.{key}", self.param_list(), value, clamped, self.valid,
            ))))
        return rows

    def csv_rows(self) -> List[List[str]]:
        return [[format_value(row[name]) for name in BOUND_FIELDS] for row in self.rows()]

    def json_rows(self) -> List[Dict[str, Any]]:
        """rows() with non-finite floats spelled as in the CSV (``inf``, ``-inf``, ``nan``)."""
        return [{name: json_value(value) for name, value in row.items()} for row in self.rows()]


class StageSummary(BaseModel):
    """Distribution summary of (N(X_l;0) - n)/scale over trials for one round."""
    round: int
    scale: Literal["sqrt_n", "n_3_4", "n"]
    trials: int
    mean: float
    q05: float
    q25: float
    median: float
    q75: float
    q95: float
    abs_median: float


STAGE_FIELDS = ("round", "scale", "trials", "mean", "q05", "q25", "median", "q75", "q95", "abs_median")

VERIFY_FIELDS = ("suite", "case", "params", "oracle_value", "bound_value", "margin", "passed")


class VerificationCase(BaseModel):
    """One oracle-versus-bound (or simulation-versus-threshold) comparison."""
    suite: str
    case: str
    params: str
    oracle_value: float
    bound_value: float
    margin: float
    passed: bool


class BinomialSpec(BaseModel):
    """Bin(trials, p)."""
    model_config = ConfigDict(frozen=True)

    trials: int = Field(..., ge=0)
    p: float = Field(..., ge=0.0, le=1.0)


class RunManifest(BaseModel):
    """Everything needed to re-run a subcommand and reproduce its output bytes."""
    subcommand: str
    argv: List[str]
    params: Dict[str, Any]
    tool_version: str
    master_seed: Optional[int] = None
    outputs: List[str] = Field(default_factory=list)
    created_at: str = Field(default_factory=lambda: utc_now_iso_z())
