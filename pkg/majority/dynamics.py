"""
Simple Majority Protocol state machine.

Agents hold binary opinions; in every synchronous round each agent adopts the
strictly more common opinion among its neighbors and keeps its own on a tie
(which includes having no neighbors). The own opinion is never counted as a
received message.
"""

import math
from dataclasses import dataclass
from typing import Annotated, Iterable, Literal, NamedTuple, Optional, TextIO, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .exceptions import InvalidParameterError
from .models import ExperimentConfig
from .rng_graph import INITIAL_STATE_ROUND, GraphSample, SeedPath, derive_stream, sample_gnp
from .utils.log import get_logger

logger = get_logger("dynamics")

Majority = Literal["zeros", "ones", "tie"]
FinalKind = Literal["all-zero", "all-one", "mixed"]


@dataclass(frozen=True, eq=False)
class OpinionState:
    """Read-only vector of 2n opinions in {0, 1}."""
    opinions: np.ndarray

    def __post_init__(self) -> None:
        opinions = np.asarray(self.opinions, dtype=np.int8)
        if opinions.ndim != 1 or opinions.size == 0 or opinions.size % 2:
            raise InvalidParameterError(
                f"opinion vector must have a positive even length, got {opinions.size}",
                field="agents",
            )
        if ((opinions != 0) & (opinions != 1)).any():
            raise InvalidParameterError("opinions must be 0 or 1", field="opinions")
        opinions = opinions.copy()
        opinions.setflags(write=False)
        object.__setattr__(self, "opinions", opinions)

    @property
    def agents(self) -> int:
        return int(self.opinions.size)

    @property
    def n(self) -> int:
        return self.agents // 2

    @property
    def zeros(self) -> int:
        """N(x;0)."""
        return int(self.agents - self.opinions.sum(dtype=np.int64))

    @property
    def ones(self) -> int:
        return self.agents - self.zeros

    def flipped(self) -> "OpinionState":
        return OpinionState(1 - self.opinions)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, OpinionState) and np.array_equal(self.opinions, other.opinions)

    __hash__ = None


def round_half_up(value: float) -> int:
    """Nearest integer, ties rounded up."""
    return int(math.floor(value + 0.5))


def init_random_opinions(agents: int, stream: np.random.Generator) -> OpinionState:
    """Each opinion i.i.d. Ber(1/2): a uniform draw u gives opinion 1 iff u >= 1/2."""
    if agents < 2 or agents % 2:
        raise InvalidParameterError(f"agent count must be even and at least 2, got {agents}", field="agents")
    return OpinionState((stream.random(agents) >= 0.5).astype(np.int8))


def force_initial(zeros: int, ones: int) -> OpinionState:
    """First ``zeros`` agents hold 0, the remaining ``ones`` agents hold 1."""
    if zeros < 0 or ones < 0:
        raise InvalidParameterError(f"counts must be non-negative, got zeros={zeros}, ones={ones}", field="initial")
    opinions = np.ones(zeros + ones, dtype=np.int8)
    opinions[:zeros] = 0
    return OpinionState(opinions)


def forced_split(n: int, imbalance: float) -> Tuple[int, int]:
    """(n + k, n - k) zeros/ones with k = round_half_up(imbalance)."""
    k = round_half_up(imbalance)
    if abs(k) > n:
        raise InvalidParameterError(f"imbalance {imbalance} exceeds n = {n}", field="imbalance")
    return n + k, n - k


def _check_sizes(state: OpinionState, graph: GraphSample) -> None:
    if graph.vertex_count != state.agents:
        raise InvalidParameterError(
            f"graph has {graph.vertex_count} vertices but state has {state.agents} agents",
            field="graph",
        )


def neighbor_tallies(state: OpinionState, graph: GraphSample) -> Tuple[np.ndarray, np.ndarray]:
    """Per agent (N(0), N(1)): neighbors holding 0 and holding 1."""
    _check_sizes(state, graph)
    ones = graph.adjacency @ state.opinions.astype(np.int32)
    zeros = graph.degrees - ones
    return np.asarray(zeros), np.asarray(ones)


def smp_round(state: OpinionState, graph: GraphSample) -> OpinionState:
    """One synchronous majority update of every agent from the old state."""
    zeros, ones = neighbor_tallies(state, graph)
    updated = np.where(zeros > ones, 0, np.where(zeros < ones, 1, state.opinions))
    return OpinionState(updated.astype(np.int8))


def smp_round_naive(state: OpinionState, graph: GraphSample) -> OpinionState:
    """Reference update: materialize every tally pair first, then apply the rule agent by agent."""
    _check_sizes(state, graph)
    old = state.opinions.tolist()
    tallies = []
    for agent in range(state.agents):
        received = [old[j] for j in graph.neighbors(agent).tolist()]
        tallies.append((received.count(0), received.count(1)))
    updated = []
    for agent, (n0, n1) in enumerate(tallies):
        if n0 > n1:
            updated.append(0)
        elif n0 < n1:
            updated.append(1)
        else:
            updated.append(old[agent])
    return OpinionState(np.array(updated, dtype=np.int8))


def _majority(zero_count: int, n: int) -> Majority:
    if zero_count > n:
        return "zeros"
    if zero_count < n:
        return "ones"
    return "tie"


def _final_kind(zero_count: int, agents: int) -> FinalKind:
    if zero_count == agents:
        return "all-zero"
    if zero_count == 0:
        return "all-one"
    return "mixed"


class Trajectory(BaseModel):
    """Zero counts N(X_l;0) for l = 0..r plus initial and final verdicts."""
    model_config = ConfigDict(frozen=True)

    zero_counts: Tuple[Annotated[int, Field(ge=0)], ...] = Field(..., min_length=1)
    agents: int = Field(..., ge=2)
    initial_majority: Majority
    final_state_kind: FinalKind

    @model_validator(mode="after")
    def _check_counts(self) -> "Trajectory":
        if any(c > self.agents for c in self.zero_counts):
            raise ValueError(f"zero counts must lie in [0, {self.agents}]")
        return self

    @classmethod
    def from_counts(cls, zero_counts: Iterable[int], agents: int) -> "Trajectory":
        counts = tuple(int(c) for c in zero_counts)
        if not counts:
            raise InvalidParameterError("a trajectory needs at least the initial count", field="zero_counts")
        try:
            return cls(
                zero_counts=counts,
                agents=agents,
                initial_majority=_majority(counts[0], agents // 2),
                final_state_kind=_final_kind(counts[-1], agents),
            )
        except ValidationError as exc:
            raise InvalidParameterError(f"invalid trajectory: {exc.errors()[0]['msg']}", field="zero_counts") from exc

    @property
    def n(self) -> int:
        return self.agents // 2

    @property
    def rounds(self) -> int:
        return len(self.zero_counts) - 1


class ConsensusStatus(NamedTuple):
    con: bool
    mcon: bool


def consensus_status(traj: Trajectory, r: int) -> ConsensusStatus:
    """Con and MCon after round r; a tied initial state accepts either unanimity."""
    if not 0 <= r <= traj.rounds:
        raise InvalidParameterError(f"round {r} outside recorded range [0, {traj.rounds}]", field="round")
    count = traj.zero_counts[r]
    con = count in (0, traj.agents)
    if traj.initial_majority == "zeros":
        mcon = count == traj.agents
    elif traj.initial_majority == "ones":
        mcon = count == 0
    else:
        mcon = con
    return ConsensusStatus(con=con, mcon=mcon)


def initial_state(config: ExperimentConfig, trial_index: int) -> OpinionState:
    if config.initial_zeros is None:
        stream = derive_stream(SeedPath(config.master_seed, trial_index, INITIAL_STATE_ROUND))
        return init_random_opinions(config.agents, stream)
    return force_initial(config.initial_zeros, config.agents - config.initial_zeros)


def round_graph(config: ExperimentConfig, trial_index: int, round_index: int) -> GraphSample:
    """The communication graph of one round of one trial."""
    stream = derive_stream(SeedPath(config.master_seed, trial_index, round_index))
    return sample_gnp(config.agents, config.edge_probability(round_index), stream)


def run_protocol(config: ExperimentConfig, trial_index: int) -> Trajectory:
    """Run ``config.rounds`` rounds of the protocol for one trial."""
    state = initial_state(config, trial_index)
    counts = [state.zeros]
    fixed: Optional[GraphSample] = None
    for round_index in range(config.rounds):
        if config.redraw == "fixed-graph":
            if fixed is None:
                fixed = round_graph(config, trial_index, 0)
            graph = fixed
        else:
            graph = round_graph(config, trial_index, round_index)
        state = smp_round(state, graph)
        counts.append(state.zeros)
    return Trajectory.from_counts(counts, config.agents)


TRAJECTORY_FIELDS = ("trial", "round", "zeros_count", "initial_majority", "final_state_kind")


def write_trajectories(trajectories: Iterable[Tuple[int, Trajectory]], handle: TextIO) -> None:
    """CSV: one row per recorded round, then a ``summary`` row per trial."""
    handle.write(",".join(TRAJECTORY_FIELDS) + "\n")
    for trial, traj in trajectories:
        for round_index, count in enumerate(traj.zero_counts):
            handle.write(f"{trial},{round_index},{count},,\n")
        handle.write(
            f"{trial},summary,{traj.zero_counts[-1]},{traj.initial_majority},{traj.final_state_kind}\n"
        )
