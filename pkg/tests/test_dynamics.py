"""
Tests for the majority update rule, protocol execution and trajectories.
"""

import io

import numpy as np
import pytest

from majority.dynamics import (
    OpinionState,
    Trajectory,
    consensus_status,
    force_initial,
    forced_split,
    init_random_opinions,
    initial_state,
    neighbor_tallies,
    round_graph,
    round_half_up,
    run_protocol,
    smp_round,
    smp_round_naive,
    write_trajectories,
)
from majority.exceptions import InvalidParameterError
from majority.rng_graph import SeedPath, _from_pairs, derive_stream, sample_gnp


def graph_from_edges(vertex_count, edges):
    u = np.array([a for a, _ in edges], dtype=np.int64)
    v = np.array([b for _, b in edges], dtype=np.int64)
    return _from_pairs(vertex_count, u, v)


@pytest.mark.sanity
class TestOpinionState:
    """Opinion vectors are immutable, binary and of even length."""

    def test_counts(self):
        state = OpinionState(np.array([0, 1, 1, 0, 0, 0]))
        assert state.agents == 6
        assert state.n == 3
        assert state.zeros == 4
        assert state.ones == 2

    def test_read_only(self):
        state = OpinionState(np.array([0, 1]))
        with pytest.raises(ValueError):
            state.opinions[0] = 1

    def test_input_array_is_copied(self):
        raw = np.array([0, 1, 0, 1], dtype=np.int8)
        state = OpinionState(raw)
        raw[0] = 1
        assert state.zeros == 2

    @pytest.mark.parametrize("values", [[0, 1, 0], [], [0, 2]])
    def test_invalid_vectors_rejected(self, values):
        with pytest.raises(InvalidParameterError):
            OpinionState(np.array(values, dtype=np.int64))

    def test_flipped(self):
        state = OpinionState(np.array([0, 0, 1, 0]))
        assert state.flipped() == OpinionState(np.array([1, 1, 0, 1]))


@pytest.mark.sanity
class TestInitialState:
    """Fair-coin and forced initial states."""

    def test_golden_fair_coin(self):
        state = init_random_opinions(4, derive_stream(SeedPath(0, 0, 0)))
        assert state.opinions.tolist() == [1, 1, 0, 0]

    def test_fair_coin_zero_count_is_binomial_half(self):
        agents, samples = 20_000, 200
        zeros = np.array([
            init_random_opinions(agents, derive_stream(SeedPath(3, t, 0))).zeros for t in range(samples)
        ])
        # N(X_0;0) ~ Bin(2n, 1/2): mean n, standard deviation sqrt(2n)/2
        z = (zeros.mean() - agents / 2) / (np.sqrt(agents) / 2 / np.sqrt(samples))
        assert abs(z) <= 4

    def test_two_agents_reach_every_pattern(self):
        patterns = {
            tuple(init_random_opinions(2, derive_stream(SeedPath(4, t, 0))).opinions.tolist())
            for t in range(200)
        }
        assert patterns == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_odd_agent_count_rejected(self):
        with pytest.raises(InvalidParameterError):
            init_random_opinions(5, derive_stream(SeedPath(0, 0, 0)))

    def test_force_initial_layout(self):
        assert force_initial(3, 1).opinions.tolist() == [0, 0, 0, 1]

    def test_round_half_up(self):
        assert round_half_up(2.5) == 3
        assert round_half_up(2.4999) == 2
        assert round_half_up(-2.5) == -2

    def test_forced_split(self):
        assert forced_split(100, 2.5) == (103, 97)
        assert forced_split(100, 0.0) == (100, 100)
        with pytest.raises(InvalidParameterError):
            forced_split(10, 11)


@pytest.mark.sanity
class TestMajorityRound:
    """Synchronous update: strict majority of neighbors, ties keep the own opinion."""

    def test_star_example(self):
        graph = graph_from_edges(4, [(0, 1), (0, 2), (0, 3)])
        state = OpinionState(np.array([0, 1, 1, 0]))
        assert smp_round(state, graph).opinions.tolist() == [1, 0, 0, 0]

    def test_own_opinion_not_counted(self):
        graph = graph_from_edges(2, [(0, 1)])
        assert smp_round(OpinionState(np.array([0, 1])), graph).opinions.tolist() == [1, 0]

    def test_isolated_agents_keep_opinion(self):
        graph = graph_from_edges(4, [])
        state = OpinionState(np.array([0, 1, 1, 0]))
        assert smp_round(state, graph) == state

    def test_tie_keeps_opinion(self):
        graph = graph_from_edges(4, [(0, 1), (0, 2)])
        state = OpinionState(np.array([1, 0, 1, 0]))
        # agent 0 hears one 0 and one 1
        assert smp_round(state, graph).opinions[0] == 1

    def test_tallies(self):
        graph = graph_from_edges(4, [(0, 1), (0, 2), (0, 3)])
        zeros, ones = neighbor_tallies(OpinionState(np.array([0, 1, 1, 0])), graph)
        assert zeros.tolist() == [1, 1, 1, 1]
        assert ones.tolist() == [2, 0, 0, 0]

    def test_size_mismatch_rejected(self):
        graph = graph_from_edges(6, [])
        with pytest.raises(InvalidParameterError):
            smp_round(OpinionState(np.array([0, 1, 1, 0])), graph)

    def test_fast_and_naive_agree(self):
        for index in range(25):
            stream = derive_stream(SeedPath(4, index, 0))
            graph = sample_gnp(40, 0.15, stream)
            state = init_random_opinions(40, stream)
            assert smp_round(state, graph) == smp_round_naive(state, graph)


@pytest.mark.sanity
class TestProtocol:
    """Golden trajectories for n = 2, λ = 1, ξ = 1/2, three rounds."""

    @pytest.mark.parametrize("trial,counts,majority,final", [
        (0, (2, 2, 3, 4), "tie", "all-zero"),
        (1, (1, 2, 2, 3), "ones", "mixed"),
        (2, (4, 4, 4, 4), "zeros", "all-zero"),
    ])
    def test_golden_trajectories(self, tiny_config, trial, counts, majority, final):
        traj = run_protocol(tiny_config, trial)
        assert traj.zero_counts == counts
        assert traj.initial_majority == majority
        assert traj.final_state_kind == final

    def test_golden_all_one(self, tiny_config):
        config = tiny_config.model_copy(update={"master_seed": 7})
        traj = run_protocol(config, 2)
        assert traj.zero_counts == (2, 2, 1, 0)
        assert traj.final_state_kind == "all-one"

    def test_deterministic(self, small_config):
        assert run_protocol(small_config, 3) == run_protocol(small_config, 3)

    def test_round_graph_uses_round_probability(self, tiny_config):
        graph = round_graph(tiny_config, 0, 0)
        expected = sample_gnp(4, 1 / 2 ** 0.5, derive_stream(SeedPath(2024, 0, 0)))
        assert graph.edge_set() == expected.edge_set()

    def test_fixed_graph_reuses_round_zero(self, small_config):
        config = small_config.model_copy(update={"redraw": "fixed-graph"})
        graph = round_graph(config, 1, 0)
        state = initial_state(config, 1)
        counts = [state.zeros]
        for _ in range(config.rounds):
            state = smp_round(state, graph)
            counts.append(state.zeros)
        assert run_protocol(config, 1).zero_counts == tuple(counts)

    def test_forced_unanimity_is_absorbing(self, small_config):
        config = small_config.model_copy(update={"initial_zeros": small_config.agents})
        assert set(run_protocol(config, 0).zero_counts) == {small_config.agents}

    def test_zero_rounds(self, small_config):
        config = small_config.model_copy(update={"rounds": 0})
        traj = run_protocol(config, 0)
        assert traj.rounds == 0
        assert len(traj.zero_counts) == 1


@pytest.mark.sanity
class TestTrajectory:
    """Trajectory invariants and consensus verdicts."""

    def test_counts_out_of_range_rejected(self):
        with pytest.raises(InvalidParameterError):
            Trajectory.from_counts([5], 4)
        with pytest.raises(InvalidParameterError):
            Trajectory.from_counts([], 4)

    def test_consensus_on_majority_side(self):
        traj = Trajectory.from_counts([3, 4, 4], 4)
        status = consensus_status(traj, 2)
        assert status.con and status.mcon

    def test_consensus_on_minority_side(self):
        traj = Trajectory.from_counts([3, 1, 0], 4)
        status = consensus_status(traj, 2)
        assert status.con and not status.mcon

    def test_tied_start_accepts_either_unanimity(self):
        traj = Trajectory.from_counts([2, 0], 4)
        assert consensus_status(traj, 1).mcon

    def test_round_outside_range_rejected(self):
        with pytest.raises(InvalidParameterError):
            consensus_status(Trajectory.from_counts([2, 2], 4), 2)

    def test_write_trajectories(self, tiny_config):
        handle = io.StringIO()
        write_trajectories([(0, run_protocol(tiny_config, 0))], handle)
        assert handle.getvalue() == (
            "trial,round,zeros_count,initial_majority,final_state_kind\n"
            "0,0,2,,\n"
            "0,1,2,,\n"
            "0,2,3,,\n"
            "0,3,4,,\n"
            "0,summary,4,tie,all-zero\n"
        )
