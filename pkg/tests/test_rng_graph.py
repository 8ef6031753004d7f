"""
Tests for seeded streams and G(V, p) sampling.
"""

import io

import numpy as np
import pytest
from pydantic import ValidationError

from majority.exceptions import InvalidParameterError
from majority.rng_graph import (
    MAX_SEED,
    SeedPath,
    derive_stream,
    mix_seed,
    pair_from_index,
    sample_gnp,
    sample_gnp_naive,
    write_edge_list,
)

P_TINY = 1 / 2 ** 0.5


@pytest.mark.sanity
class TestDeriveStream:
    """Streams are pure functions of (master seed, trial, round)."""

    def test_golden_words_seed_zero(self):
        words = derive_stream(SeedPath(0, 0, 0)).bit_generator.random_raw(4)
        assert words.tolist() == [
            14946354705293191919,
            10074248136150883599,
            8885816920511359030,
            8508543339082433438,
        ]

    def test_golden_words_nested_path(self):
        words = derive_stream(SeedPath(7, 3, 2)).bit_generator.random_raw(4)
        assert words.tolist() == [
            13723966131160304589,
            16428894399826137383,
            11325417198532472923,
            6741384716794296732,
        ]

    def test_trial_index_changes_stream(self):
        first = derive_stream(SeedPath(0, 1, 0)).bit_generator.random_raw(1)
        assert first.tolist() == [16146580426485601214]

    def test_same_path_same_stream(self):
        a = derive_stream(SeedPath(99, 5, 4)).random(16)
        b = derive_stream(SeedPath(99, 5, 4)).random(16)
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("path", [(-1, 0, 0), (MAX_SEED + 1, 0, 0), (0, -1, 0), (0, 0, -3)])
    def test_invalid_path_rejected(self, path):
        with pytest.raises(ValidationError):
            SeedPath(*path)

    def test_mix_seed_is_deterministic_64_bit(self):
        mixed = mix_seed(2024, 12345)
        assert mixed == mix_seed(2024, 12345)
        assert 0 <= mixed <= MAX_SEED
        assert mixed != mix_seed(2024, 12346)
        assert mixed != mix_seed(2025, 12345)


@pytest.mark.sanity
class TestPairIndex:
    """Linear pair index k = j(j-1)/2 + i decodes to i < j."""

    def test_small_indices_enumerate_all_pairs(self):
        i, j = pair_from_index(np.arange(10))
        pairs = list(zip(i.tolist(), j.tolist()))
        assert pairs == [(0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3), (0, 4), (1, 4), (2, 4), (3, 4)]

    def test_large_indices_near_triangular_numbers(self):
        j_values = np.array([70_000, 2_000_000, 3_000_000_000], dtype=np.int64)
        boundaries = j_values * (j_values - 1) // 2
        k = np.concatenate([boundaries - 1, boundaries, boundaries + 1])
        i, j = pair_from_index(k)
        assert np.all(i < j)
        assert np.all(i >= 0)
        assert np.array_equal(j * (j - 1) // 2 + i, k)


@pytest.mark.sanity
class TestSampleGnp:
    """Geometric-skip sampler."""

    def test_golden_tiny_graph(self):
        graph = sample_gnp(4, P_TINY, derive_stream(SeedPath(2024, 0, 0)))
        assert graph.edge_set() == {(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)}

    def test_edge_list_output(self):
        graph = sample_gnp(4, P_TINY, derive_stream(SeedPath(2024, 0, 0)))
        handle = io.StringIO()
        write_edge_list(graph, handle)
        assert handle.getvalue() == "4 5\n0 1\n0 2\n1 2\n1 3\n2 3\n"

    def test_extreme_probabilities_do_not_consume_stream(self):
        stream = derive_stream(SeedPath(1, 0, 0))
        empty = sample_gnp(6, 0.0, stream)
        complete = sample_gnp(6, 1.0, stream)
        assert empty.edge_count == 0
        assert complete.edge_count == 15
        fresh = derive_stream(SeedPath(1, 0, 0))
        assert stream.bit_generator.random_raw(2).tolist() == fresh.bit_generator.random_raw(2).tolist()

    def test_single_vertex_has_no_edges(self):
        graph = sample_gnp(1, 0.5, derive_stream(SeedPath(3, 0, 0)))
        assert graph.edge_count == 0
        assert graph.degrees.tolist() == [0]

    @pytest.mark.parametrize("p", [-0.1, 1.5, float("nan")])
    def test_invalid_probability_rejected(self, p):
        with pytest.raises(InvalidParameterError):
            sample_gnp(10, p, derive_stream(SeedPath(0, 0, 0)))

    def test_adjacency_is_simple_and_symmetric(self):
        graph = sample_gnp(60, 0.3, derive_stream(SeedPath(5, 0, 0)))
        dense = graph.adjacency.toarray()
        assert np.array_equal(dense, dense.T)
        assert np.all(np.diag(dense) == 0)
        assert set(np.unique(dense).tolist()) <= {0, 1}
        assert graph.adjacency.has_sorted_indices
        assert graph.degrees.sum() == 2 * graph.edge_count

    def test_neighbors_match_edges(self):
        graph = sample_gnp(30, 0.2, derive_stream(SeedPath(6, 0, 0)))
        edges = graph.edge_set()
        for vertex in range(30):
            expected = sorted({b for a, b in edges if a == vertex} | {a for a, b in edges if b == vertex})
            assert graph.neighbors(vertex).tolist() == expected

    def test_edge_count_near_expectation(self):
        graph = sample_gnp(200, 0.05, derive_stream(SeedPath(8, 0, 0)))
        # 19900 pairs, mean 995, standard deviation about 31
        assert abs(graph.edge_count - 995) < 160

    def test_vertex_degree_mean_matches_binomial(self):
        vertices, p, samples = 40, 0.3, 400
        degrees = np.array([
            sample_gnp(vertices, p, derive_stream(SeedPath(11, t, 0))).degrees[0] for t in range(samples)
        ])
        # deg(0) ~ Bin(V-1, p)
        expected = (vertices - 1) * p
        standard_error = np.sqrt((vertices - 1) * p * (1 - p) / samples)
        assert abs(degrees.mean() - expected) <= 4 * standard_error

    def test_matches_naive_sampler_in_distribution(self):
        fast = [sample_gnp(30, 0.2, derive_stream(SeedPath(9, t, 0))).edge_count for t in range(50)]
        naive = [sample_gnp_naive(30, 0.2, derive_stream(SeedPath(10, t, 0))).edge_count for t in range(50)]
        # both means estimate 87 with standard error about 1.2
        assert abs(np.mean(fast) - np.mean(naive)) < 8
        assert abs(np.mean(fast) - 87) < 6
