"""
Deterministic pseudorandomness and Erdős–Rényi graph sampling.

Streams are Philox-4x64 generators keyed by a numpy ``SeedSequence`` built
from ``(master_seed, trial_index, round_index)``, so every trial and round
owns an independent, platform-independent stream and parallel trials never
coordinate.
"""

from dataclasses import dataclass
from typing import Iterator, TextIO, Tuple

import numpy as np
from pydantic import Field
from pydantic.dataclasses import dataclass as validated_dataclass
from scipy import sparse

from .exceptions import InvalidParameterError
from .utils.log import get_logger

logger = get_logger("rng_graph")

MAX_SEED = 2**64 - 1

# Round index reserved for the fair-coin initial state stream
INITIAL_STATE_ROUND = 2**32 - 1


@validated_dataclass(frozen=True)
class SeedPath:
    """Address of one random stream: (master seed, trial, round)."""
    master_seed: int = Field(ge=0, le=MAX_SEED)
    trial_index: int = Field(default=0, ge=0)
    round_index: int = Field(default=0, ge=0)


def derive_stream(path: SeedPath) -> np.random.Generator:
    """Generator whose output is a pure function of ``path``."""
    seed_sequence = np.random.SeedSequence(
        entropy=path.master_seed,
        spawn_key=(path.trial_index, path.round_index),
    )
    return np.random.Generator(np.random.Philox(seed_sequence))


def mix_seed(master_seed: int, salt: int) -> int:
    """64-bit master seed derived from ``master_seed`` and ``salt``."""
    words = np.random.SeedSequence([master_seed, salt]).generate_state(2, np.uint32)
    return (int(words[1]) << 32) | int(words[0])


@dataclass(frozen=True, eq=False)
class GraphSample:
    """Undirected simple graph stored as a symmetric CSR adjacency matrix."""
    vertex_count: int
    adjacency: sparse.csr_matrix

    def neighbors(self, vertex: int) -> np.ndarray:
        """Sorted neighbor indices of ``vertex``."""
        start, stop = self.adjacency.indptr[vertex], self.adjacency.indptr[vertex + 1]
        return self.adjacency.indices[start:stop]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.indptr)

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.nnz // 2)

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """Edge endpoints (u, v) with u < v, sorted by u then v."""
        upper = sparse.triu(self.adjacency, k=1, format="csr")
        upper.sort_indices()
        rows = np.repeat(np.arange(self.vertex_count), np.diff(upper.indptr))
        return rows, upper.indices.copy()

    def edge_set(self) -> set:
        u, v = self.edges()
        return set(zip(u.tolist(), v.tolist()))


def _from_pairs(vertex_count: int, u: np.ndarray, v: np.ndarray) -> GraphSample:
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    data = np.ones(rows.shape[0], dtype=np.int32)
    adjacency = sparse.csr_matrix((data, (rows, cols)), shape=(vertex_count, vertex_count))
    adjacency.sort_indices()
    return GraphSample(vertex_count=vertex_count, adjacency=adjacency)


def pair_from_index(k: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Decode linear pair indices k = j(j-1)/2 + i (i < j) into (i, j)."""
    k = np.asarray(k, dtype=np.int64)
    j = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) / 2.0).astype(np.int64)
    # float sqrt can be off by one for large k
    while True:
        too_big = j * (j - 1) // 2 > k
        if not too_big.any():
            break
        j -= too_big
    while True:
        too_small = (j + 1) * j // 2 <= k
        if not too_small.any():
            break
        j += too_small
    return k - j * (j - 1) // 2, j


def _validate(vertex_count: int, p: float) -> None:
    if vertex_count < 1:
        raise InvalidParameterError(f"vertex_count must be positive, got {vertex_count}", field="vertex_count")
    if not 0.0 <= p <= 1.0:
        raise InvalidParameterError(f"edge probability {p!r} outside [0, 1]", field="p")


def _skip_positions(total: int, p: float, stream: np.random.Generator) -> Iterator[np.ndarray]:
    """Yield the sorted linear indices of present pairs, one chunk at a time."""
    log_q = np.log1p(-p)
    chunk = int(min(max(64, total * p * 1.05 + 64), 1 << 22))
    last = -1
    while True:
        u = stream.random(chunk)
        skips = np.minimum(np.floor(np.log1p(-u) / log_q), total).astype(np.int64)
        positions = last + np.cumsum(skips + 1)
        inside = positions[positions < total]
        if inside.size:
            yield inside
        if positions[-1] >= total:
            return
        last = int(positions[-1])


def sample_gnp(vertex_count: int, p: float, stream: np.random.Generator) -> GraphSample:
    """Sample G(vertex_count, p) by geometric skipping over the pair index.

    Each of the C(V, 2) pairs is present independently with probability p;
    expected work is proportional to the number of edges. p = 0 and p = 1 are
    handled exactly and do not consume the stream.
    """
    _validate(vertex_count, p)
    total = vertex_count * (vertex_count - 1) // 2
    if total == 0 or p == 0.0:
        empty = np.empty(0, dtype=np.int64)
        return _from_pairs(vertex_count, empty, empty)
    if p == 1.0:
        u, v = np.triu_indices(vertex_count, k=1)
        return _from_pairs(vertex_count, u.astype(np.int64), v.astype(np.int64))

    chunks = list(_skip_positions(total, p, stream))
    positions = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    u, v = pair_from_index(positions)
    graph = _from_pairs(vertex_count, u, v)
    logger.debug("graph_sampled", vertex_count=vertex_count, p=p, edge_count=graph.edge_count)
    return graph


def sample_gnp_naive(vertex_count: int, p: float, stream: np.random.Generator) -> GraphSample:
    """Reference sampler: one Bernoulli draw per pair, O(V^2)."""
    _validate(vertex_count, p)
    u, v = np.triu_indices(vertex_count, k=1)
    keep = stream.random(u.shape[0]) < p
    return _from_pairs(vertex_count, u[keep].astype(np.int64), v[keep].astype(np.int64))


def write_edge_list(graph: GraphSample, handle: TextIO) -> None:
    """Write ``V E`` then one ``u v`` line per edge (u < v)."""
    handle.write(f"{graph.vertex_count} {graph.edge_count}\n")
    u, v = graph.edges()
    for a, b in zip(u.tolist(), v.tolist()):
        handle.write(f"{a} {b}\n")
