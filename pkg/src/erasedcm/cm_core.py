"""Uniform stub pairing and the erasure step.

Nodes are 0-based inside the library; the edge-list files in `erasedcm.io`
use 1-based node labels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degree_model import DegreeDistribution, DegreeSequence, tail_prob

__all__ = [
    "Multigraph",
    "SimpleGraph",
    "ErasureStats",
    "stub_owners",
    "random_stub_matchings",
    "pair_stubs",
    "multigraph_from_matching",
    "erase",
    "erasure_batch",
    "tail_distance",
    "empirical_degree_distance",
]


def _frozen(a, dtype=np.int64):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Outcome of a stub pairing.

    ``pairs[k] = (i, j)`` with ``i < j`` carries ``multiplicity[k]`` parallel
    edges; ``loop_nodes[k]`` carries ``loop_counts[k]`` self-loops. Pairs and
    loop nodes are sorted and unique.
    """

    n: int
    pairs: np.ndarray
    multiplicity: np.ndarray
    loop_nodes: np.ndarray
    loop_counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pairs", _frozen(self.pairs).reshape(-1, 2))
        object.__setattr__(self, "multiplicity", _frozen(self.multiplicity))
        object.__setattr__(self, "loop_nodes", _frozen(self.loop_nodes))
        object.__setattr__(self, "loop_counts", _frozen(self.loop_counts))

    @property
    def edge_multiplicity(self) -> dict:
        """``{(i, j): E_ij}`` for ``i < j`` with ``E_ij > 0``."""
        return {(int(i), int(j)): int(c) for (i, j), c in zip(self.pairs, self.multiplicity)}

    @property
    def self_loops(self) -> dict:
        return {int(i): int(c) for i, c in zip(self.loop_nodes, self.loop_counts)}

    @property
    def num_edges(self) -> int:
        return int(self.multiplicity.sum() + self.loop_counts.sum())

    def degrees(self) -> np.ndarray:
        """Degree of every node, a self-loop counting twice."""
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.pairs[:, 0], self.multiplicity)
        np.add.at(deg, self.pairs[:, 1], self.multiplicity)
        np.add.at(deg, self.loop_nodes, 2 * self.loop_counts)
        return deg

    def is_simple(self) -> bool:
        return self.loop_nodes.size == 0 and bool(np.all(self.multiplicity == 1))

    def __eq__(self, other):
        if not isinstance(other, Multigraph):
            return NotImplemented
        return self.n == other.n and all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("pairs", "multiplicity", "loop_nodes", "loop_counts")
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class SimpleGraph:
    """Graph left after erasure: sorted unique pairs ``(i, j)``, ``i < j``."""

    n: int
    edges: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", _frozen(self.edges).reshape(-1, 2))

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n).astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, SimpleGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    __hash__ = None


@dataclass(frozen=True)
class ErasureStats:
    """What the erasure step removed.

    ``self_loop_count`` counts self-loops (one unit each),
    ``excess_multiplicity`` is ``sum (E_ij - 1)`` over connected pairs.
    """

    self_loop_count: int
    excess_multiplicity: int
    L_n: int

    @property
    def total_erased(self) -> int:
        return self.self_loop_count + self.excess_multiplicity

    @property
    def erased_fraction(self) -> float:
        return self.total_erased / self.L_n if self.L_n else 0.0

    def to_dict(self) -> dict:
        return {
            "self_loop_count": self.self_loop_count,
            "excess_multiplicity": self.excess_multiplicity,
            "total_erased": self.total_erased,
            "erased_fraction": self.erased_fraction,
            "L_n": self.L_n,
        }


def stub_owners(seq: DegreeSequence) -> np.ndarray:
    """Node index of every stub, stubs of node 0 first."""
    return np.repeat(np.arange(seq.n, dtype=np.int64), seq.degrees)


def random_stub_matchings(L_n: int, reps: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``reps`` uniform perfect matchings of ``L_n`` stubs.

    Row ``r`` is a uniform permutation of ``0..L_n-1``; stubs at columns
    ``2k`` and ``2k+1`` are matched. Every matching is hit by exactly
    ``2**(L/2) * (L/2)!`` permutations, so matchings are uniform.
    """
    if L_n % 2:
        raise ValueError(f"cannot pair an odd number of stubs ({L_n})")
    if reps == 1:
        return rng.permutation(L_n)[None, :]
    base = np.broadcast_to(np.arange(L_n, dtype=np.int64), (reps, L_n))
    return rng.permuted(base, axis=1)


def multigraph_from_matching(seq: DegreeSequence, matching) -> Multigraph:
    """Collapse a stub matching (row layout of `random_stub_matchings`) into a multigraph."""
    owners = stub_owners(seq)
    nodes = owners[np.asarray(matching, dtype=np.int64)]
    return _multigraph_from_endpoints(seq.n, nodes[0::2], nodes[1::2])


def _multigraph_from_endpoints(n: int, u: np.ndarray, v: np.ndarray) -> Multigraph:
    loops = u == v
    loop_nodes, loop_counts = np.unique(u[loops], return_counts=True)
    a = np.minimum(u[~loops], v[~loops])
    b = np.maximum(u[~loops], v[~loops])
    keys, counts = np.unique(a * np.int64(n) + b, return_counts=True)
    pairs = np.column_stack((keys // n, keys % n))
    return Multigraph(n, pairs, counts, loop_nodes, loop_counts)


def pair_stubs(seq: DegreeSequence, rng: np.random.Generator) -> Multigraph:
    """Pair all stubs of ``seq`` uniformly at random.

    Shuffles the stub array once and matches consecutive entries, O(L_n).
    """
    if seq.L_n % 2:
        raise ValueError(f"degree sum {seq.L_n} is odd")
    nodes = rng.permutation(stub_owners(seq))
    return _multigraph_from_endpoints(seq.n, nodes[0::2], nodes[1::2])


def erase(g: Multigraph) -> tuple[SimpleGraph, ErasureStats]:
    """Drop self-loops and merge parallel edges."""
    stats = ErasureStats(
        self_loop_count=int(g.loop_counts.sum()),
        excess_multiplicity=int((g.multiplicity - 1).sum()),
        L_n=2 * g.num_edges,
    )
    return SimpleGraph(g.n, g.pairs), stats


def erasure_batch(
    seq: DegreeSequence,
    reps: int,
    rng: np.random.Generator,
    max_cells: int = 2**24,
) -> tuple[np.ndarray, np.ndarray]:
    """Self-loop and excess counts for ``reps`` independent pairings of ``seq``.

    Pairings are drawn in row blocks so at most ``max_cells`` stubs are held
    at once. Returns two int64 arrays of length ``reps``.
    """
    L = seq.L_n
    if L % 2:
        raise ValueError(f"degree sum {L} is odd")
    loops = np.zeros(reps, dtype=np.int64)
    excess = np.zeros(reps, dtype=np.int64)
    if L == 0:
        return loops, excess
    owners = stub_owners(seq)
    n = np.int64(seq.n)
    block = max(1, max_cells // L)
    for start in range(0, reps, block):
        stop = min(reps, start + block)
        nodes = owners[random_stub_matchings(L, stop - start, rng)]
        u, v = nodes[:, 0::2], nodes[:, 1::2]
        is_loop = u == v
        keys = np.where(is_loop, -1, np.minimum(u, v) * n + np.maximum(u, v))
        keys.sort(axis=1)
        new = np.ones_like(keys, dtype=bool)
        new[:, 1:] = keys[:, 1:] != keys[:, :-1]
        distinct = np.sum(new & (keys >= 0), axis=1)
        n_loops = is_loop.sum(axis=1)
        loops[start:stop] = n_loops
        excess[start:stop] = (L // 2 - n_loops) - distinct
    return loops, excess


def tail_distance(degrees, dist: DegreeDistribution) -> float:
    """``sup_k |#{i: deg_i >= k}/n - P(D >= k)|`` over ``k >= 1``."""
    deg = np.asarray(degrees, dtype=np.int64)
    if deg.size == 0:
        return 0.0
    top = int(deg.max()) + 1
    counts = np.bincount(deg, minlength=top + 1)
    # empirical P(deg >= k) for k = 0..top
    emp = np.cumsum(counts[::-1])[::-1] / deg.size
    ks = np.arange(1, top + 1)
    return float(np.max(np.abs(emp[1:] - tail_prob(dist, ks))))


def empirical_degree_distance(g, dist: DegreeDistribution) -> float:
    """Kolmogorov-Smirnov style distance between the degrees of ``g`` and ``dist``."""
    return tail_distance(g.degrees(), dist)
