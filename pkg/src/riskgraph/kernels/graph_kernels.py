"""Shortest-path and neighbourhood-hash graph kernels.

The shortest-path kernel compares the multisets of (hop distance, endpoint
labels) over all reachable node pairs of two graphs. The neighbourhood-hash
kernel repeatedly mixes each node's bit label with its neighbours' labels and
counts the labels two graphs share after every round.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from collections.abc import Sequence
from functools import reduce
from operator import xor

import networkx as nx
import numpy as np

from riskgraph.graphs.graph_models import SceneGraph
from riskgraph.kernels.exceptions import KernelConfigError
from riskgraph.kernels.kernel_models import ShortestPathGraph


def shortest_paths(graph: SceneGraph) -> ShortestPathGraph:
    """All-pairs hop distances via Floyd-Warshall.

    Args:
        graph: Scene graph with unit edge weights

    Returns:
        ShortestPathGraph with one entry per reachable unordered node pair

    Example:
        >>> sp = shortest_paths(path_graph)   # a - b - c
        >>> sp.entries
        ((0, 1, 1), (0, 2, 2), (1, 2, 1))
    """
    n = len(graph.nodes)
    if n < 2 or not graph.edges:
        return ShortestPathGraph(labels=graph.labels, entries=())
    distances = nx.floyd_warshall_numpy(graph.to_networkx(), nodelist=list(range(n)))
    entries = tuple(
        (u, v, int(distances[u, v]))
        for u in range(n)
        for v in range(u + 1, n)
        if np.isfinite(distances[u, v])
    )
    return ShortestPathGraph(labels=graph.labels, entries=entries)


def _dot(a: dict[tuple[int, int, int], int], b: dict[tuple[int, int, int], int]) -> int:
    if len(a) > len(b):
        a, b = b, a
    return sum(count * b.get(key, 0) for key, count in a.items())


def spgk_raw(g1: SceneGraph, g2: SceneGraph) -> int:
    """Number of matching (distance, endpoint labels) entry pairs."""
    return _dot(shortest_paths(g1).signature(), shortest_paths(g2).signature())


def normalize_value(k12: float, k11: float, k22: float) -> float:
    """k12 / sqrt(k11 k22), or 0 when either self-kernel is 0."""
    if k11 == 0 or k22 == 0:
        return 0.0
    return float(k12 / math.sqrt(k11 * k22))


def spgk(g1: SceneGraph, g2: SceneGraph, normalize: bool = True) -> float:
    """Shortest-path graph kernel.

    Args:
        g1: First graph
        g2: Second graph
        normalize: Divide by the geometric mean of the self-kernels

    Returns:
        Kernel value, in [0, 1] when normalised
    """
    s1 = shortest_paths(g1).signature()
    s2 = shortest_paths(g2).signature()
    k12 = _dot(s1, s2)
    if not normalize:
        return float(k12)
    return normalize_value(k12, _dot(s1, s1), _dot(s2, s2))


def _check_hash_parameters(h: int, bits: int) -> None:
    if h < 1:
        raise KernelConfigError(f"NHGK needs h >= 1 iterations, got {h}.")
    if not 8 <= bits <= 64:
        raise KernelConfigError(f"NHGK bit width must lie in [8, 64], got {bits}.")


def initial_label(label: int, bits: int, seed: int) -> int:
    """Seeded hash of a cell label, truncated to ``bits`` bits."""
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little") & ((1 << bits) - 1)


def rotate_left(value: int, bits: int) -> int:
    mask = (1 << bits) - 1
    return ((value << 1) | (value >> (bits - 1))) & mask


def hash_iterations(
    graph: SceneGraph, h: int = 3, bits: int = 16, seed: int = 7
) -> list[Counter[int]]:
    """Multisets of node hash labels after each of ``h`` update rounds.

    Each round replaces a node's label with its own label rotated left by one
    bit, XOR-ed with the labels of all its neighbours.
    """
    _check_hash_parameters(h, bits)
    adjacency = graph.neighbors()
    labels = [initial_label(n.label, bits, seed) for n in graph.nodes]
    rounds: list[Counter[int]] = []
    for _ in range(h):
        labels = [
            reduce(xor, (labels[u] for u in adjacency[v]), rotate_left(labels[v], bits))
            for v in range(len(labels))
        ]
        rounds.append(Counter(labels))
    return rounds


def nhgk_from_rounds(
    rounds1: Sequence[Counter[int]], n1: int, rounds2: Sequence[Counter[int]], n2: int
) -> float:
    """Neighbourhood-hash kernel from precomputed label multisets."""
    total = 0.0
    for c1, c2 in zip(rounds1, rounds2):
        common = sum((c1 & c2).values())
        total += common / (n1 + n2 - common)
    return total / len(rounds1)


def nhgk(
    g1: SceneGraph, g2: SceneGraph, h: int = 3, bits: int = 16, seed: int = 7
) -> float:
    """Neighbourhood-hash graph kernel.

    Args:
        g1: First graph
        g2: Second graph
        h: Number of hash update rounds
        bits: Bit width of the hash labels, 8..64
        seed: Seed of the initial label hash

    Returns:
        Mean over rounds of common / (|V1| + |V2| - common), in [0, 1]

    Raises:
        KernelConfigError: If h or bits is out of range
    """
    rounds1 = hash_iterations(g1, h, bits, seed)
    rounds2 = hash_iterations(g2, h, bits, seed)
    return nhgk_from_rounds(rounds1, len(g1.nodes), rounds2, len(g2.nodes))
