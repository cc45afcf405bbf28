"""Shared builders and brute-force oracles for the test suite."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from gossip_aoi import Edge, GossipNetwork

RATE_LOW = 0.2
RATE_HIGH = 5.0


def line_network(*rates: float) -> GossipNetwork:
    """Chain 0 -> 1 -> ... -> n with the given per-hop rates."""
    edges = tuple(Edge(i, i + 1, rate) for i, rate in enumerate(rates))
    return GossipNetwork(node_count=len(rates), edges=edges)


def star_network(*rates: float) -> GossipNetwork:
    """Source connected directly to nodes 1..n with the given rates."""
    edges = tuple(Edge(0, i + 1, rate) for i, rate in enumerate(rates))
    return GossipNetwork(node_count=len(rates), edges=edges)


def random_network(
    rng: np.random.Generator, n: int, p: float = 0.4, reachable: bool = False
) -> GossipNetwork:
    """Random directed network on nodes 0..n with rates uniform in [0.2, 5].

    With ``reachable`` a random arborescence from the source is laid down
    first, so every node (hence every subset) has a finite passage time.
    """
    edges: list[Edge] = []
    if reachable:
        informed = [0]
        for v in rng.permutation(np.arange(1, n + 1)):
            u = informed[int(rng.integers(len(informed)))]
            edges.append(Edge(u, int(v), float(rng.uniform(RATE_LOW, RATE_HIGH))))
            informed.append(int(v))
    present = {(e.from_node, e.to_node) for e in edges}
    for u in range(n + 1):
        for v in range(1, n + 1):
            if u != v and (u, v) not in present and rng.random() < p:
                edges.append(Edge(u, v, float(rng.uniform(RATE_LOW, RATE_HIGH))))
    return GossipNetwork(node_count=n, edges=tuple(edges))


def all_subsets(n: int) -> list[tuple[int, ...]]:
    """Every non-empty subset of {1..n} as sorted id tuples."""
    return [
        tuple(i + 1 for i in range(n) if mask >> i & 1) for mask in range(1, 1 << n)
    ]


def simple_paths_to(net: GossipNetwork, subset: Iterable[int]) -> list[tuple[int, ...]]:
    """All simple source paths stopping at their first subset member, as
    edge-index tuples.  With positive weights the minimum passage time is
    attained on one of these."""
    s = net.check_subset(subset)
    paths: list[tuple[int, ...]] = []

    def walk(u: int, visited: frozenset[int], acc: list[int]) -> None:
        for v, edge_index, _ in net.out_edges[u]:
            if v in visited:
                continue
            if v in s:
                paths.append(tuple(acc + [edge_index]))
            else:
                walk(v, visited | {v}, acc + [edge_index])

    walk(0, frozenset({0}), [])
    return paths


def path_time(weights: np.ndarray, path: Iterable[int]) -> float:
    """Left-to-right weight sum of one path (same association as Dijkstra)."""
    total = 0.0
    for edge_index in path:
        total += float(weights[edge_index])
    return total


def brute_force_passage(
    net: GossipNetwork, weights: np.ndarray, subset: Iterable[int]
) -> float:
    """Minimum left-to-right path sum over all simple paths into the subset."""
    paths = simple_paths_to(net, subset)
    if not paths:
        return math.inf
    return min(path_time(weights, path) for path in paths)
