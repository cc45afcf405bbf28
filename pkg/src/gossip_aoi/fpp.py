"""Static first-passage view of the gossip process.

Freezing one exponential draw w_e ~ Exp(lambda_e) per edge turns the network
into a weighted digraph whose shortest-path time from the source to a subset
(minimum over members) has exactly the steady-state age distribution of that
subset.  Sampling passage times over many independent weight draws therefore
estimates the same moments the exact solver computes — by a completely
different route, which is what makes the two useful as checks on each other.

Weights are drawn by inverse transform, w = -ln(U)/lambda_e with U uniform
on (0, 1], so a weight is positive with probability one.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import partial
from typing import Iterable

import numpy as np

from . import montecarlo
from .montecarlo import MomentEstimate
from .network import GossipNetwork, NodeSubset


class UnreachableTargetError(RuntimeError):
    """Raised when sampled passage times are infinite (no path from the source)."""


@dataclass
class WeightSample:
    """One frozen draw of per-edge passage weights, aligned with net.edges."""

    weights: np.ndarray


def sample_weights(net: GossipNetwork, rng: np.random.Generator) -> WeightSample:
    """Draw independent Exp(lambda_e) weights for every edge."""
    u = rng.random(len(net.edges))
    return WeightSample(weights=-np.log1p(-u) / net.rates)


def first_passage_time(
    net: GossipNetwork, sample: WeightSample, subset: NodeSubset | Iterable[int]
) -> float:
    """Shortest weighted path time from the source to any subset member.

    Dijkstra with a binary heap; equal keys pop in node-id order.  Stops as
    soon as a subset member settles (the first one settled is the minimum).
    Returns +inf when no member is reachable.
    """
    s = net.check_subset(subset)
    if not s:
        raise ValueError("subset must be non-empty")
    weights = sample.weights
    if len(weights) != len(net.edges):
        raise ValueError(f"sample has {len(weights)} weights for {len(net.edges)} edges")
    n = net.node_count
    dist = [math.inf] * (n + 1)
    dist[0] = 0.0
    settled = [False] * (n + 1)
    heap: list[tuple[float, int]] = [(0.0, 0)]
    while heap:
        d, u = heapq.heappop(heap)
        if settled[u]:
            continue
        settled[u] = True
        if u in s:
            return d
        for v, edge_index, _ in net.out_edges[u]:
            nd = d + weights[edge_index]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return math.inf


def batch_distances(net: GossipNetwork, weights: np.ndarray) -> np.ndarray:
    """Source distances to every node for a (samples, edges) weight matrix.

    Gauss-Seidel relaxation to fixpoint in canonical node order; the result
    is bit-identical to per-sample Dijkstra, since both return the minimum
    over paths of the same left-to-right floating prefix sums.
    """
    samples = weights.shape[0]
    n = net.node_count
    dist = np.full((samples, n + 1), np.inf)
    dist[:, 0] = 0.0
    changed = True
    while changed:
        changed = False
        for v in range(1, n + 1):
            frm, eidx = net.in_arcs[v]
            if frm.size == 0:
                continue
            best = (dist[:, frm] + weights[:, eidx]).min(axis=1)
            upd = best < dist[:, v]
            if upd.any():
                dist[upd, v] = best[upd]
                changed = True
    return dist


def _fpp_block(
    net: GossipNetwork,
    subset_ids: tuple[tuple[int, ...], ...],
    k_max: int,
    sizes: tuple[int, ...],
    seed: int,
    block: int,
) -> list[tuple[np.ndarray, np.ndarray, int]]:
    """Sample one weight block; per subset return (power sums, square sums,
    count of infinite passage times)."""
    size = sizes[block]
    rng = montecarlo.block_rng(seed, montecarlo.STREAM_FPP, block)
    u = rng.random((size, len(net.edges)))
    weights = -np.log1p(-u) / net.rates
    dist = batch_distances(net, weights)
    out = []
    for ids in subset_ids:
        passage = dist[:, list(ids)].min(axis=1)
        bad = int(np.isinf(passage).sum())
        if bad:
            out.append((np.zeros(k_max), np.zeros(k_max), bad))
            continue
        sums, sqsums = montecarlo.power_sums(passage, k_max)
        out.append((sums, sqsums, 0))
    return out


def estimate_moments_subsets(
    net: GossipNetwork,
    subsets: Iterable[NodeSubset | Iterable[int]],
    k_max: int,
    samples: int,
    seed: int = 0,
    workers: int = 1,
) -> dict[NodeSubset, list[MomentEstimate]]:
    """Empirical passage-time moments for several subsets sharing one sample set."""
    from .moments import _check_order

    _check_order(k_max)
    montecarlo.check_seed(seed)
    checked: list[NodeSubset] = []
    for subset in subsets:
        s = net.check_subset(subset)
        if not s:
            raise ValueError("subset must be non-empty")
        if s not in checked:
            checked.append(s)
    sizes = tuple(montecarlo.block_sizes(samples, montecarlo.FPP_BLOCK))
    fn = partial(_fpp_block, net, tuple(s.ids() for s in checked), k_max, sizes, seed)
    blocks = montecarlo.map_blocks(fn, len(sizes), workers)

    results = {}
    for i, s in enumerate(checked):
        sums = np.zeros(k_max)
        sqsums = np.zeros(k_max)
        bad = 0
        for blk in blocks:
            bs, bq, bb = blk[i]
            sums = sums + bs
            sqsums = sqsums + bq
            bad += bb
        if bad:
            raise UnreachableTargetError(
                f"subset {s}: {bad} of {samples} samples have infinite passage time; "
                "no member is reachable from the source"
            )
        results[s] = montecarlo.moments_from_power_sums(samples, sums, sqsums)
    return results


def estimate_moments(
    net: GossipNetwork,
    subset: NodeSubset | Iterable[int],
    k_max: int,
    samples: int,
    seed: int = 0,
    workers: int = 1,
) -> list[MomentEstimate]:
    """Empirical raw moments of the subset's passage time over fresh samples."""
    s = net.check_subset(subset)
    return estimate_moments_subsets(net, [s], k_max, samples, seed, workers)[s]
