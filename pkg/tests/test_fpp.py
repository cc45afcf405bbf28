"""First-passage sampler: worked values, oracles, and determinism."""

from __future__ import annotations

import math

import numpy as np
import pytest

from gossip_aoi import (
    Edge,
    GossipNetwork,
    UnreachableTargetError,
    WeightSample,
    batch_distances,
    estimate_moments,
    first_passage_time,
    sample_weights,
    solve_moments,
)
from helpers import all_subsets, brute_force_passage, line_network, random_network, star_network


def test_sample_weights_follow_the_edge_rate():
    net = star_network(2.0)
    rng = np.random.default_rng(31)
    draws = np.array([sample_weights(net, rng).weights[0] for _ in range(1_000_000)])
    assert np.all(draws > 0)
    assert abs(draws.mean() - 0.5) <= 4 * (0.5 / 1e3)


def test_sample_weights_deterministic_for_fixed_seed():
    net = line_network(1.0, 2.0)
    first = sample_weights(net, np.random.default_rng(7)).weights
    second = sample_weights(net, np.random.default_rng(7)).weights
    assert np.array_equal(first, second)


def test_first_passage_time_examples():
    line = line_network(1.0, 2.0)
    sample = WeightSample(weights=np.array([0.3, 0.9]))
    assert first_passage_time(line, sample, [2]) == pytest.approx(1.2, abs=1e-15)
    assert first_passage_time(line, sample, [1]) == pytest.approx(0.3, abs=1e-15)

    star = star_network(1.0, 1.0)
    assert first_passage_time(star, WeightSample(np.array([0.7, 0.2])), [1, 2]) == 0.2

    lonely = GossipNetwork(node_count=2, edges=(Edge(0, 1, 1.0),))
    assert first_passage_time(lonely, WeightSample(np.array([0.4])), [2]) == math.inf


def test_first_passage_time_validates_input():
    net = line_network(1.0, 2.0)
    with pytest.raises(ValueError, match="weights"):
        first_passage_time(net, WeightSample(np.array([0.3])), [2])


def test_estimate_moments_star_and_line():
    star = star_network(1.0)
    estimates = estimate_moments(star, [1], 2, 1_000_000, seed=3)
    assert abs(estimates[0].mean - 1.0) <= 4 * estimates[0].std_error
    assert abs(estimates[1].mean - 2.0) <= 4 * estimates[1].std_error
    assert estimates[0].sample_count == 1_000_000

    line = line_network(1.0, 2.0)
    est = estimate_moments(line, [2], 1, 1_000_000, seed=4)[0]
    assert abs(est.mean - 1.5) <= 4 * est.std_error


def test_estimates_bit_identical_across_runs_and_workers():
    net = line_network(1.0, 2.0)
    base = estimate_moments(net, [2], 3, 70_000, seed=42)
    again = estimate_moments(net, [2], 3, 70_000, seed=42)
    spread = estimate_moments(net, [2], 3, 70_000, seed=42, workers=3)
    assert base == again == spread


def test_unreachable_subset_is_reported():
    net = GossipNetwork(node_count=2, edges=(Edge(0, 1, 1.0),))
    with pytest.raises(UnreachableTargetError, match=r"\{2\}"):
        estimate_moments(net, [2], 1, 1000, seed=0)


def test_passage_time_is_pointwise_monotone_in_the_subset():
    rng = np.random.default_rng(33)
    net = random_network(rng, 5, p=0.5, reachable=True)
    for _ in range(100):
        sample = sample_weights(net, rng)
        times = {ids: first_passage_time(net, sample, ids) for ids in all_subsets(5)}
        for small in all_subsets(5):
            for big in all_subsets(5):
                if set(small) < set(big):
                    assert times[big] <= times[small]


def test_dijkstra_matches_exhaustive_path_minimum():
    rng = np.random.default_rng(34)
    for _ in range(5):
        n = int(rng.integers(3, 7))
        net = random_network(rng, n, p=0.35)
        subsets = [(v,) for v in range(1, n + 1)]
        subsets += [all_subsets(n)[int(rng.integers(len(all_subsets(n))))] for _ in range(3)]
        for _ in range(25):
            sample = sample_weights(net, rng)
            for ids in subsets:
                expected = brute_force_passage(net, sample.weights, ids)
                assert first_passage_time(net, sample, ids) == expected


def test_no_two_paths_tie_in_float():
    # Distinct paths carry continuous weights; exact float ties should not occur.
    net = GossipNetwork(
        node_count=3,
        edges=(
            Edge(0, 1, 1.0),
            Edge(0, 2, 2.0),
            Edge(1, 2, 1.5),
            Edge(1, 3, 0.8),
            Edge(2, 3, 1.2),
        ),
    )
    paths = [(0, 3), (1, 4), (0, 2, 4)]  # edge indices of the three 0->3 routes
    rng = np.random.default_rng(35)
    weights = np.array([sample_weights(net, rng).weights for _ in range(100_000)])
    sums = np.zeros((len(weights), len(paths)))
    for j, path in enumerate(paths):
        acc = np.zeros(len(weights))
        for edge_index in path:
            acc = acc + weights[:, edge_index]
        sums[:, j] = acc
    hits = (sums == sums.min(axis=1, keepdims=True)).sum(axis=1)
    assert np.all(hits == 1)


def test_batch_distances_equal_scalar_shortest_paths():
    rng = np.random.default_rng(36)
    for _ in range(4):
        n = int(rng.integers(2, 7))
        net = random_network(rng, n, p=0.4)
        weights = np.array([sample_weights(net, rng).weights for _ in range(50)])
        dist = batch_distances(net, weights)
        for i in range(len(weights)):
            sample = WeightSample(weights[i])
            for v in range(1, n + 1):
                assert dist[i, v] == first_passage_time(net, sample, [v])


def test_sampler_agrees_with_the_solver_on_a_random_network():
    rng = np.random.default_rng(37)
    net = random_network(rng, 5, p=0.5, reachable=True)
    for ids in all_subsets(5):
        exact = solve_moments(net, ids, 3)
        estimates = estimate_moments(net, ids, 3, 200_000, seed=38)
        for k in (1, 2, 3):
            est = estimates[k - 1]
            assert abs(est.mean - exact[k]) <= 4 * est.std_error
