"""Event-driven gossip simulation: event law, ages, and both estimators."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from gossip_aoi import (
    Edge,
    GossipNetwork,
    PendingReplicasError,
    SimState,
    age_of,
    age_power_integral,
    detect_t0,
    estimate_moments_replication,
    estimate_moments_timeavg,
    new_state,
    pilot_t0,
    replication_results,
    run_until,
    solve_moments,
    step,
)
from helpers import line_network, random_network, star_network


def test_edge_selection_frequencies_follow_the_rates():
    net = star_network(1.0, 3.0)
    rng = np.random.default_rng(41)
    state = new_state(net)
    hits = 0
    n = 1_000_000
    for _ in range(n):
        if step(state, net, rng).edge.to_node == 1:
            hits += 1
    freq = hits / n
    se = math.sqrt(0.25 * 0.75 / n)
    assert abs(freq - 0.25) <= 4 * se


def test_source_ring_delivers_the_current_time():
    net = star_network(1.0)
    state = new_state(net)
    event = step(state, net, np.random.default_rng(42))
    assert event.edge == (0, 1, 1.0)
    assert state.timestamps[1] == event.time == state.now
    assert state.received_from_source[1]


def test_stale_ring_leaves_the_newer_timestamp():
    net = GossipNetwork(node_count=2, edges=(Edge(1, 2, 1.0),))
    state = new_state(net)
    state.timestamps[1] = 1.0
    state.timestamps[2] = 3.0
    event = step(state, net, np.random.default_rng(43))
    assert event.old_timestamp == event.new_timestamp == 3.0
    assert state.timestamps[2] == 3.0


def test_step_requires_a_ringing_clock():
    net = GossipNetwork(node_count=1, edges=())
    with pytest.raises(ValueError, match="no edges"):
        step(new_state(net), net, np.random.default_rng(0))


def test_run_until_zero_horizon_is_a_no_op():
    net = line_network(1.0, 2.0)
    state = run_until(new_state(net), net, 0.0, np.random.default_rng(44))
    assert state.now == 0.0
    assert state.timestamps == [0.0, 0.0, 0.0]


def test_run_until_rejects_a_past_horizon():
    net = line_network(1.0)
    state = run_until(new_state(net), net, 5.0, np.random.default_rng(45))
    with pytest.raises(ValueError, match="horizon"):
        run_until(state, net, 1.0, np.random.default_rng(45))


def test_sampled_ages_average_to_the_stationary_mean():
    # Checkpoint the age of a single Exp(1) leaf once per unit time.
    net = star_network(1.0)
    rng = np.random.default_rng(46)
    state = new_state(net)
    ages = []
    for checkpoint in range(10, 10_000):
        run_until(state, net, float(checkpoint), rng)
        ages.append(age_of(state, [1]))
    assert abs(np.mean(ages) - 1.0) <= 0.05


def test_fixed_seed_reproduces_the_trajectory():
    net = line_network(1.0, 2.0)
    a = run_until(new_state(net), net, 25.0, np.random.default_rng(47))
    b = run_until(new_state(net), net, 25.0, np.random.default_rng(47))
    assert a.timestamps == b.timestamps
    assert a.informed_at == b.informed_at


def test_age_of_examples():
    state = SimState(now=7.0, timestamps=[0.0, 3.0, 5.0], informed_at=[0.0, 3.0, 5.0])
    assert age_of(state, [1, 2]) == pytest.approx(2.0)
    assert age_of(state, [1]) == pytest.approx(4.0)

    net = star_network(1.0)
    assert age_of(new_state(net), [1]) == 0.0  # initial timestamps are 0 at t=0

    fresh = new_state(net)
    step(fresh, net, np.random.default_rng(48))
    assert age_of(fresh, [1]) == 0.0  # sampled right at the delivery


def test_detect_t0_examples():
    net = star_network(1.0)
    state = new_state(net)
    assert detect_t0(state, [1]) is None
    event = step(state, net, np.random.default_rng(49))
    assert detect_t0(state, [1]) == event.time

    line = line_network(1.0, 2.0)
    state = new_state(line)
    rng = np.random.default_rng(50)
    while detect_t0(state, [2]) is None:
        step(state, line, rng)
    assert detect_t0(state, [2]) >= state.informed_at[1]

    lonely = GossipNetwork(node_count=2, edges=(Edge(0, 1, 1.0),))
    state = run_until(new_state(lonely), lonely, 100.0, np.random.default_rng(51))
    assert detect_t0(state, [2]) is None
    assert detect_t0(state, [1]) is not None


def test_pilot_t0_bounds_the_informing_time():
    net = line_network(1.0, 2.0)
    times = pilot_t0(net, [2], replicas=8, seed=52)
    assert len(times) == 8
    assert all(0 < t < math.inf for t in times)

    lonely = GossipNetwork(node_count=2, edges=(Edge(0, 1, 1.0),))
    with pytest.raises(PendingReplicasError, match="pilot"):
        pilot_t0(lonely, [2], replicas=1, seed=53, event_cap=50)


def test_age_power_integral_closed_form():
    assert age_power_integral(2.0, 3.0, 2) == pytest.approx(39.0, abs=1e-12)
    assert age_power_integral(0.0, 2.0, 1) == pytest.approx(2.0)
    assert age_power_integral(1.0, 0.0, 3) == 0.0


def test_timeavg_star_matches_the_stationary_mean():
    net = star_network(1.0)
    est = estimate_moments_timeavg(net, [1], 1, 100_000.0, 50.0, seed=54)[0]
    assert abs(est.mean - 1.0) <= 0.02
    assert est.std_error > 0


def test_timeavg_line_second_moment():
    net = line_network(1.0, 2.0)
    estimates = estimate_moments_timeavg(net, [2], 2, 50_000.0, 50.0, seed=55)
    assert abs(estimates[1].mean - 3.5) <= 0.05 * 3.5
    assert abs(estimates[0].mean - 1.5) <= 0.05 * 1.5


def test_timeavg_warns_when_burn_in_precedes_t0():
    net = star_network(1.0)
    with pytest.warns(RuntimeWarning, match="burn"):
        estimate_moments_timeavg(net, [1], 1, 50.0, 1e-9, seed=56)


def test_timeavg_warns_when_the_subset_is_never_informed():
    net = GossipNetwork(node_count=2, edges=(Edge(0, 1, 1.0),))
    with pytest.warns(RuntimeWarning):
        estimate_moments_timeavg(net, [2], 1, 50.0, 10.0, seed=57)


def test_replication_star_and_line_moments():
    star = star_network(1.0)
    estimates = estimate_moments_replication(star, [1], 2, 100_000, 50.0, seed=58)
    assert abs(estimates[0].mean - 1.0) <= 4 * estimates[0].std_error
    assert abs(estimates[1].mean - 2.0) <= 4 * estimates[1].std_error

    line = line_network(1.0, 2.0)
    est = estimate_moments_replication(line, [2], 1, 100_000, 50.0, seed=59)[0]
    assert abs(est.mean - 1.5) <= 4 * est.std_error


def test_replication_agrees_with_the_solver_on_a_random_network():
    rng = np.random.default_rng(60)
    net = random_network(rng, 5, p=0.5, reachable=True)
    subset = (2, 4)
    horizon = 3.0 * max(pilot_t0(net, net.full_subset(), seed=61))
    exact = solve_moments(net, subset, 3)
    estimates = estimate_moments_replication(net, subset, 3, 60_000, horizon, seed=61)
    for k in (1, 2, 3):
        est = estimates[k - 1]
        assert abs(est.mean - exact[k]) <= 4 * est.std_error


def test_replication_counts_and_rejects_pending_replicas():
    net = line_network(0.5, 0.5)
    subset = net.check_subset([2])
    result = replication_results(net, [subset], 1, 2000, 2.0, seed=62)[subset]
    assert result.pending > 0
    assert result.estimates[0].sample_count == result.replicas - result.pending
    with pytest.raises(PendingReplicasError, match="pending|informed"):
        estimate_moments_replication(net, [2], 1, 2000, 2.0, seed=62)


def test_replication_deterministic_across_workers():
    net = line_network(1.0, 2.0)
    one = estimate_moments_replication(net, [2], 2, 40_000, 30.0, seed=63, workers=1)
    two = estimate_moments_replication(net, [2], 2, 40_000, 30.0, seed=63, workers=2)
    assert one == two


def test_replication_is_stationary_past_t0():
    net = line_network(1.0, 2.0)
    h = 30.0
    at_h = estimate_moments_replication(net, [2], 2, 30_000, h, seed=64)
    at_2h = estimate_moments_replication(net, [2], 2, 30_000, 2 * h, seed=65)
    for k in (0, 1):
        gap = abs(at_h[k].mean - at_2h[k].mean)
        assert gap <= 4 * math.hypot(at_h[k].std_error, at_2h[k].std_error)


def test_inter_event_gaps_are_exponential():
    net = line_network(1.0, 2.0)
    rng = np.random.default_rng(66)
    state = new_state(net)
    times = [0.0]
    for _ in range(100_000):
        times.append(step(state, net, rng).time)
    gaps = np.diff(times)
    result = stats.kstest(gaps, "expon", args=(0, 1 / net.total_rate))
    assert result.pvalue >= 0.001


def test_trajectory_invariants_hold_throughout():
    rng = np.random.default_rng(67)
    net = random_network(rng, 4, p=0.5, reachable=True)
    state = new_state(net)
    last = list(state.timestamps)
    informed_seen = [False] * (net.node_count + 1)
    for _ in range(2000):
        event = step(state, net, rng)
        assert event.old_timestamp <= event.new_timestamp <= event.time
        for u in range(1, net.node_count + 1):
            assert 0.0 <= state.timestamps[u] <= state.now
            assert state.timestamps[u] >= last[u]  # timestamps never move back
            if informed_seen[u]:
                assert state.received_from_source[u]  # informed is sticky
            informed_seen[u] = state.received_from_source[u]
            assert age_of(state, [u]) >= 0.0
        last = list(state.timestamps)
