"""Event-driven simulation of the gossip process.

All edge clocks are superposed into one global exponential clock of rate
Lambda = sum of edge rates; each event picks edge e with probability
lambda_e / Lambda and delivers the sender's timestamp to the receiver, which
keeps the newer of the two (the source always sends the current time).  The
age of node u at time t is t - N_u(t) where N_u is its held timestamp.

Two estimators are provided for the steady-state age moments of a subset:
``estimate_moments_replication`` (one observation per independent replica at
a fixed horizon) and ``estimate_moments_timeavg`` (exact per-segment time
integrals along a single long trajectory, batch-means standard errors).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import partial
from typing import Iterable, NamedTuple

import numpy as np

from . import montecarlo
from .montecarlo import MomentEstimate
from .network import Edge, GossipNetwork, NodeSubset, as_subset

PILOT_REPLICAS = 32
TIMEAVG_BATCHES = 30
PENDING_TOLERANCE = 0.01


class PendingReplicasError(RuntimeError):
    """Raised when too many replicas never become source-informed."""


class SimEvent(NamedTuple):
    time: float
    edge: Edge
    old_timestamp: float
    new_timestamp: float


@dataclass
class SimState:
    """Mutable state of one trajectory: clock, per-node timestamps, and the
    time each node first held source-originated information (nan = not yet)."""

    now: float
    timestamps: list[float]
    informed_at: list[float]

    @property
    def received_from_source(self) -> list[bool]:
        return [not math.isnan(t) for t in self.informed_at]


def new_state(net: GossipNetwork) -> SimState:
    n = net.node_count + 1
    return SimState(now=0.0, timestamps=[0.0] * n, informed_at=[math.nan] * n)


def _draw(state: SimState, net: GossipNetwork, rng: np.random.Generator) -> tuple[float, int]:
    """Next event: (absolute time, edge index)."""
    total = net.total_rate
    if not total > 0.0:
        raise ValueError("network has no edges; the event clock never rings")
    t_next = state.now + rng.exponential(1.0 / total)
    idx = int(np.searchsorted(net.rate_cumsum, rng.random() * total, side="right"))
    return t_next, min(idx, len(net.edges) - 1)


def _apply(state: SimState, net: GossipNetwork, edge_index: int, time: float) -> SimEvent:
    edge = net.edges[edge_index]
    u, v = edge.from_node, edge.to_node
    sent = time if u == 0 else state.timestamps[u]
    old = state.timestamps[v]
    new = max(old, sent)
    state.timestamps[v] = new
    if (u == 0 or sent > 0.0) and math.isnan(state.informed_at[v]):
        state.informed_at[v] = time
    state.now = time
    return SimEvent(time=time, edge=edge, old_timestamp=old, new_timestamp=new)


def step(state: SimState, net: GossipNetwork, rng: np.random.Generator) -> SimEvent:
    """Advance by one event and apply it."""
    t_next, idx = _draw(state, net, rng)
    return _apply(state, net, idx, t_next)


def run_until(
    state: SimState, net: GossipNetwork, horizon: float, rng: np.random.Generator
) -> SimState:
    """Advance the trajectory to exactly ``horizon``.

    Events strictly before the horizon are applied; the first draw at or past
    it is discarded (exact in law, by memorylessness of the clocks) and the
    clock is left at the horizon, so ages read off the returned state are
    ages at exactly the horizon.
    """
    if horizon < state.now:
        raise ValueError(f"horizon {horizon} lies before the current time {state.now}")
    while state.now < horizon:
        t_next, idx = _draw(state, net, rng)
        if t_next >= horizon:
            state.now = horizon
            break
        _apply(state, net, idx, t_next)
    return state


def age_of(state: SimState, subset: NodeSubset | Iterable[int]) -> float:
    """Minimum age over the subset at the state's current time."""
    s = as_subset(subset)
    if not s:
        raise ValueError("subset must be non-empty")
    return state.now - max(state.timestamps[u] for u in s)


def detect_t0(state: SimState, subset: NodeSubset | Iterable[int]) -> float | None:
    """Time the last subset member first became source-informed, None if pending."""
    s = as_subset(subset)
    if not s:
        raise ValueError("subset must be non-empty")
    times = [state.informed_at[u] for u in s]
    if any(math.isnan(t) for t in times):
        return None
    return max(times)


# ---- pilot runs -----------------------------------------------------------


def pilot_t0(
    net: GossipNetwork,
    subset: NodeSubset | Iterable[int],
    replicas: int = PILOT_REPLICAS,
    seed: int = 0,
    event_cap: int = 1_000_000,
) -> list[float]:
    """Per-replica t_0 from short pilot runs (run each replica until informed)."""
    s = net.check_subset(subset)
    if not s:
        raise ValueError("subset must be non-empty")
    montecarlo.check_seed(seed)
    times = []
    for i in range(replicas):
        rng = montecarlo.block_rng(seed, montecarlo.STREAM_PILOT, i)
        state = new_state(net)
        remaining = s.mask
        for _ in range(event_cap):
            event = step(state, net, rng)
            v = event.edge.to_node
            if remaining >> v & 1 and not math.isnan(state.informed_at[v]):
                remaining &= ~(1 << v)
                if remaining == 0:
                    break
        if remaining:
            raise PendingReplicasError(
                f"pilot replica {i}: subset {s} still uninformed after {event_cap} events"
            )
        times.append(state.now)
    return times


def default_burn_in(net: GossipNetwork, subset: NodeSubset | Iterable[int], seed: int = 0) -> float:
    """Twice the worst pilot t_0 — a conservative start for time averaging."""
    return 2.0 * max(pilot_t0(net, subset, seed=seed))


# ---- replication estimator ------------------------------------------------


@dataclass(frozen=True)
class ReplicationResult:
    """Per-subset replication outcome; pending replicas are excluded from the
    estimates and reported in ``pending``."""

    estimates: tuple[MomentEstimate, ...]
    replicas: int
    pending: int


def _replication_block(
    net: GossipNetwork,
    subset_ids: tuple[tuple[int, ...], ...],
    k_max: int,
    sizes: tuple[int, ...],
    horizon: float,
    seed: int,
    block: int,
) -> list[tuple[np.ndarray, np.ndarray, int]]:
    """Simulate one replica block; per subset return (power sums, square sums,
    informed count) over the replicas whose t_0 arrived before the horizon."""
    size = sizes[block]
    rng = montecarlo.block_rng(seed, montecarlo.STREAM_REPLICATION, block)
    cum = net.rate_cumsum
    total = float(cum[-1])
    edge_from = np.array([e.from_node for e in net.edges], dtype=np.int64)
    edge_to = np.array([e.to_node for e in net.edges], dtype=np.int64)
    last = len(net.edges) - 1

    t = np.zeros(size)
    ts = np.zeros((size, net.node_count + 1))
    active = np.ones(size, dtype=bool)
    while True:
        rows = np.flatnonzero(active)
        if rows.size == 0:
            break
        t_new = t[rows] + rng.exponential(1.0 / total, rows.size)
        eidx = np.minimum(np.searchsorted(cum, rng.random(rows.size) * total, side="right"), last)
        live = t_new < horizon
        crossed = rows[~live]
        t[crossed] = horizon
        active[crossed] = False
        arows = rows[live]
        if arows.size:
            tn = t_new[live]
            u = edge_from[eidx[live]]
            v = edge_to[eidx[live]]
            sent = np.where(u == 0, tn, ts[arows, u])
            ts[arows, v] = np.maximum(ts[arows, v], sent)
            t[arows] = tn

    out = []
    for ids in subset_ids:
        cols = ts[:, list(ids)]
        informed = (cols > 0.0).all(axis=1)
        ages = horizon - cols.max(axis=1)[informed]
        sums, sqsums = montecarlo.power_sums(ages, k_max)
        out.append((sums, sqsums, int(informed.sum())))
    return out


def replication_results(
    net: GossipNetwork,
    subsets: Iterable[NodeSubset | Iterable[int]],
    k_max: int,
    replicas: int,
    horizon: float,
    seed: int = 0,
    workers: int = 1,
) -> dict[NodeSubset, ReplicationResult]:
    """Replication estimates for several subsets sharing one set of replicas."""
    from .moments import _check_order

    _check_order(k_max)
    montecarlo.check_seed(seed)
    checked = []
    for subset in subsets:
        s = net.check_subset(subset)
        if not s:
            raise ValueError("subset must be non-empty")
        if s not in checked:
            checked.append(s)
    if replicas < 2:
        raise ValueError(f"need at least 2 replicas, got {replicas}")
    if not horizon > 0.0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    if not net.total_rate > 0.0:
        raise ValueError("network has no edges; the event clock never rings")

    sizes = tuple(montecarlo.block_sizes(replicas, montecarlo.REPLICATION_BLOCK))
    subset_ids = tuple(s.ids() for s in checked)
    fn = partial(_replication_block, net, subset_ids, k_max, sizes, horizon, seed)
    blocks = montecarlo.map_blocks(fn, len(sizes), workers)

    results = {}
    for i, s in enumerate(checked):
        sums = np.zeros(k_max)
        sqsums = np.zeros(k_max)
        count = 0
        for blk in blocks:
            bs, bq, bc = blk[i]
            sums = sums + bs
            sqsums = sqsums + bq
            count += bc
        estimates = (
            tuple(montecarlo.moments_from_power_sums(count, sums, sqsums)) if count else ()
        )
        results[s] = ReplicationResult(estimates=estimates, replicas=replicas, pending=replicas - count)
    return results


def estimate_moments_replication(
    net: GossipNetwork,
    subset: NodeSubset | Iterable[int],
    k_max: int,
    replicas: int,
    horizon: float,
    seed: int = 0,
    workers: int = 1,
) -> list[MomentEstimate]:
    """Raw age moments at the horizon, one observation per replica.

    The horizon should sit well past t_0 (see :func:`pilot_t0`); replicas
    still uninformed at the horizon are excluded (visible via sample_count)
    and more than 1 % of them is an error.
    """
    s = net.check_subset(subset)
    result = replication_results(net, [s], k_max, replicas, horizon, seed, workers)[s]
    if result.pending > PENDING_TOLERANCE * replicas:
        raise PendingReplicasError(
            f"{result.pending} of {replicas} replicas never fully informed subset {s} "
            f"by horizon {horizon}; raise the horizon"
        )
    return list(result.estimates)


# ---- time-average estimator ------------------------------------------------


def age_power_integral(start_age: float, duration: float, k: int) -> float:
    """Integral of (start_age + s)^k for s in [0, duration]."""
    return ((start_age + duration) ** (k + 1) - start_age ** (k + 1)) / (k + 1)


def estimate_moments_timeavg(
    net: GossipNetwork,
    subset: NodeSubset | Iterable[int],
    k_max: int,
    horizon: float,
    burn_in: float,
    seed: int = 0,
    batches: int = TIMEAVG_BATCHES,
    trace: list[SimEvent] | None = None,
) -> list[MomentEstimate]:
    """Time-averaged raw age moments over [burn_in, horizon] of one trajectory.

    Between events the age grows linearly, so each segment contributes its
    exact integral; standard errors come from batch means over ``batches``
    equal windows.  A burn-in shorter than the trajectory's t_0 is flagged
    with a warning.  Pass a list as ``trace`` to capture every event.
    """
    from .moments import _check_order

    _check_order(k_max)
    montecarlo.check_seed(seed)
    s = net.check_subset(subset)
    if not s:
        raise ValueError("subset must be non-empty")
    if batches < 2:
        raise ValueError(f"need at least 2 batches, got {batches}")
    if burn_in < 0 or not horizon > burn_in:
        raise ValueError(f"need 0 <= burn_in < horizon, got burn_in={burn_in}, horizon={horizon}")

    width = (horizon - burn_in) / batches
    sums = np.zeros((batches, k_max))

    def accumulate(a: float, b: float, held: float) -> None:
        lo = max(a, burn_in)
        hi = min(b, horizon)
        while lo < hi:
            j = min(int((lo - burn_in) / width), batches - 1)
            cut = min(hi, burn_in + (j + 1) * width)
            if cut <= lo:
                cut = hi
            for k in range(1, k_max + 1):
                sums[j, k - 1] += age_power_integral(lo - held, cut - lo, k)
            lo = cut

    rng = montecarlo.block_rng(seed, montecarlo.STREAM_TIMEAVG, 0)
    state = new_state(net)
    held = 0.0        # max timestamp over the subset, constant between events
    seg_start = 0.0
    while True:
        t_next, idx = _draw(state, net, rng)
        if t_next >= horizon:
            accumulate(seg_start, horizon, held)
            state.now = horizon
            break
        event = _apply(state, net, idx, t_next)
        if trace is not None:
            trace.append(event)
        if event.edge.to_node in s and event.new_timestamp > held:
            accumulate(seg_start, t_next, held)
            held = event.new_timestamp
            seg_start = t_next

    t0 = detect_t0(state, s)
    if t0 is None:
        warnings.warn(
            f"subset {s} never became source-informed within the horizon {horizon}",
            RuntimeWarning,
            stacklevel=2,
        )
    elif t0 > burn_in:
        warnings.warn(
            f"burn-in {burn_in} ends before t_0 = {t0:.6g}; early-window bias likely",
            RuntimeWarning,
            stacklevel=2,
        )

    batch_means = sums / width
    estimates = []
    for k in range(1, k_max + 1):
        col = batch_means[:, k - 1]
        mean = float(col.mean())
        se = float(col.std(ddof=1) / math.sqrt(batches))
        estimates.append(MomentEstimate(k=k, mean=mean, std_error=se, sample_count=batches))
    return estimates
