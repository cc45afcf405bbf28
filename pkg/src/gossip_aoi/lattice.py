"""First-passage times on finite boxes of the integer lattice Z^d.

The box of radius ell is every integer point with l1 norm <= ell; points of
norm exactly ell form the absorbing boundary.  Every nearest-neighbour edge
inside the box carries an independent Exp(1) weight.  The expected passage
time from a growing cluster S to the boundary satisfies

    v_S = (1 + sum_e v_(S+e)) / |E(S)|

where E(S) is the set of box edges with exactly one endpoint in S and a term
is 0 whenever the edge's outside endpoint lies on the boundary: the first
boundary edge to fire costs Exp(|E(S)|) in expectation (hence the 1/|E(S)|
from the unit rates) and otherwise grows the cluster by one vertex.

The recursion enumerates clusters of interior vertices, so it is capped at
boxes whose interior is small; the Monte-Carlo check in
``mc_boundary_passage`` has no such cap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, partial
from typing import Iterable

import numpy as np

from . import montecarlo
from .montecarlo import MomentEstimate

RECURSION_CAP = 22

Vertex = tuple[int, ...]


@dataclass(frozen=True)
class LatticeBox:
    """The l1 ball of radius ell in Z^d with its nearest-neighbour edges."""

    d: int
    ell: int
    vertices: tuple[Vertex, ...]
    edges: tuple[tuple[int, int], ...]   # index pairs (i, j), i < j in vertex order

    @cached_property
    def index(self) -> dict[Vertex, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def boundary(self) -> tuple[bool, ...]:
        return tuple(sum(abs(c) for c in v) == self.ell for v in self.vertices)

    @cached_property
    def interior(self) -> tuple[int, ...]:
        """Vertex indices with l1 norm < ell, in vertex order."""
        return tuple(i for i, b in enumerate(self.boundary) if not b)

    @cached_property
    def origin(self) -> int:
        return self.index[(0,) * self.d]

    @cached_property
    def in_arcs(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per vertex: (neighbour indices, edge indices), both directions of
        every undirected edge sharing one weight slot."""
        ins: list[list[tuple[int, int]]] = [[] for _ in self.vertices]
        for eidx, (i, j) in enumerate(self.edges):
            ins[i].append((j, eidx))
            ins[j].append((i, eidx))
        return tuple(
            (
                np.array([v for v, _ in lst], dtype=np.int64),
                np.array([e for _, e in lst], dtype=np.int64),
            )
            for lst in ins
        )

    @cached_property
    def cluster_arcs(self) -> tuple[tuple[tuple[int, ...], int], ...]:
        """Per interior position: (interior positions of its interior
        neighbours, count of its boundary neighbours)."""
        pos = {v: p for p, v in enumerate(self.interior)}
        out = []
        for i in self.interior:
            interior_nbs = []
            boundary_deg = 0
            frm, _ = self.in_arcs[i]
            for j in frm.tolist():
                if self.boundary[j]:
                    boundary_deg += 1
                else:
                    interior_nbs.append(pos[j])
            out.append((tuple(interior_nbs), boundary_deg))
        return tuple(out)


def build_box(d: int, ell: int) -> LatticeBox:
    """Construct the radius-ell box with canonical vertex and edge order."""
    if d < 1 or ell < 1:
        raise ValueError(f"need d >= 1 and ell >= 1, got d={d}, ell={ell}")
    vertices = tuple(
        sorted(
            v
            for v in itertools.product(range(-ell, ell + 1), repeat=d)
            if sum(abs(c) for c in v) <= ell
        )
    )
    index = {v: i for i, v in enumerate(vertices)}
    edges = []
    for v in vertices:
        for axis in range(d):
            nb = v[:axis] + (v[axis] + 1,) + v[axis + 1 :]
            j = index.get(nb)
            if j is not None:
                i = index[v]
                edges.append((min(i, j), max(i, j)))
    return LatticeBox(d=d, ell=ell, vertices=vertices, edges=tuple(sorted(edges)))


def box_recursion(box: LatticeBox, cluster: Iterable[Vertex]) -> float:
    """Expected Exp(1) passage time from the cluster to the box boundary.

    Memoized over clusters of interior vertices; returns 0 when the cluster
    already touches the boundary.
    """
    seed_positions = []
    pos = {v: p for p, v in enumerate(box.interior)}
    members = list(cluster)
    if not members:
        raise ValueError("cluster must be non-empty")
    for v in members:
        v = tuple(int(c) for c in v)
        idx = box.index.get(v)
        if idx is None:
            raise ValueError(f"vertex {v} lies outside the box (d={box.d}, ell={box.ell})")
        if box.boundary[idx]:
            return 0.0
        seed_positions.append(pos[idx])
    if len(box.interior) > RECURSION_CAP:
        raise ValueError(
            f"interior has {len(box.interior)} vertices, above the recursion cap of "
            f"{RECURSION_CAP}; use mc_boundary_passage instead"
        )

    arcs = box.cluster_arcs
    memo: dict[int, float] = {}

    def value(mask: int) -> float:
        cached = memo.get(mask)
        if cached is not None:
            return cached
        edge_count = 0
        grown: list[int] = []
        p = 0
        m = mask
        while m:
            if m & 1:
                interior_nbs, boundary_deg = arcs[p]
                edge_count += boundary_deg
                for q in interior_nbs:
                    if not mask >> q & 1:
                        edge_count += 1
                        grown.append(mask | (1 << q))
            m >>= 1
            p += 1
        total = 1.0
        for sup_mask in grown:
            total += value(sup_mask)
        result = total / edge_count
        memo[mask] = result
        return result

    start = 0
    for p in seed_positions:
        start |= 1 << p
    return value(start)


@dataclass(frozen=True)
class TimeConstantEstimate:
    """Box passage value from the origin, raw and per unit radius."""

    d: int
    ell: int
    raw: float
    normalized: float


def time_constant_estimate(d: int, ell: int) -> TimeConstantEstimate:
    """Exact origin-to-boundary expectation for the radius-ell box, reported
    both raw and divided by ell.  Neither is claimed to be the infinite-
    lattice time constant; the normalized sequence merely tracks it."""
    box = build_box(d, ell)
    raw = box_recursion(box, [(0,) * d])
    return TimeConstantEstimate(d=d, ell=ell, raw=raw, normalized=raw / ell)


def _lattice_block(
    box: LatticeBox, sizes: tuple[int, ...], seed: int, block: int
) -> tuple[float, float]:
    """One sample block: (sum of passage times, sum of their squares)."""
    size = sizes[block]
    rng = montecarlo.block_rng(seed, montecarlo.STREAM_LATTICE, block)
    u = rng.random((size, len(box.edges)))
    weights = -np.log1p(-u)
    n = len(box.vertices)
    dist = np.full((size, n), np.inf)
    dist[:, box.origin] = 0.0
    changed = True
    while changed:
        changed = False
        for v in range(n):
            frm, eidx = box.in_arcs[v]
            if frm.size == 0:
                continue
            best = (dist[:, frm] + weights[:, eidx]).min(axis=1)
            upd = best < dist[:, v]
            if upd.any():
                dist[upd, v] = best[upd]
                changed = True
    boundary_cols = [i for i, b in enumerate(box.boundary) if b]
    passage = dist[:, boundary_cols].min(axis=1)
    return float(passage.sum()), float((passage * passage).sum())


def mc_boundary_passage(
    d: int, ell: int, samples: int, seed: int = 0, workers: int = 1
) -> MomentEstimate:
    """Monte-Carlo mean passage time from the origin to the box boundary."""
    montecarlo.check_seed(seed)
    box = build_box(d, ell)
    sizes = tuple(montecarlo.block_sizes(samples, montecarlo.LATTICE_BLOCK))
    fn = partial(_lattice_block, box, sizes, seed)
    blocks = montecarlo.map_blocks(fn, len(sizes), workers)
    total = 0.0
    total_sq = 0.0
    for s1, s2 in blocks:
        total += s1
        total_sq += s2
    return montecarlo.moments_from_power_sums(samples, [total], [total_sq])[0]
