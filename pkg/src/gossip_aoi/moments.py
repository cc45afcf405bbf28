"""Exact age moments via recursion over growing node subsets.

For a subset S of non-source nodes, the minimum age over S in steady state
has raw moments v_S^k satisfying

    v_S^k = (k * v_S^(k-1) + sum_e lambda_e * v_(S+e)^k) / (lambda_0(S) + sum_e lambda_e)

where e runs over the edges that carry information into S from non-source
outside nodes, S+e adjoins the outside endpoint of e, and lambda_0(S) is the
total direct source rate into S.  Subsets with no incoming boundary edges
bottom out at v^k = k! / lambda_0(S)^k — the raw moments of an exponential
with rate lambda_0(S) — and at +inf when lambda_0(S) = 0, since such a
subset can never hear from the source at all.

The recursion only ever visits strict supersets, so memoized evaluation over
subset bitmasks terminates at the full node set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .network import GossipNetwork, NodeSubset, as_subset

MAX_MOMENT_ORDER = 20
EXHAUSTIVE_CAP = 20          # solve_all enumerates 2^N - 1 subsets
DEFAULT_MEMO_LIMIT = 1 << 21


class MemoLimitError(RuntimeError):
    """Raised when the subset memo table outgrows its configured limit."""


def _check_order(k_max: int) -> int:
    if not isinstance(k_max, int) or k_max < 1:
        raise ValueError(f"moment order must be a positive integer, got {k_max!r}")
    if k_max > MAX_MOMENT_ORDER:
        raise ValueError(f"moment order {k_max} exceeds the supported maximum of {MAX_MOMENT_ORDER}")
    return k_max


@dataclass(frozen=True)
class MomentTable:
    """Moment vectors (v^0..v^K) for every non-empty subset, keyed by bitmask."""

    k_max: int
    entries: dict[int, tuple[float, ...]]

    def get(self, subset: NodeSubset | Iterable[int]) -> tuple[float, ...]:
        return self.entries[as_subset(subset).mask]

    def csv_header(self) -> list[str]:
        return ["subset"] + [f"v{k}" for k in range(1, self.k_max + 1)]

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for mask in sorted(self.entries):
            ids = NodeSubset(mask).ids()
            vec = self.entries[mask]
            rows.append([",".join(map(str, ids))] + [_render_value(v) for v in vec[1:]])
        return rows

    def json_map(self) -> dict[str, list[float | str]]:
        return {
            ",".join(map(str, NodeSubset(mask).ids())): [_render_value_json(v) for v in self.entries[mask][1:]]
            for mask in sorted(self.entries)
        }


def _render_value(v: float) -> str:
    return "inf" if math.isinf(v) else repr(v)


def _render_value_json(v: float) -> float | str:
    return "inf" if math.isinf(v) else v


class MomentSolver:
    """Memoized evaluator of the subset moment recursion for one network.

    One solver instance owns a memo of per-subset moment vectors up to
    ``k_max``; subsets found to have zero total source rate (the +inf bottom
    cases) are collected in :attr:`zero_rate_subsets` as a diagnostic.
    """

    def __init__(self, net: GossipNetwork, k_max: int, memo_limit: int = DEFAULT_MEMO_LIMIT):
        self.net = net
        self.k_max = _check_order(k_max)
        self.memo_limit = memo_limit
        self._memo: dict[int, tuple[float, ...]] = {}
        self._zero_rate: set[int] = set()
        # Split edges once: direct source edges feed lambda_0(S), the rest
        # are boundary candidates.  Canonical edge order fixes summation order.
        self._source_edges = [(1 << v, rate) for u, v, rate in net.edges if u == 0]
        self._inner_edges = [(1 << u, 1 << v, rate) for u, v, rate in net.edges if u != 0]

    @property
    def zero_rate_subsets(self) -> tuple[NodeSubset, ...]:
        """Subsets encountered with no boundary edges and zero source rate."""
        return tuple(NodeSubset(m) for m in sorted(self._zero_rate))

    def solve(self, subset: NodeSubset | Iterable[int]) -> tuple[float, ...]:
        """Moment vector (v^0, v^1, ..., v^k_max) for one subset."""
        s = self.net.check_subset(subset)
        if not s:
            raise ValueError("subset must be non-empty")
        return self._vector(s.mask)

    def solve_all(self) -> MomentTable:
        """Moment vectors for every non-empty subset (node count capped)."""
        n = self.net.node_count
        if n > EXHAUSTIVE_CAP:
            raise ValueError(
                f"exhaustive solve is capped at {EXHAUSTIVE_CAP} nodes, network has {n}"
            )
        entries = {mask << 1: self._vector(mask << 1) for mask in range(1, 1 << n)}
        return MomentTable(k_max=self.k_max, entries=entries)

    def _vector(self, mask: int) -> tuple[float, ...]:
        cached = self._memo.get(mask)
        if cached is not None:
            return cached
        if len(self._memo) >= self.memo_limit:
            raise MemoLimitError(
                f"memo table exceeded {self.memo_limit} subsets; raise memo_limit to continue"
            )
        lam0 = 0.0
        for v_bit, rate in self._source_edges:
            if mask & v_bit:
                lam0 += rate
        boundary = [
            (rate, mask | u_bit)
            for u_bit, v_bit, rate in self._inner_edges
            if mask & v_bit and not mask & u_bit
        ]
        vec = [1.0] * (self.k_max + 1)
        if not boundary:
            if lam0 > 0.0:
                for k in range(1, self.k_max + 1):
                    vec[k] = vec[k - 1] * k / lam0
            else:
                self._zero_rate.add(mask)
                for k in range(1, self.k_max + 1):
                    vec[k] = math.inf
        else:
            supersets = [self._vector(sup_mask) for _, sup_mask in boundary]
            denom = lam0 + sum(rate for rate, _ in boundary)
            for k in range(1, self.k_max + 1):
                pushed = sum(rate * sup[k] for (rate, _), sup in zip(boundary, supersets))
                vec[k] = (k * vec[k - 1] + pushed) / denom
        result = tuple(vec)
        if len(self._memo) >= self.memo_limit:
            raise MemoLimitError(
                f"memo table exceeded {self.memo_limit} subsets; raise memo_limit to continue"
            )
        self._memo[mask] = result
        return result


def solve_moments(
    net: GossipNetwork,
    subset: NodeSubset | Iterable[int],
    k_max: int,
    memo_limit: int = DEFAULT_MEMO_LIMIT,
) -> tuple[float, ...]:
    """Exact moment vector (v^0..v^k_max) of the minimum age over ``subset``."""
    return MomentSolver(net, k_max, memo_limit).solve(subset)


def solve_all(net: GossipNetwork, k_max: int, memo_limit: int = DEFAULT_MEMO_LIMIT) -> MomentTable:
    """Exact moment vectors for every non-empty subset of a small network."""
    return MomentSolver(net, k_max, memo_limit).solve_all()


def expected_age(net: GossipNetwork, subset: NodeSubset | Iterable[int]) -> float:
    """Steady-state expected minimum age over the subset."""
    return solve_moments(net, subset, 1)[1]


def first_moment(
    net: GossipNetwork,
    subset: NodeSubset | Iterable[int],
    memo: dict[int, float] | None = None,
) -> float:
    """First moment by the dedicated first-moment recursion.

    Implements v_S = (1 + sum_e lambda_e * v_(S+e)) / (lambda_0(S) + sum_e lambda_e)
    directly, independent of the general solver; kept as a cross-check for
    its k = 1 row.  Pass a shared ``memo`` dict to amortize repeated queries
    against one network.
    """
    s = net.check_subset(subset)
    if not s:
        raise ValueError("subset must be non-empty")
    if memo is None:
        memo = {}
    source_edges = [(1 << v, rate) for u, v, rate in net.edges if u == 0]
    inner_edges = [(1 << u, 1 << v, rate) for u, v, rate in net.edges if u != 0]

    def value(mask: int) -> float:
        cached = memo.get(mask)
        if cached is not None:
            return cached
        lam0 = 0.0
        for v_bit, rate in source_edges:
            if mask & v_bit:
                lam0 += rate
        boundary = [
            (rate, mask | u_bit)
            for u_bit, v_bit, rate in inner_edges
            if mask & v_bit and not mask & u_bit
        ]
        if not boundary:
            result = 1.0 / lam0 if lam0 > 0.0 else math.inf
        else:
            pushed = sum(rate * value(sup_mask) for rate, sup_mask in boundary)
            denom = lam0 + sum(rate for rate, _ in boundary)
            result = (1.0 + pushed) / denom
        memo[mask] = result
        return result

    return value(s.mask)
