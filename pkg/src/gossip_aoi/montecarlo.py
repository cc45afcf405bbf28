"""Shared Monte-Carlo plumbing: derived RNG streams, block scheduling, and
moment estimates.

Work is split into fixed-size blocks, each owning an RNG stream derived from
(master seed, stream tag, block index).  Results are reduced in block order,
so estimates are bit-identical across runs and across worker counts; the
worker pool only changes who computes a block, never what it contains.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, TypeVar

import numpy as np

# Stream tags keep the independent consumers of one master seed apart.
STREAM_FPP = 1
STREAM_REPLICATION = 2
STREAM_PILOT = 3
STREAM_LATTICE = 4
STREAM_TIMEAVG = 5

# Block sizes are constants on purpose: block boundaries define the RNG
# streams, so they must never depend on worker count or machine shape.
FPP_BLOCK = 32768
REPLICATION_BLOCK = 16384
LATTICE_BLOCK = 32768

T = TypeVar("T")


@dataclass(frozen=True)
class MomentEstimate:
    """A single empirical raw moment with its standard error."""

    k: int
    mean: float
    std_error: float
    sample_count: int


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    """Generator for one (seed, stream, block) cell; independent across cells."""
    return np.random.default_rng([seed, stream, block])


def check_seed(seed: int) -> int:
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0 or seed >= 1 << 64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return seed


def block_sizes(total: int, block: int) -> list[int]:
    """Split ``total`` items into fixed-size blocks (last one ragged)."""
    if total < 1:
        raise ValueError(f"sample count must be positive, got {total}")
    full, rest = divmod(total, block)
    return [block] * full + ([rest] if rest else [])


def map_blocks(fn: Callable[[int], T], n_blocks: int, workers: int = 1) -> list[T]:
    """Evaluate ``fn`` on block indices 0..n_blocks-1, results in index order.

    ``fn`` must be picklable (a module-level function or functools.partial of
    one) when workers > 1.
    """
    if workers < 1:
        raise ValueError(f"worker count must be positive, got {workers}")
    if workers == 1 or n_blocks <= 1:
        return [fn(b) for b in range(n_blocks)]
    with ProcessPoolExecutor(max_workers=min(workers, n_blocks)) as pool:
        return list(pool.map(fn, range(n_blocks)))


def power_sums(values: np.ndarray, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-k sums over ``values``: (sum of x^k, sum of x^(2k)) for k = 1..k_max.

    The x^(2k) sums feed the standard errors of the x^k means.
    """
    powers = []
    p = np.ones_like(values)
    for _ in range(2 * k_max):
        p = p * values
        powers.append(p)
    sums = np.array([powers[k - 1].sum() for k in range(1, k_max + 1)])
    sqsums = np.array([powers[2 * k - 1].sum() for k in range(1, k_max + 1)])
    return sums, sqsums


def moments_from_power_sums(
    count: int, power_sums: Sequence[float], square_sums: Sequence[float]
) -> list[MomentEstimate]:
    """Build per-k estimates from sums of x^k and x^(2k) over ``count`` samples.

    power_sums[k-1] and square_sums[k-1] hold sum(x^k) and sum(x^(2k)).
    """
    estimates = []
    for k, (s1, s2) in enumerate(zip(power_sums, square_sums), start=1):
        mean = float(s1) / count
        if count > 1:
            var = max(float(s2) - count * mean * mean, 0.0) / (count - 1)
            se = math.sqrt(var / count)
        else:
            se = math.inf
        estimates.append(MomentEstimate(k=k, mean=mean, std_error=se, sample_count=int(count)))
    return estimates
