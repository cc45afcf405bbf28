"""Age-of-information moments for Poisson gossip networks.

Three independent routes to the same steady-state quantities — an exact
subset recursion, static first-passage sampling, and event-driven
simulation — plus finite-box passage values on the integer lattice and a
CLI that cross-checks the routes against each other.
"""

from .fpp import (
    UnreachableTargetError,
    WeightSample,
    batch_distances,
    estimate_moments,
    estimate_moments_subsets,
    first_passage_time,
    sample_weights,
)
from .lattice import (
    LatticeBox,
    TimeConstantEstimate,
    box_recursion,
    build_box,
    mc_boundary_passage,
    time_constant_estimate,
)
from .moments import (
    MemoLimitError,
    MomentSolver,
    MomentTable,
    expected_age,
    first_moment,
    solve_all,
    solve_moments,
)
from .montecarlo import MomentEstimate
from .network import (
    Edge,
    GossipNetwork,
    NetworkConfigError,
    NodeSubset,
    as_subset,
    boundary_edges,
    load_network,
    rate_into,
    source_rate,
)
from .simulate import (
    PendingReplicasError,
    ReplicationResult,
    SimEvent,
    SimState,
    age_of,
    age_power_integral,
    default_burn_in,
    detect_t0,
    estimate_moments_replication,
    estimate_moments_timeavg,
    new_state,
    pilot_t0,
    replication_results,
    run_until,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "Edge",
    "GossipNetwork",
    "LatticeBox",
    "MemoLimitError",
    "MomentEstimate",
    "MomentSolver",
    "MomentTable",
    "NetworkConfigError",
    "NodeSubset",
    "PendingReplicasError",
    "ReplicationResult",
    "SimEvent",
    "SimState",
    "TimeConstantEstimate",
    "UnreachableTargetError",
    "WeightSample",
    "age_of",
    "age_power_integral",
    "as_subset",
    "batch_distances",
    "boundary_edges",
    "box_recursion",
    "build_box",
    "default_burn_in",
    "detect_t0",
    "estimate_moments",
    "estimate_moments_replication",
    "estimate_moments_subsets",
    "estimate_moments_timeavg",
    "expected_age",
    "first_moment",
    "first_passage_time",
    "load_network",
    "mc_boundary_passage",
    "new_state",
    "pilot_t0",
    "rate_into",
    "replication_results",
    "run_until",
    "sample_weights",
    "solve_all",
    "solve_moments",
    "source_rate",
    "step",
    "time_constant_estimate",
]
