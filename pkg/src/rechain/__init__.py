"""Replacement-chain route scheduling for two-level bidirectional Clos networks.

The library schedules unit-rate connections between low-level switches through
top-level switches, rearranging as little of the existing routing as possible.
Single connections are placed via shortest replacement chains found by
iterative-deepening search over bit-vector availability indices; drivers build
static reconfigurations and handle live per-connection demand changes on top
of that primitive.
"""

from .model import (
    AtomicModification,
    CapacityOverflow,
    ClosError,
    ConnectionMissing,
    DimensionMismatch,
    InfeasibleDemand,
    NetworkShape,
    ProportionalWeights,
    Violation,
    capacities_from_weights,
    demand_feasible,
    edge_counts,
    network_load,
    num_connections,
    num_rearrangements,
    satisfies_demand,
    validate_scheme,
)
from .oracle import OracleLimits, OracleLimitExceeded, oracle_min_chain_length, oracle_min_rearrangements
from .scheduler import (
    DemandChange,
    ReconfigResult,
    ScheduleFailure,
    apply_demand_change,
    random_scheme_for_demand,
    reconfigure_static,
)
from .search import (
    ReplacementChain,
    SearchConfig,
    SearchResult,
    SearchStats,
    breadth_limit,
    schedule_connection,
    schedule_connection_refined,
    two_switch_bfs,
)
from .state import SchedulerState, rebuild_from_scratch
from .convert import (
    BipartiteColoring,
    SymmetricConversion,
    bidi_to_symmetric,
    convert_demand,
    verify_conversion,
)
from .traffic import (
    TraceEvent,
    TraceParams,
    demand_changes_dynamic,
    demand_from_traffic_static,
    load_trace_csv,
    synthetic_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AtomicModification",
    "BipartiteColoring",
    "CapacityOverflow",
    "ClosError",
    "ConnectionMissing",
    "DemandChange",
    "DimensionMismatch",
    "InfeasibleDemand",
    "NetworkShape",
    "OracleLimitExceeded",
    "OracleLimits",
    "ProportionalWeights",
    "ReconfigResult",
    "ReplacementChain",
    "ScheduleFailure",
    "SchedulerState",
    "SearchConfig",
    "SearchResult",
    "SearchStats",
    "SymmetricConversion",
    "TraceEvent",
    "TraceParams",
    "Violation",
    "apply_demand_change",
    "bidi_to_symmetric",
    "breadth_limit",
    "capacities_from_weights",
    "convert_demand",
    "demand_changes_dynamic",
    "demand_feasible",
    "demand_from_traffic_static",
    "edge_counts",
    "load_trace_csv",
    "network_load",
    "num_connections",
    "num_rearrangements",
    "oracle_min_chain_length",
    "oracle_min_rearrangements",
    "random_scheme_for_demand",
    "rebuild_from_scratch",
    "reconfigure_static",
    "satisfies_demand",
    "schedule_connection",
    "schedule_connection_refined",
    "synthetic_trace",
    "two_switch_bfs",
    "validate_scheme",
    "verify_conversion",
]
