"""Outage-balanced resource allocation for downlink NOMA under statistical CSI.

Closed-form max-min power allocation and decoding order for one NOMA block,
user grouping with inter-group time/power optimization, TDMA baselines, a
brute-force verification oracle, and a seeded Monte-Carlo harness.
"""

from .closed_form import compute_balance, optimal_order, optimal_pafs, solve
from .grouping import (
    GroupPartition,
    enumerate_partitions,
    optimal_partition,
    pad_virtual_users,
    partition_count,
    random_partition,
)
from .intergroup import (
    GroupPlan,
    SolverConfig,
    SolverError,
    continuous_allocate,
    discrete_allocate,
    equal_time_allocate,
    f_g,
    f_g_prime,
    f_g_second,
    inner_solve,
    tdma_plan,
)
from .model import (
    AllocationResult,
    DecodingOrder,
    Evaluation,
    PowerAllocation,
    Scenario,
    UserStats,
    decoding_snr,
    evaluate,
    snr_threshold,
)
from .montecarlo import (
    GeometryConfig,
    McConfig,
    McSummary,
    required_snr,
    run_trials,
    sample_scenario,
    summary_to_csv,
)
from .oracle import GridResult, GridSpec, grid_search, swap_test
from .schemes import SchemeOutcome, SchemeSpec, apply_scheme, parse_scheme
from .verification import VerifyRow, builtin_scenarios, verify_builtin, verify_scenario

__version__ = "0.1.0"

__all__ = [
    "AllocationResult",
    "DecodingOrder",
    "Evaluation",
    "GeometryConfig",
    "GridResult",
    "GridSpec",
    "GroupPartition",
    "GroupPlan",
    "McConfig",
    "McSummary",
    "PowerAllocation",
    "Scenario",
    "SchemeOutcome",
    "SchemeSpec",
    "SolverConfig",
    "SolverError",
    "UserStats",
    "VerifyRow",
    "apply_scheme",
    "builtin_scenarios",
    "compute_balance",
    "continuous_allocate",
    "decoding_snr",
    "discrete_allocate",
    "enumerate_partitions",
    "equal_time_allocate",
    "evaluate",
    "f_g",
    "f_g_prime",
    "f_g_second",
    "grid_search",
    "inner_solve",
    "optimal_order",
    "optimal_pafs",
    "optimal_partition",
    "pad_virtual_users",
    "parse_scheme",
    "partition_count",
    "random_partition",
    "required_snr",
    "run_trials",
    "sample_scenario",
    "snr_threshold",
    "solve",
    "summary_to_csv",
    "swap_test",
    "tdma_plan",
    "verify_builtin",
    "verify_scenario",
]
