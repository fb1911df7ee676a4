"""Threshold storage policies for age of information over an erasure channel."""

from .closed_form import (
    NEVER,
    StationaryDist,
    average_cost,
    cost_excess,
    format_threshold,
    never_store_cost,
    parse_threshold,
    stationary_distribution,
)
from .mdp import (
    TabularPolicy,
    ValueTable,
    check_monotone_in_age,
    check_switch_inequality,
    discounted_value_iteration,
    extract_threshold,
    relative_value_iteration,
)
from .model import State, SystemParams, stage_cost, transition
from .optimizer import OptimizeResult, brute_force_threshold, find_optimal_threshold
from .simulator import SimConfig, SimStats, simulate

__version__ = "0.1.0"

__all__ = [
    "NEVER",
    "OptimizeResult",
    "SimConfig",
    "SimStats",
    "State",
    "StationaryDist",
    "SystemParams",
    "TabularPolicy",
    "ValueTable",
    "average_cost",
    "brute_force_threshold",
    "check_monotone_in_age",
    "check_switch_inequality",
    "cost_excess",
    "discounted_value_iteration",
    "extract_threshold",
    "find_optimal_threshold",
    "format_threshold",
    "never_store_cost",
    "parse_threshold",
    "relative_value_iteration",
    "simulate",
    "stage_cost",
    "stationary_distribution",
    "transition",
]
