"""Wildfire risk metrics for power lines and risk-budgeted shutoff planning."""

from .analysis import StudyResults, rolling_average, similarity, similarity_matrix, unique_lines
from .config import StudyConfig, load_config
from .dispatch import DaySimulation, DispatchResult, dispatch_fixed, simulate_day
from .errors import ConfigError, DataError, PspsError, SolverError
from .metrics import ALL_METRICS, HighRiskThreshold, LineRiskTable, MetricKind, aggregate, compute_high_risk_threshold
from .network import Network, load_demand, load_network
from .ops import OpsInstance, OpsSolution, build_ops, plan_ops_day, solve_ops, worst_case_hour
from .raster import RiskRaster, load_raster, trace_line
from .threshold import DeEnergizationPlan, Method, compute_percentile, plan_threshold

__version__ = "0.1.0"

__all__ = [
    "ALL_METRICS",
    "ConfigError",
    "DataError",
    "DaySimulation",
    "DeEnergizationPlan",
    "DispatchResult",
    "HighRiskThreshold",
    "LineRiskTable",
    "Method",
    "MetricKind",
    "Network",
    "OpsInstance",
    "OpsSolution",
    "PspsError",
    "RiskRaster",
    "SolverError",
    "StudyConfig",
    "StudyResults",
    "aggregate",
    "build_ops",
    "compute_high_risk_threshold",
    "compute_percentile",
    "dispatch_fixed",
    "load_config",
    "load_demand",
    "load_network",
    "load_raster",
    "plan_ops_day",
    "plan_threshold",
    "rolling_average",
    "similarity",
    "similarity_matrix",
    "simulate_day",
    "solve_ops",
    "trace_line",
    "unique_lines",
    "worst_case_hour",
]
