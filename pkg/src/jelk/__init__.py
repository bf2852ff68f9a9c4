"""Jackknife empirical likelihood tests for K-sample homogeneity based on
the categorical Gini correlation, with baseline tests and a Monte Carlo
engine for size and power studies.
"""

from .data import DistanceMatrix, PooledData, Sample, build_pooled, pairwise_distances, pooled_from_arrays
from .errors import (
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    FeasibilityError,
    InfeasibleThetaError,
    JelkError,
    ValidationError,
)
from .gini import GiniStats, energy_distance, gini_statistic, u_statistic
from .jackknife import PseudoValues, all_pseudo_values, pseudo_values
from .jel import (
    JelSolution,
    SolverConfig,
    TestResult,
    inner_lambda,
    jel_test,
    neg2_log_likelihood,
    solve_system,
    weights,
)
from .stats import RngStream, chi_square_quantile, chi_square_sf

__version__ = "0.1.0"

__all__ = [
    "DistanceMatrix",
    "PooledData",
    "Sample",
    "build_pooled",
    "pairwise_distances",
    "pooled_from_arrays",
    "ConvergenceError",
    "DegenerateDataError",
    "DomainError",
    "FeasibilityError",
    "InfeasibleThetaError",
    "JelkError",
    "ValidationError",
    "GiniStats",
    "energy_distance",
    "gini_statistic",
    "u_statistic",
    "PseudoValues",
    "all_pseudo_values",
    "pseudo_values",
    "JelSolution",
    "SolverConfig",
    "TestResult",
    "inner_lambda",
    "jel_test",
    "neg2_log_likelihood",
    "solve_system",
    "weights",
    "RngStream",
    "chi_square_quantile",
    "chi_square_sf",
]
