"""Exact hitting-time calculus, oracles and Monte Carlo checks for
birth-and-death chains with drift toward 0."""
__version__ = "0.1.0"

from .chain import (
    ChainFamily,
    ChainSpec,
    InvalidChainError,
    InvariantMeasure,
    half_well_versions,
    invariant_measure,
    make_family,
    make_model,
    random_spec,
    validate_spec,
)
from .exact import (
    DriftReport,
    HittingMoments,
    commute_identity,
    comparison_checks,
    drift_report,
    energy_profile,
    hitting_moments,
    mean_hit,
    mean_hit_down,
    mean_hit_two_sided,
    mean_hit_up,
    sd_condition_sweep,
    second_moment_down,
    second_moment_up,
    step_variance,
)
from .laws import BudgetExceededError, ExactLaw, hitting_law
from .mc import RngPolicy, SampleSet, sample_hit, sample_last_exit, sample_sweep

__all__ = [
    "ChainFamily",
    "ChainSpec",
    "InvalidChainError",
    "InvariantMeasure",
    "half_well_versions",
    "invariant_measure",
    "make_family",
    "make_model",
    "random_spec",
    "validate_spec",
    "DriftReport",
    "HittingMoments",
    "commute_identity",
    "comparison_checks",
    "drift_report",
    "energy_profile",
    "hitting_moments",
    "mean_hit",
    "mean_hit_down",
    "mean_hit_two_sided",
    "mean_hit_up",
    "sd_condition_sweep",
    "second_moment_down",
    "second_moment_up",
    "step_variance",
    "BudgetExceededError",
    "ExactLaw",
    "hitting_law",
    "RngPolicy",
    "SampleSet",
    "sample_hit",
    "sample_last_exit",
    "sample_sweep",
]
