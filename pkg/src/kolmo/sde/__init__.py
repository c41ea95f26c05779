"""Simulation engine: log-Euler stepping, occupation statistics and ensembles."""
from .engine import (
    OccupationStats,
    SimConfig,
    Trajectory,
    build_table_mc,
    estimate_exponents,
    noise_factor,
    noise_increments,
    occupation_stats,
    simulate,
    simulate_ensemble,
    step_log_euler,
    trial_rng,
    write_stats_csv,
)
from .ensemble import (
    OutcomeFrequencies,
    VerificationReport,
    distance_to_axes,
    estimate_outcome_frequencies,
    survivor_pattern,
    verify_classification,
)

__all__ = [
    "OccupationStats", "SimConfig", "Trajectory", "build_table_mc", "estimate_exponents",
    "noise_factor", "noise_increments", "occupation_stats", "simulate", "simulate_ensemble",
    "step_log_euler", "trial_rng", "write_stats_csv", "OutcomeFrequencies", "VerificationReport",
    "distance_to_axes", "estimate_outcome_frequencies", "survivor_pattern", "verify_classification",
]
