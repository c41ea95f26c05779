"""Long-run classification of stochastic Kolmogorov and Lotka-Volterra models."""
from .core import (
    ClassificationOutcome,
    ErgodicMeasureInfo,
    KolmogorovModel,
    LVModel,
    NoiseCovariance,
    OutcomeKind,
    Tolerances,
    validate_lv,
)
from .classifier import classify, classify_3d, classify_by_theorems, rps_criterion
from .lv_analysis import build_measure_tree, exponents_at, solve_boundary_means

__version__ = "0.1.0"

__all__ = [
    "ClassificationOutcome", "ErgodicMeasureInfo", "KolmogorovModel", "LVModel", "NoiseCovariance",
    "OutcomeKind", "Tolerances", "validate_lv", "classify", "classify_3d", "classify_by_theorems",
    "rps_criterion", "build_measure_tree", "exponents_at", "solve_boundary_means", "__version__",
]
