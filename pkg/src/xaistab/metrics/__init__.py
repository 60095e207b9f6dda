"""Robustness metrics (MAX-/AVG-Sensitivity) and model performance measures."""

from xaistab.metrics.neighborhood import NORMS, NeighborhoodSpec, perturbations, sample_neighborhood
from xaistab.metrics.performance import mae, mse
from xaistab.metrics.sensitivity import (
    METRICS,
    MODES,
    ExplainerHandle,
    SensitivityResult,
    avg_sensitivity,
    evaluate_instances,
    explanation_distances,
    frobenius_diff,
    instance_seed,
    max_sensitivity,
    reduce_distances,
)

__all__ = [
    "ExplainerHandle",
    "METRICS",
    "MODES",
    "NORMS",
    "NeighborhoodSpec",
    "SensitivityResult",
    "avg_sensitivity",
    "evaluate_instances",
    "explanation_distances",
    "frobenius_diff",
    "instance_seed",
    "mae",
    "max_sensitivity",
    "mse",
    "perturbations",
    "reduce_distances",
    "sample_neighborhood",
]
