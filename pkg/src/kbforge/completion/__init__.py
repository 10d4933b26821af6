"""Threshold calibration, candidate generation, and completion estimates."""

from .candidates import (
    MissingPairStub,
    candidates_from_predictions,
    sample_for_review,
    stubs_from_pairs,
    verbalize,
)
from .estimate import estimate_completion, format_estimates
from .thresholds import ThresholdProfile, calibrate, filter_high_accuracy

__all__ = [
    "MissingPairStub",
    "ThresholdProfile",
    "calibrate",
    "candidates_from_predictions",
    "estimate_completion",
    "filter_high_accuracy",
    "format_estimates",
    "sample_for_review",
    "stubs_from_pairs",
    "verbalize",
]
