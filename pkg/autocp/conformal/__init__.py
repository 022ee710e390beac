from .calibration import fit_bootstrap, fit_cross, fit_predictor, fit_split
from .diagnostics import binned_coverage, coverage, length_correlation, mean_length
from .predictor import IntervalPredictor
from .scores import (
    INFINITE_INTERVAL,
    HeadValues,
    PredictionInterval,
    conformal_quantile,
    invert_score,
    score,
)

__all__ = [
    "INFINITE_INTERVAL",
    "HeadValues",
    "IntervalPredictor",
    "PredictionInterval",
    "binned_coverage",
    "conformal_quantile",
    "coverage",
    "fit_bootstrap",
    "fit_cross",
    "fit_predictor",
    "fit_split",
    "invert_score",
    "length_correlation",
    "mean_length",
    "score",
]
