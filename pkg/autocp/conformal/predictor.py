from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from autocp.conformal.estimators import (
    aggregate_columns,
    head_values,
    select_columns,
    stack_head_values,
)
from autocp.conformal.scores import (
    INFINITE_INTERVAL,
    PredictionInterval,
    conformal_quantile,
    quantile_index,
    resolve_crossings,
    score_bounds,
)
from autocp.learners import FittedModel, Head, predict
from autocp.models.pipeline import CalibrationMethod, PipelineSpec


def _frozen(array: Optional[np.ndarray], dtype=float) -> Optional[np.ndarray]:
    if array is None:
        return None
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class IntervalPredictor:
    """
    A calibrated pipeline.

    ``scores`` holds the calibration scores in ascending order. For kfold
    calibration ``model_index[i]`` is the fold model that scored point i;
    for bootstrap ``oob_weights[:, i]`` averages the models whose resample
    left point i out. Split calibration uses a single model and neither.
    """

    spec: PipelineSpec
    alpha: float
    models: Tuple[FittedModel, ...]
    scores: np.ndarray
    model_index: Optional[np.ndarray] = None
    oob_weights: Optional[np.ndarray] = None
    n_dropped: int = 0

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=float)
        if np.any(np.diff(scores) < 0):
            raise ValueError("IntervalPredictor scores must be sorted ascending")
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "scores", _frozen(scores))
        object.__setattr__(self, "model_index", _frozen(self.model_index, dtype=int))
        object.__setattr__(self, "oob_weights", _frozen(self.oob_weights))

    @property
    def method(self) -> CalibrationMethod:
        return self.spec.calibration.method

    @property
    def n_features(self) -> int:
        return self.models[0].n_features

    @property
    def quantile_index(self) -> int:
        return quantile_index(self.scores.size, self.alpha)

    @property
    def degenerate(self) -> bool:
        """True when too few calibration scores exist for alpha; intervals are infinite."""
        return self.quantile_index == 0

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"Predictor was trained on {self.n_features} features, got input of shape {X.shape}")
        return X

    def predict_intervals(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Intervals for every row of ``X``.

        Returns:
            ``(lower, upper, empty)``; empty rows have lower == upper at the
            crossing midpoint and count as length 0
        """
        X = self._check_input(X)
        m = X.shape[0]
        kind = self.spec.estimator.kind
        if self.degenerate:
            return np.full(m, -np.inf), np.full(m, np.inf), np.zeros(m, dtype=bool)

        if self.method == CalibrationMethod.SPLIT:
            q = conformal_quantile(self.scores, self.alpha)
            lower, upper = score_bounds(kind, head_values(kind, self.models[0], X), q)
            return resolve_crossings(lower, upper)

        stacked = stack_head_values([head_values(kind, model, X) for model in self.models])
        if self.method == CalibrationMethod.KFOLD:
            per_point = select_columns(stacked, self.model_index)
        else:
            per_point = aggregate_columns(stacked, self.oob_weights)

        lowers, uppers = score_bounds(kind, per_point, self.scores[None, :])
        k = self.quantile_index
        lower = np.partition(lowers, k - 1, axis=1)[:, k - 1]
        upper = -np.partition(-uppers, k - 1, axis=1)[:, k - 1]
        return resolve_crossings(lower, upper)

    def predict_interval(self, x: np.ndarray) -> PredictionInterval:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ValueError(f"predict_interval takes one feature vector, got shape {x.shape}")
        if self.degenerate:
            self._check_input(x)
            return INFINITE_INTERVAL
        lower, upper, empty = self.predict_intervals(x[None, :])
        return PredictionInterval(float(lower[0]), float(upper[0]), bool(empty[0]))

    def predict_mean(self, X: np.ndarray) -> np.ndarray:
        """Point prediction: the averaged mean head, else the averaged quantile midpoint."""
        X = self._check_input(X)
        if Head.MEAN in self.models[0].heads_available:
            return np.mean([predict(model, Head.MEAN, X) for model in self.models], axis=0)
        midpoints = [0.5 * (lo + hi) for lo, hi in (predict(model, Head.QUANTILE, X) for model in self.models)]
        return np.mean(midpoints, axis=0)
