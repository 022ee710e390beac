from typing import Tuple

import numpy as np

from autocp.learners.base import BaseLearner
from autocp.models.pipeline import ModelId


class ConstantLearner(BaseLearner):
    """Ignores the features: predicts the training mean and empirical quantiles."""

    model_id = ModelId.CONSTANT

    def fit_regressor(self, X: np.ndarray, y: np.ndarray, stream: int = 0) -> float:
        return float(np.mean(y))

    def predict_regressor(self, state: float, X: np.ndarray) -> np.ndarray:
        return np.full(X.shape[0], state)

    def fit_quantile_pair(self, X: np.ndarray, y: np.ndarray, levels: Tuple[float, float]) -> Tuple[float, float]:
        lower, upper = np.quantile(y, levels, method="inverted_cdf")
        return float(lower), float(upper)

    def predict_quantile_pair(self, state: Tuple[float, float], X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return np.full(X.shape[0], state[0]), np.full(X.shape[0], state[1])
