"""
Ridge regression with a pinball-loss linear quantile head.
"""

from typing import Tuple

import numpy as np
from sklearn.linear_model import QuantileRegressor, Ridge

from autocp.learners.base import BaseLearner
from autocp.models.pipeline import ModelId


class RidgeLearner(BaseLearner):
    model_id = ModelId.RIDGE

    def __init__(self, lam: float = 1.0, seed: int = 0):
        super().__init__(seed)
        if not lam > 0:
            raise ValueError(f"Ridge penalty must be positive, got {lam}")
        self.lam = float(lam)

    def fit_regressor(self, X: np.ndarray, y: np.ndarray, stream: int = 0) -> Ridge:
        # cholesky solves the penalised normal equations on centred data
        return Ridge(alpha=self.lam, fit_intercept=True, solver="cholesky").fit(X, y)

    def predict_regressor(self, state: Ridge, X: np.ndarray) -> np.ndarray:
        return state.predict(X)

    def fit_quantile_pair(
        self, X: np.ndarray, y: np.ndarray, levels: Tuple[float, float]
    ) -> Tuple[QuantileRegressor, QuantileRegressor]:
        # sklearn averages the pinball loss, so the penalty is rescaled by n
        penalty = self.lam / X.shape[0]
        return tuple(
            QuantileRegressor(quantile=level, alpha=penalty, fit_intercept=True, solver="highs").fit(X, y)
            for level in levels
        )

    def predict_quantile_pair(self, state, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        lower, upper = state
        return lower.predict(X), upper.predict(X)

    def __repr__(self) -> str:
        return f"RidgeLearner(lam={self.lam:g})"
