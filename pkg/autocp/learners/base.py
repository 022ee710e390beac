from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any, FrozenSet, Optional, Tuple

import numpy as np

from autocp.models.pipeline import ModelId


class Head(str, Enum):
    """Prediction heads a fitted model can expose"""

    MEAN = "mean"
    MAD = "mad"
    QUANTILE = "quantile"


class BaseLearner(ABC):
    """
    A model family that can fit a point regressor and a conditional quantile pair.

    Subclasses hold hyperparameters only; fitted parameters are returned as
    opaque state objects so a learner can be reused for several heads.
    """

    model_id: ModelId

    def __init__(self, seed: int = 0):
        self.seed = int(seed)

    @abstractmethod
    def fit_regressor(self, X: np.ndarray, y: np.ndarray, stream: int = 0) -> Any:
        """Fit a squared-loss regressor; ``stream`` selects an independent seed stream."""

    @abstractmethod
    def predict_regressor(self, state: Any, X: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def fit_quantile_pair(self, X: np.ndarray, y: np.ndarray, levels: Tuple[float, float]) -> Any:
        """Fit conditional quantiles at ``levels = (lower, upper)``."""

    @abstractmethod
    def predict_quantile_pair(self, state: Any, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        pass

    def __repr__(self) -> str:
        return f"{type(self).__name__}(seed={self.seed})"


@dataclass(frozen=True)
class FittedModel:
    """Fitted heads of one learner; a head whose state is None is unavailable."""

    learner: BaseLearner
    n_features: int
    mean_state: Any = None
    mad_state: Any = None
    quantile_state: Any = None
    alpha: Optional[float] = None

    @property
    def model_id(self) -> ModelId:
        return self.learner.model_id

    @property
    def heads_available(self) -> FrozenSet[Head]:
        heads = set()
        if self.mean_state is not None:
            heads.add(Head.MEAN)
        if self.mad_state is not None:
            heads.add(Head.MAD)
        if self.quantile_state is not None:
            heads.add(Head.QUANTILE)
        return frozenset(heads)
