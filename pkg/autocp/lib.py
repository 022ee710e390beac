from typing import List, Optional, Tuple

import numpy as np
from loguru import logger

from autocp.conformal.calibration import fit_predictor
from autocp.conformal.predictor import IntervalPredictor
from autocp.conformal.scores import PredictionInterval
from autocp.exceptions import SearchError
from autocp.models.pipeline import PipelineSpec
from autocp.models.response_models import EvaluationRecord
from autocp.models.schemas import BudgetConfig, SearchSpaceConfig
from autocp.search.optimizer import SearchResult, run_autocp
from autocp.utils.callbacks import SearchCallbacks
from autocp.utils.observers.search_summary_observer import SearchSummaryObserver


class AutoCP:
    """
    Fit-and-predict wrapper around the pipeline search.

    ``fit`` searches for the pipeline with the shortest cross-validated
    intervals at miscoverage ``alpha`` and calibrates it on all of the data;
    ``fit_pipeline`` skips the search for a given pipeline.
    """

    def __init__(
        self,
        alpha: float = 0.1,
        budget: Optional[BudgetConfig] = None,
        search: Optional[SearchSpaceConfig] = None,
        callbacks: Optional[SearchCallbacks] = None,
        jobs: int = 1,
        summary: bool = True,
    ):
        if not 0.0 < alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {alpha}")
        self.alpha = alpha
        self.budget = budget or BudgetConfig()
        self.search = search or SearchSpaceConfig()
        self.callbacks = callbacks or SearchCallbacks()
        self.jobs = jobs
        self.observer = SearchSummaryObserver() if summary else None
        if self.observer is not None:
            self.observer.attach(self.callbacks)
        self.result: Optional[SearchResult] = None
        self.predictor: Optional[IntervalPredictor] = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "AutoCP":
        self.result = run_autocp(
            X, y, self.alpha, self.budget, self.search, callbacks=self.callbacks, jobs=self.jobs
        )
        self.predictor = self.result.predictor
        return self

    def fit_pipeline(self, X: np.ndarray, y: np.ndarray, spec: PipelineSpec, seed: int = 0) -> "AutoCP":
        logger.info(f"Calibrating fixed pipeline {spec.label()} at alpha={self.alpha}")
        self.result = None
        self.predictor = fit_predictor(X, y, spec, self.alpha, seed)
        return self

    def _require_predictor(self) -> IntervalPredictor:
        if self.predictor is None:
            raise SearchError("AutoCP is not fitted; call fit or fit_pipeline first")
        return self.predictor

    @property
    def best_spec(self) -> PipelineSpec:
        return self._require_predictor().spec

    @property
    def history(self) -> List[EvaluationRecord]:
        return self.result.history if self.result is not None else []

    def predict_intervals(self, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Arrays (lower, upper, empty) for the rows of ``X``."""
        return self._require_predictor().predict_intervals(X)

    def predict_interval(self, x: np.ndarray) -> PredictionInterval:
        return self._require_predictor().predict_interval(x)

    def predict_mean(self, X: np.ndarray) -> np.ndarray:
        return self._require_predictor().predict_mean(X)
