from .cate.combine import CateInterval, cate_pipeline, combine
from .conformal.calibration import fit_predictor
from .conformal.predictor import IntervalPredictor
from .conformal.scores import PredictionInterval
from .data.dataset import Dataset, load_csv, make_splits, normalize
from .lib import AutoCP
from .models.pipeline import (
    CalibrationChoice,
    CalibrationMethod,
    EstimatorChoice,
    EstimatorKind,
    ForestParams,
    MLPParams,
    ModelId,
    PipelineSpec,
    RidgeParams,
)
from .models.response_models import EvaluationRecord, RunReport
from .models.schemas import BudgetConfig, RunConfig, SearchSpaceConfig
from .search.optimizer import SearchResult, run_autocp
from .utils.callbacks import SearchCallbacks, SearchEvent

__all__ = [
    "AutoCP",
    "BudgetConfig",
    "CalibrationChoice",
    "CalibrationMethod",
    "CateInterval",
    "Dataset",
    "EstimatorChoice",
    "EstimatorKind",
    "EvaluationRecord",
    "ForestParams",
    "IntervalPredictor",
    "MLPParams",
    "ModelId",
    "PipelineSpec",
    "PredictionInterval",
    "RidgeParams",
    "RunConfig",
    "RunReport",
    "SearchCallbacks",
    "SearchEvent",
    "SearchResult",
    "SearchSpaceConfig",
    "cate_pipeline",
    "combine",
    "fit_predictor",
    "load_csv",
    "make_splits",
    "normalize",
    "run_autocp",
]
