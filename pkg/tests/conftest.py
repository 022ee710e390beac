from pathlib import Path
from typing import Tuple

import numpy as np
import pandas as pd
import pytest

from autocp.data.synthetic import make_gaussian, make_heteroscedastic
from autocp.learners.ridge import RidgeLearner
from autocp.models.pipeline import (
    CalibrationChoice,
    CalibrationMethod,
    ConstantParams,
    EstimatorChoice,
    EstimatorKind,
    PipelineSpec,
    RidgeParams,
)
from autocp.models.response_models import EvaluationRecord


class UnitScaleLearner(RidgeLearner):
    """Ridge mean head whose MAD head is identically 1."""

    def fit_regressor(self, X, y, stream=0):
        if stream == 1:
            return "unit"
        return super().fit_regressor(X, y, stream)

    def predict_regressor(self, state, X):
        if isinstance(state, str):
            return np.ones(X.shape[0])
        return super().predict_regressor(state, X)


class CollapsedQuantileLearner(RidgeLearner):
    """Quantile head whose lower and upper quantiles both equal the ridge mean."""

    def fit_quantile_pair(self, X, y, levels):
        return self.fit_regressor(X, y)

    def predict_quantile_pair(self, state, X):
        mean = self.predict_regressor(state, X)
        return mean, mean.copy()


def make_spec(
    model=None,
    estimator: EstimatorKind = EstimatorKind.MEAN_RESIDUAL,
    method: CalibrationMethod = CalibrationMethod.SPLIT,
    size: int = None,
) -> PipelineSpec:
    sizes = {}
    if method == CalibrationMethod.KFOLD:
        sizes["folds"] = size or 5
    elif method == CalibrationMethod.BOOTSTRAP:
        sizes["n_boot"] = size or 20
    return PipelineSpec(
        model=model or RidgeParams(lam=1.0),
        estimator=EstimatorChoice(kind=estimator),
        calibration=CalibrationChoice(method=method, **sizes),
    )


def stub_record(spec: PipelineSpec, value: float, flagged: bool = False) -> EvaluationRecord:
    return EvaluationRecord(spec=spec, mean_length=value, mean_coverage=0.9, flagged=flagged)


@pytest.fixture
def spec_factory():
    return make_spec


@pytest.fixture
def ridge_spec() -> PipelineSpec:
    return make_spec()


@pytest.fixture
def constant_spec() -> PipelineSpec:
    return make_spec(model=ConstantParams())


@pytest.fixture
def gaussian_xy() -> Tuple[np.ndarray, np.ndarray]:
    dataset = make_gaussian(400, d=3, seed=7)
    return np.asarray(dataset.features), np.asarray(dataset.labels)


@pytest.fixture
def hetero_data():
    dataset, sigma = make_heteroscedastic(1000, seed=11)
    return np.asarray(dataset.features), np.asarray(dataset.labels), sigma


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def write_csv(tmp_path: Path):
    """Write rows (a dict of columns or raw text) to a CSV file under tmp_path."""

    def _write(content, name: str = "data.csv") -> Path:
        path = tmp_path / name
        if isinstance(content, str):
            path.write_text(content, encoding="utf-8")
        else:
            pd.DataFrame(content).to_csv(path, index=False)
        return path

    return _write
