"""
Fixed-width numeric encoding of pipelines for the GP surrogate.

Layout of ``PipelineEncoding.vector``::

    [model block (d_m) | estimator one-hot (3) | method one-hot (3) | size (1)]

Continuous hyperparameters are min-max scaled to [0, 1], after a log
transform where the range is log-uniform. The size coordinate is folds for
kfold, n_boot for bootstrap and 0 for split.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from autocp.models.pipeline import (
    MODEL_RANGES,
    PARAM_CLASSES,
    SIZE_RANGES,
    CalibrationChoice,
    CalibrationMethod,
    EstimatorChoice,
    EstimatorKind,
    ModelId,
    PipelineSpec,
)

ESTIMATORS: Tuple[EstimatorKind, ...] = tuple(EstimatorKind)
METHODS: Tuple[CalibrationMethod, ...] = tuple(CalibrationMethod)


def model_dims(model_id: ModelId) -> int:
    return len(MODEL_RANGES[ModelId(model_id)])


@dataclass(frozen=True)
class PipelineEncoding:
    model_id: ModelId
    model_block: np.ndarray
    estimator_block: np.ndarray
    calibration_block: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.model_block, self.estimator_block, self.calibration_block])

    @classmethod
    def from_vector(cls, model_id: ModelId, vector: np.ndarray) -> "PipelineEncoding":
        d = model_dims(model_id)
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (d + 7,):
            raise ValueError(f"{model_id.value} encodings have {d + 7} entries, got shape {vector.shape}")
        return cls(ModelId(model_id), vector[:d], vector[d : d + 3], vector[d + 3 :])


def encode(spec: PipelineSpec) -> PipelineEncoding:
    model_id = spec.model_id
    model_block = np.array(
        [r.to_unit(getattr(spec.model, r.name)) for r in MODEL_RANGES[model_id]], dtype=float
    )
    estimator_block = np.zeros(3)
    estimator_block[ESTIMATORS.index(spec.estimator.kind)] = 1.0

    calibration_block = np.zeros(4)
    method = spec.calibration.method
    calibration_block[METHODS.index(method)] = 1.0
    if method in SIZE_RANGES:
        calibration_block[3] = SIZE_RANGES[method].to_unit(spec.calibration.size)
    return PipelineEncoding(model_id, model_block, estimator_block, calibration_block)


def decode(encoding: PipelineEncoding) -> PipelineSpec:
    """Map an encoding back to a spec; categoricals decode by argmax, integers by rounding."""
    model_id = ModelId(encoding.model_id)
    values = {r.name: r.from_unit(u) for r, u in zip(MODEL_RANGES[model_id], encoding.model_block)}
    model = PARAM_CLASSES[model_id](**values)

    estimator = EstimatorChoice(kind=ESTIMATORS[int(np.argmax(encoding.estimator_block))])
    method = METHODS[int(np.argmax(encoding.calibration_block[:3]))]
    if method == CalibrationMethod.KFOLD:
        calibration = CalibrationChoice(method=method, folds=SIZE_RANGES[method].from_unit(encoding.calibration_block[3]))
    elif method == CalibrationMethod.BOOTSTRAP:
        calibration = CalibrationChoice(method=method, n_boot=SIZE_RANGES[method].from_unit(encoding.calibration_block[3]))
    else:
        calibration = CalibrationChoice(method=method)
    return PipelineSpec(model=model, estimator=estimator, calibration=calibration)
