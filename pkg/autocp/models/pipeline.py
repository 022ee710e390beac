"""
Pipeline domain types: model hyperparameters, estimator and calibration
choices, and the 4-tuple pipeline they form.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ModelId(str, Enum):
    """Enum defining all supported base learners"""

    RIDGE = "ridge"
    FOREST = "forest"
    MLP = "mlp"
    CONSTANT = "constant"


class EstimatorKind(str, Enum):
    """Nonconformity estimators; each one decides which heads get fitted"""

    MEAN_RESIDUAL = "mean_residual"
    LOCALLY_WEIGHTED = "locally_weighted"
    CQR = "cqr"


class CalibrationMethod(str, Enum):
    SPLIT = "split"
    KFOLD = "kfold"
    BOOTSTRAP = "bootstrap"


class RidgeParams(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model_id: Literal["ridge"] = "ridge"
    lam: float = Field(default=1.0, ge=1e-4, le=1e3, description="L2 penalty")


class ForestParams(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model_id: Literal["forest"] = "forest"
    n_trees: int = Field(default=100, ge=10, le=500, description="Number of trees")
    max_depth: int = Field(default=8, ge=2, le=20, description="Maximum tree depth")
    min_leaf: int = Field(default=5, ge=1, le=20, description="Minimum samples per leaf")
    feature_frac: float = Field(
        default=1.0, gt=0.0, le=1.0, description="Fraction of features tried per split"
    )


class MLPParams(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model_id: Literal["mlp"] = "mlp"
    hidden: int = Field(default=64, ge=8, le=128, description="Units per hidden layer")
    layers: int = Field(default=2, ge=1, le=3, description="Number of hidden layers")
    learning_rate: float = Field(default=1e-2, ge=1e-4, le=1e-1)
    epochs: int = Field(default=200, ge=50, le=500)
    weight_decay: float = Field(default=1e-4, ge=1e-6, le=1e-2)


class ConstantParams(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model_id: Literal["constant"] = "constant"


ModelHyperparams = Annotated[
    Union[RidgeParams, ForestParams, MLPParams, ConstantParams],
    Field(discriminator="model_id"),
]


class EstimatorChoice(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    kind: EstimatorKind = Field(
        default=EstimatorKind.MEAN_RESIDUAL, description="Nonconformity score family"
    )


class CalibrationChoice(BaseModel):
    model_config = ConfigDict(frozen=True, protected_namespaces=())

    method: CalibrationMethod = Field(default=CalibrationMethod.SPLIT)
    folds: Optional[int] = Field(default=None, ge=2, description="Folds for kfold")
    n_boot: Optional[int] = Field(default=None, ge=10, description="Resamples for bootstrap")

    @model_validator(mode="after")
    def _check_method_fields(self) -> "CalibrationChoice":
        if self.method == CalibrationMethod.KFOLD:
            if self.folds is None:
                raise ValueError("kfold calibration requires 'folds'")
            if self.n_boot is not None:
                raise ValueError("'n_boot' is only valid for bootstrap calibration")
        elif self.method == CalibrationMethod.BOOTSTRAP:
            if self.n_boot is None:
                raise ValueError("bootstrap calibration requires 'n_boot'")
            if self.folds is not None:
                raise ValueError("'folds' is only valid for kfold calibration")
        elif self.folds is not None or self.n_boot is not None:
            raise ValueError("split calibration takes neither 'folds' nor 'n_boot'")
        return self

    @property
    def size(self) -> Optional[int]:
        """The method's size parameter (folds or resamples), if any."""
        if self.method == CalibrationMethod.KFOLD:
            return self.folds
        if self.method == CalibrationMethod.BOOTSTRAP:
            return self.n_boot
        return None


class PipelineSpec(BaseModel):
    """A pipeline: model with hyperparameters, estimator and calibration method."""

    model_config = ConfigDict(frozen=True, protected_namespaces=())

    model: ModelHyperparams
    estimator: EstimatorChoice = Field(default_factory=EstimatorChoice)
    calibration: CalibrationChoice = Field(default_factory=CalibrationChoice)

    @property
    def model_id(self) -> ModelId:
        return ModelId(self.model.model_id)

    def label(self) -> str:
        """Short human-readable description used in logs and reports."""
        cal = self.calibration
        size = f"({cal.size})" if cal.size is not None else ""
        return f"{self.model.model_id}/{self.estimator.kind.value}/{cal.method.value}{size}"


@dataclass(frozen=True)
class ParamRange:
    """A searchable hyperparameter range with its unit-cube mapping."""

    name: str
    low: float
    high: float
    log: bool = False
    integer: bool = False

    def to_unit(self, value: float) -> float:
        if self.high == self.low:
            return 0.5
        if self.log:
            return (math.log(value) - math.log(self.low)) / (math.log(self.high) - math.log(self.low))
        return (value - self.low) / (self.high - self.low)

    def from_unit(self, unit: float):
        unit = min(max(float(unit), 0.0), 1.0)
        if self.log:
            value = math.exp(math.log(self.low) + unit * (math.log(self.high) - math.log(self.low)))
        else:
            value = self.low + unit * (self.high - self.low)
        value = min(max(value, self.low), self.high)
        return int(round(value)) if self.integer else value

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high

    def restrict(self, low: float, high: float) -> "ParamRange":
        return ParamRange(self.name, low, high, self.log, self.integer)


# authoritative search ranges; feature_frac's open lower end is sampled from 0.1
MODEL_RANGES: Dict[ModelId, List[ParamRange]] = {
    ModelId.RIDGE: [ParamRange("lam", 1e-4, 1e3, log=True)],
    ModelId.FOREST: [
        ParamRange("n_trees", 10, 500, integer=True),
        ParamRange("max_depth", 2, 20, integer=True),
        ParamRange("min_leaf", 1, 20, integer=True),
        ParamRange("feature_frac", 0.1, 1.0),
    ],
    ModelId.MLP: [
        ParamRange("hidden", 8, 128, integer=True),
        ParamRange("layers", 1, 3, integer=True),
        ParamRange("learning_rate", 1e-4, 1e-1, log=True),
        ParamRange("epochs", 50, 500, integer=True),
        ParamRange("weight_decay", 1e-6, 1e-2, log=True),
    ],
    ModelId.CONSTANT: [],
}

SIZE_RANGES: Dict[CalibrationMethod, ParamRange] = {
    CalibrationMethod.KFOLD: ParamRange("folds", 2, 10, integer=True),
    CalibrationMethod.BOOTSTRAP: ParamRange("n_boot", 10, 50, integer=True),
}

PARAM_CLASSES = {
    ModelId.RIDGE: RidgeParams,
    ModelId.FOREST: ForestParams,
    ModelId.MLP: MLPParams,
    ModelId.CONSTANT: ConstantParams,
}
