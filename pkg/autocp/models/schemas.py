from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from autocp.models.pipeline import (
    MODEL_RANGES,
    SIZE_RANGES,
    CalibrationMethod,
    EstimatorKind,
    ModelId,
    PipelineSpec,
)

# authoritative bounds every configured range must lie inside
AUTHORITATIVE_RANGES: Dict[str, Dict[str, Tuple[float, float]]] = {
    model_id.value: {r.name: (r.low, r.high) for r in ranges}
    for model_id, ranges in MODEL_RANGES.items()
    if ranges
}


def _check_range(name: str, pair: Tuple[float, float], bounds: Tuple[float, float]) -> None:
    low, high = pair
    if low > high:
        raise ValueError(f"Range for '{name}' has low {low} > high {high}")
    if low < bounds[0] or high > bounds[1]:
        raise ValueError(f"Range for '{name}' must lie inside [{bounds[0]}, {bounds[1]}], got [{low}, {high}]")


class SearchSpaceConfig(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    models: List[ModelId] = Field(
        default=[ModelId.RIDGE, ModelId.FOREST, ModelId.MLP], description="Model families to search"
    )
    ridge: Dict[str, Tuple[float, float]] = Field(default_factory=dict, description="Ridge range overrides")
    forest: Dict[str, Tuple[float, float]] = Field(default_factory=dict, description="Forest range overrides")
    mlp: Dict[str, Tuple[float, float]] = Field(default_factory=dict, description="MLP range overrides")
    estimators: List[EstimatorKind] = Field(default=list(EstimatorKind), description="Estimators to search")
    calibrations: List[CalibrationMethod] = Field(
        default=list(CalibrationMethod), description="Calibration methods to search"
    )
    folds: Tuple[int, int] = Field(default=(2, 10), description="Range of K for kfold calibration")
    n_boot: Tuple[int, int] = Field(default=(10, 50), description="Range of resamples for bootstrap")

    @field_validator("models", "estimators", "calibrations")
    @classmethod
    def _non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("must name at least one choice")
        return list(dict.fromkeys(value))

    @model_validator(mode="after")
    def _check_ranges(self) -> "SearchSpaceConfig":
        for family, bounds in AUTHORITATIVE_RANGES.items():
            for name, pair in getattr(self, family).items():
                if name not in bounds:
                    raise ValueError(f"Unknown {family} hyperparameter '{name}'; known: {', '.join(bounds)}")
                _check_range(f"{family}.{name}", pair, bounds[name])
        for method, name in ((CalibrationMethod.KFOLD, "folds"), (CalibrationMethod.BOOTSTRAP, "n_boot")):
            size = SIZE_RANGES[method]
            _check_range(name, getattr(self, name), (size.low, size.high))
        return self


class BudgetConfig(BaseModel):
    n_init: int = Field(default=3, ge=2, description="Random pipelines per model before the loop")
    n_iter: int = Field(default=60, ge=0, description="Acquisitions after initialisation")
    j_folds: int = Field(default=3, ge=2, description="Outer folds of the length objective")
    cost_aware: bool = Field(default=False, description="Divide EI by predicted wall time")
    n_candidates: int = Field(default=1024, ge=1, description="Quasi-random candidates per model")
    n_local: int = Field(default=256, ge=0, description="Local perturbations of the incumbent")
    hyper_restarts: int = Field(default=5, ge=1, description="Starts of the GP hyperparameter fit")
    hyper_steps: int = Field(default=100, ge=1, description="L-BFGS-B iterations per start")
    seed: int = Field(default=0, description="Search seed")


class DataConfig(BaseModel):
    path: Optional[str] = Field(default=None, description="CSV file")
    target: Optional[str] = Field(default=None, description="Label column; defaults to the last column")
    treatment: Optional[str] = Field(default=None, description="Binary treatment column (cate)")
    y0: Optional[str] = Field(default=None, description="Counterfactual control outcome column")
    y1: Optional[str] = Field(default=None, description="Counterfactual treated outcome column")
    label_scaling: Literal["mean_abs", "std"] = Field(default="mean_abs")
    drop_columns: List[str] = Field(default_factory=list)
    synthetic: Optional[str] = Field(
        default=None, description="Built-in generator used when no path is given"
    )
    n_samples: int = Field(default=1000, ge=5, description="Rows drawn from the synthetic generator")


class RunConfig(BaseModel):
    name: str = Field(default="autocp", description="Run name used in reports")
    alpha: float = Field(default=0.1, gt=0.0, lt=1.0, description="Miscoverage rate")
    splits: int = Field(default=20, ge=1, description="Random train/test splits")
    train_frac: float = Field(default=0.8, gt=0.0, lt=1.0)
    seed: int = Field(default=0)
    jobs: int = Field(default=1, ge=1, description="Concurrent splits")
    preset: Optional[str] = Field(default=None, description="Named fixed pipeline; disables search")
    pipeline: Optional[PipelineSpec] = Field(default=None, description="Explicit fixed pipeline; disables search")
    search: SearchSpaceConfig = Field(default_factory=SearchSpaceConfig)
    budget: BudgetConfig = Field(default_factory=BudgetConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    out_dir: str = Field(default="runs")
    original_units: bool = Field(default=False, description="Report lengths in original label units")

    @model_validator(mode="after")
    def _single_fixed_pipeline(self) -> "RunConfig":
        if self.preset is not None and self.pipeline is not None:
            raise ValueError("Give either 'preset' or 'pipeline', not both")
        return self
