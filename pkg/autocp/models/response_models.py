import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from autocp.models.pipeline import PipelineSpec

SCHEMA_VERSION = 1


class EvaluationRecord(BaseModel):
    """One evaluation of a pipeline on the cross-validated length objective."""

    model_config = ConfigDict(protected_namespaces=())

    spec: PipelineSpec
    mean_length: float = Field(..., description="Mean of fold mean lengths, or the penalty when flagged")
    mean_coverage: float = Field(..., ge=0.0, le=1.0, description="Mean validation coverage")
    wall_seconds: float = Field(default=0.0, ge=0.0)
    fold_lengths: List[Optional[float]] = Field(default_factory=list)
    flagged: bool = Field(default=False, description="Infinite or failed evaluation replaced by the penalty")
    reason: Optional[str] = Field(default=None)


class Aggregate(BaseModel):
    mean_coverage: float
    std_coverage: float
    mean_length: float
    std_length: float


class SplitRecord(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    split_index: int
    split_seed: int
    n_train: int = Field(default=0, ge=0)
    n_test: int = Field(default=0, ge=0)
    coverage: float = Field(..., ge=0.0, le=1.0)
    mean_length: float
    spec: PipelineSpec
    wall_seconds: float = Field(default=0.0, ge=0.0)
    n_evaluations: int = Field(default=0, description="Pipelines evaluated by the search (0 for fixed)")


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    array = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(array)):
        # spread is unbounded once any split has infinite intervals
        return float(np.mean(array)), math.inf
    std = float(np.std(array, ddof=1)) if array.size > 1 else 0.0
    return float(np.mean(array)), std


class RunReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    name: str
    dataset: str
    algorithm: str
    alpha: float
    length_units: str = "normalized"
    splits: List[SplitRecord]
    aggregate: Aggregate

    @staticmethod
    def aggregate_splits(splits: Sequence[SplitRecord]) -> Aggregate:
        mean_cov, std_cov = _mean_std([s.coverage for s in splits])
        mean_len, std_len = _mean_std([s.mean_length for s in splits])
        return Aggregate(mean_coverage=mean_cov, std_coverage=std_cov, mean_length=mean_len, std_length=std_len)

    @classmethod
    def from_splits(
        cls, name: str, dataset: str, algorithm: str, alpha: float, splits: Sequence[SplitRecord], **kwargs
    ) -> "RunReport":
        splits = sorted(splits, key=lambda s: s.split_index)
        return cls(
            name=name,
            dataset=dataset,
            algorithm=algorithm,
            alpha=alpha,
            splits=splits,
            aggregate=cls.aggregate_splits(splits),
            **kwargs,
        )


class CateReport(BaseModel):
    schema_version: int = SCHEMA_VERSION
    dataset: str
    alpha_total: float
    component_alphas: Tuple[float, float]
    union_bound: float = Field(..., description="1 - alpha0 - alpha1")
    product_bound: float = Field(..., description="(1 - alpha0)(1 - alpha1)")
    arm_coverage: Tuple[float, float] = Field(..., description="Response coverage on observed outcomes per arm")
    cate_coverage: Optional[float] = Field(default=None, description="Needs counterfactual columns")
    mean_length: float
    mean_center: float
    n_test: int
    specs: Tuple[PipelineSpec, PipelineSpec]
