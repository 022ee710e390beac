"""
Estimator-specific head fitting: each nonconformity estimator decides which
heads of the base learner are trained and read out.
"""

from typing import Dict, FrozenSet

import numpy as np

from autocp.conformal.scores import HeadValues
from autocp.learners import FittedModel, Head, fit_mad, fit_mean, fit_quantiles, predict
from autocp.learners.heads import LearnerLike
from autocp.models.pipeline import EstimatorKind

REQUIRED_HEADS: Dict[EstimatorKind, FrozenSet[Head]] = {
    EstimatorKind.MEAN_RESIDUAL: frozenset({Head.MEAN}),
    EstimatorKind.LOCALLY_WEIGHTED: frozenset({Head.MEAN, Head.MAD}),
    EstimatorKind.CQR: frozenset({Head.QUANTILE}),
}


def fit_heads(
    kind: EstimatorKind, model: LearnerLike, X: np.ndarray, y: np.ndarray, alpha: float, seed: int = 0
) -> FittedModel:
    """Fit exactly the heads ``kind`` needs on (X, y)."""
    kind = EstimatorKind(kind)
    if kind == EstimatorKind.CQR:
        return fit_quantiles(model, X, y, alpha, seed)
    fitted = fit_mean(model, X, y, seed)
    if kind == EstimatorKind.LOCALLY_WEIGHTED:
        fitted = fit_mad(fitted, X, y)
    return fitted


def head_values(kind: EstimatorKind, model: FittedModel, X: np.ndarray) -> HeadValues:
    kind = EstimatorKind(kind)
    if kind == EstimatorKind.CQR:
        q_lo, q_hi = predict(model, Head.QUANTILE, X)
        return HeadValues(q_lo=q_lo, q_hi=q_hi)
    mean = predict(model, Head.MEAN, X)
    if kind == EstimatorKind.LOCALLY_WEIGHTED:
        return HeadValues(mean=mean, mad=predict(model, Head.MAD, X))
    return HeadValues(mean=mean)


def stack_head_values(values: list) -> HeadValues:
    """Stack per-model head values (each over m rows) into (m, n_models) arrays."""
    fields = {}
    for name in ("mean", "mad", "q_lo", "q_hi"):
        columns = [getattr(v, name) for v in values]
        fields[name] = None if columns[0] is None else np.column_stack(columns)
    return HeadValues(**fields)


def select_columns(values: HeadValues, columns: np.ndarray) -> HeadValues:
    """Pick one model column per calibration point: (m, n_models) -> (m, len(columns))."""
    return HeadValues(**{
        name: None if getattr(values, name) is None else getattr(values, name)[:, columns]
        for name in ("mean", "mad", "q_lo", "q_hi")
    })


def aggregate_columns(values: HeadValues, weights: np.ndarray) -> HeadValues:
    """Weighted model average per calibration point: (m, n_models) @ (n_models, n) -> (m, n)."""
    return HeadValues(**{
        name: None if getattr(values, name) is None else getattr(values, name) @ weights
        for name in ("mean", "mad", "q_lo", "q_hi")
    })
