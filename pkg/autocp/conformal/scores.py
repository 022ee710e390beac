"""
Nonconformity scores, the finite-sample conformal quantile and score inversion.

Every function accepts scalars or numpy arrays; head values broadcast
against the labels or quantile they are combined with.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from autocp.models.pipeline import EstimatorChoice, EstimatorKind

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class PredictionInterval:
    lower: float
    upper: float
    empty: bool = False

    @property
    def infinite(self) -> bool:
        return math.isinf(self.lower) or math.isinf(self.upper)

    @property
    def length(self) -> float:
        if self.empty:
            return 0.0
        return self.upper - self.lower

    def contains(self, y: float) -> bool:
        return (not self.empty) and self.lower <= y <= self.upper


INFINITE_INTERVAL = PredictionInterval(-math.inf, math.inf)


@dataclass(frozen=True)
class HeadValues:
    """Head outputs at one or more inputs; unused heads stay None."""

    mean: Optional[ArrayLike] = None
    mad: Optional[ArrayLike] = None
    q_lo: Optional[ArrayLike] = None
    q_hi: Optional[ArrayLike] = None


def _kind(estimator: Union[EstimatorChoice, EstimatorKind, str]) -> EstimatorKind:
    if isinstance(estimator, EstimatorChoice):
        return estimator.kind
    return EstimatorKind(estimator)


def quantile_index(n_scores: int, alpha: float) -> int:
    """k = floor((n + 1) * alpha); the conformal quantile is the k-th largest score."""
    # tolerance keeps products like 100 * 0.1 on the right side of the floor
    return int(math.floor((n_scores + 1) * alpha + 1e-9))


def conformal_quantile(scores: np.ndarray, alpha: float) -> float:
    """
    The k-th largest calibration score, k = floor((n2 + 1) * alpha).

    The result does not depend on the order of ``scores``.

    Returns:
        The score value, or ``math.inf`` when k = 0 (the interval must be
        the whole real line)
    """
    scores = np.asarray(scores, dtype=float).ravel()
    if scores.size < 1:
        raise ValueError("conformal_quantile needs at least one score")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    k = quantile_index(scores.size, alpha)
    if k == 0:
        return math.inf
    k = min(k, scores.size)
    return float(np.sort(scores)[scores.size - k])


def score(estimator: Union[EstimatorChoice, EstimatorKind, str], heads: HeadValues, y: ArrayLike) -> ArrayLike:
    """Nonconformity of label ``y`` given head values at the same input."""
    kind = _kind(estimator)
    if kind == EstimatorKind.MEAN_RESIDUAL:
        return np.abs(heads.mean - y)
    if kind == EstimatorKind.LOCALLY_WEIGHTED:
        return np.abs(heads.mean - y) / heads.mad
    return np.maximum(heads.q_lo - y, y - heads.q_hi)


def score_bounds(
    estimator: Union[EstimatorChoice, EstimatorKind, str], heads: HeadValues, q: ArrayLike
) -> Tuple[ArrayLike, ArrayLike]:
    """Raw ``{y : score <= q}`` endpoints; lower may exceed upper for cqr with q < 0."""
    kind = _kind(estimator)
    if kind == EstimatorKind.MEAN_RESIDUAL:
        return heads.mean - q, heads.mean + q
    if kind == EstimatorKind.LOCALLY_WEIGHTED:
        return heads.mean - q * heads.mad, heads.mean + q * heads.mad
    return heads.q_lo - q, heads.q_hi + q


def resolve_crossings(lower: np.ndarray, upper: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collapse crossed endpoints to their midpoint and flag them empty."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    empty = lower > upper
    if np.any(empty):
        mid = 0.5 * (lower + upper)
        lower = np.where(empty, mid, lower)
        upper = np.where(empty, mid, upper)
    return lower, upper, empty


def invert_score(
    estimator: Union[EstimatorChoice, EstimatorKind, str], heads: HeadValues, q: float
) -> PredictionInterval:
    """Interval ``{y : score(y) <= q}`` at a single input."""
    if math.isinf(q):
        return INFINITE_INTERVAL
    lower, upper = score_bounds(estimator, heads, q)
    lower, upper, empty = resolve_crossings(lower, upper)
    return PredictionInterval(float(lower), float(upper), bool(empty))
