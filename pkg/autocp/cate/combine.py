"""
Treatment-effect intervals from per-arm response intervals.

Each arm gets its own conformal predictor for the response Y(t). At a test
point with response intervals [a0, b0] and [a1, b1], the effect
Y(1) - Y(0) lies in [a1 - b0, b1 - a0] whenever both responses are covered,
so miscoverage is at most alpha0 + alpha1.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from loguru import logger

from autocp.conformal.calibration import fit_predictor
from autocp.conformal.diagnostics import coverage, interval_lengths
from autocp.conformal.predictor import IntervalPredictor
from autocp.conformal.scores import PredictionInterval
from autocp.data.dataset import Dataset, make_splits, normalize
from autocp.exceptions import CateError
from autocp.models.pipeline import PipelineSpec
from autocp.models.response_models import CateReport
from autocp.models.schemas import RunConfig
from autocp.search.optimizer import run_autocp
from autocp.utils.seeding import derive_seed

MIN_ARM_ROWS = 40

Alphas = Tuple[Optional[float], Optional[float]]


@dataclass(frozen=True)
class CateInterval:
    lower: float
    upper: float
    component_alphas: Alphas = (None, None)
    empty: bool = False

    @property
    def infinite(self) -> bool:
        return math.isinf(self.lower) or math.isinf(self.upper)

    @property
    def length(self) -> float:
        if self.empty:
            return 0.0
        return self.upper - self.lower

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def contains(self, effect: float) -> bool:
        return (not self.empty) and self.lower <= effect <= self.upper


def combine(interval0: PredictionInterval, interval1: PredictionInterval, alphas: Alphas = (None, None)) -> CateInterval:
    """
    [a1 - b0, b1 - a0] for control interval [a0, b0] and treated interval [a1, b1].

    An empty component makes the result empty; infinite endpoints carry
    through the arithmetic.
    """
    empty = interval0.empty or interval1.empty
    return CateInterval(
        lower=interval1.lower - interval0.upper,
        upper=interval1.upper - interval0.lower,
        component_alphas=alphas,
        empty=empty,
    )


def combine_bounds(
    lower0: np.ndarray,
    upper0: np.ndarray,
    lower1: np.ndarray,
    upper1: np.ndarray,
    empty0: Optional[np.ndarray] = None,
    empty1: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised ``combine`` over arrays of component endpoints."""
    lower = np.asarray(lower1, dtype=float) - np.asarray(upper0, dtype=float)
    upper = np.asarray(upper1, dtype=float) - np.asarray(lower0, dtype=float)
    empty = np.zeros(lower.shape, dtype=bool)
    for flags in (empty0, empty1):
        if flags is not None:
            empty |= np.asarray(flags, dtype=bool)
    return lower, upper, empty


@dataclass
class CateResult:
    intervals: List[CateInterval]
    report: CateReport
    predictors: Tuple[IntervalPredictor, IntervalPredictor]


def _treatment_arms(values: pd.Series, column: str) -> np.ndarray:
    parsed = pd.to_numeric(values, errors="coerce")
    if parsed.isna().any():
        raise CateError(f"Treatment column '{column}' has missing or non-numeric values")
    unknown = sorted(set(parsed.unique()) - {0, 1})
    if unknown:
        raise CateError(f"Treatment column '{column}' must be binary (0/1); found values {unknown}")
    return parsed.to_numpy(dtype=int)


def _fit_arm(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float,
    config: RunConfig,
    pipeline: Optional[PipelineSpec],
    seed: int,
) -> IntervalPredictor:
    if pipeline is not None:
        return fit_predictor(X, y, pipeline, alpha, seed)
    budget = config.budget.model_copy(update={"seed": seed})
    return run_autocp(X, y, alpha, budget, config.search).predictor


def _complete_rows(frame: pd.DataFrame, feature_cols: List[str], required: List[str]) -> pd.DataFrame:
    """Rows with every feature present; a missing treatment or outcome is an error."""
    for column in required:
        missing = frame[column].isna().to_numpy()
        if missing.any():
            row = int(np.flatnonzero(missing)[0])
            raise CateError(f"Missing value in column '{column}' at row {row + 1}")

    complete = ~frame[feature_cols].isna().any(axis=1).to_numpy()
    n_dropped = int((~complete).sum())
    if n_dropped:
        logger.warning(f"Dropped {n_dropped} rows with missing feature values")
    return frame.loc[complete].reset_index(drop=True)


def cate_pipeline(
    frame: pd.DataFrame,
    alpha_total: float,
    config: RunConfig,
    treatment: str = "t",
    target: str = "y",
    y0: Optional[str] = None,
    y1: Optional[str] = None,
    pipeline: Optional[PipelineSpec] = None,
) -> CateResult:
    """
    Per-arm conformal intervals combined into effect intervals on held-out rows.

    One random train/test split (``config.train_frac``, ``config.seed``) is
    drawn over all rows. Features and labels are normalised on the training
    rows of both arms together so the two response scales agree. Each arm
    is fitted at ``alpha_total / 2``: by searching (``config.budget`` and
    ``config.search``) or with the fixed ``pipeline``.
    Rows with a missing feature value are dropped before the split.

    Args:
        frame: Data with feature columns, the treatment and the observed outcome
        alpha_total: Miscoverage budget for the effect interval
        config: Run configuration
        treatment: Binary treatment column
        target: Observed outcome column
        y0: Optional counterfactual control outcome column, scored when present with ``y1``
        y1: Optional counterfactual treated outcome column

    Raises:
        CateError: If the treatment is not binary, a column is missing, the
            treatment or outcome has a missing value, or an arm has fewer than
            40 training rows
    """
    if not 0.0 < alpha_total < 1.0:
        raise CateError(f"alpha_total must be in (0, 1), got {alpha_total}")
    for column in [treatment, target, y0, y1]:
        if column is not None and column not in frame.columns:
            raise CateError(f"Column '{column}' not found; columns: {', '.join(frame.columns)}")

    feature_cols = [c for c in frame.columns if c not in {treatment, target, y0, y1, *config.data.drop_columns}]
    frame = _complete_rows(frame, feature_cols, [treatment, target])
    arms = _treatment_arms(frame[treatment], treatment)
    dataset = Dataset.from_arrays(
        frame[feature_cols].to_numpy(dtype=float),
        frame[target].to_numpy(dtype=float),
        feature_names=feature_cols,
        name=config.name,
    )
    plan = make_splits(dataset.n, 1, config.train_frac, config.seed)[0]
    dataset = normalize(dataset, plan.train_indices, config.data.label_scaling)

    alphas = (alpha_total / 2, alpha_total / 2)
    train_arms = []
    for arm in (0, 1):
        rows = plan.train_indices[arms[plan.train_indices] == arm]
        if rows.size < MIN_ARM_ROWS:
            raise CateError(f"Arm t={arm} has {rows.size} training rows; at least {MIN_ARM_ROWS} are required")
        train_arms.append(rows)

    logger.info(
        f"Fitting per-arm predictors at alpha={alphas[0]:.4g} on {train_arms[0].size} control "
        f"and {train_arms[1].size} treated rows"
    )
    predictors = Parallel(n_jobs=min(config.jobs, 2))(
        delayed(_fit_arm)(
            dataset.features[rows], dataset.labels[rows], alphas[arm], config, pipeline, derive_seed(config.seed, arm)
        )
        for arm, rows in enumerate(train_arms)
    )

    test = plan.test_indices
    X_test = dataset.features[test]
    lower0, upper0, empty0 = predictors[0].predict_intervals(X_test)
    lower1, upper1, empty1 = predictors[1].predict_intervals(X_test)
    lower, upper, empty = combine_bounds(lower0, upper0, lower1, upper1, empty0, empty1)

    test_arms = arms[test]
    y_test = dataset.labels[test]
    arm_coverage = []
    for arm, (lo, hi, em) in enumerate([(lower0, upper0, empty0), (lower1, upper1, empty1)]):
        mask = test_arms == arm
        arm_coverage.append(coverage(y_test[mask], lo[mask], hi[mask], em[mask]) if mask.any() else float("nan"))

    cate_coverage = None
    if y0 is not None and y1 is not None:
        # the label shift cancels in the difference
        effect = (frame[y1].to_numpy(dtype=float) - frame[y0].to_numpy(dtype=float))[test] / dataset.label_scale
        cate_coverage = coverage(effect, lower, upper, empty)

    lengths = interval_lengths(lower, upper, empty)
    centers = 0.5 * (lower + upper)
    if config.original_units:
        lengths = dataset.to_original_units(lengths)
        centers = dataset.to_original_units(centers)
    report = CateReport(
        dataset=config.name,
        alpha_total=alpha_total,
        component_alphas=alphas,
        union_bound=1 - alphas[0] - alphas[1],
        product_bound=(1 - alphas[0]) * (1 - alphas[1]),
        arm_coverage=(arm_coverage[0], arm_coverage[1]),
        cate_coverage=cate_coverage,
        mean_length=float(np.mean(lengths)),
        mean_center=float(np.mean(centers)),
        n_test=int(test.size),
        specs=(predictors[0].spec, predictors[1].spec),
    )
    intervals = [
        CateInterval(float(lo), float(hi), alphas, bool(em)) for lo, hi, em in zip(lower, upper, empty)
    ]
    logger.info(
        f"Effect intervals: mean length {report.mean_length:.4f}, arm coverage "
        f"{arm_coverage[0]:.3f}/{arm_coverage[1]:.3f}"
        + (f", effect coverage {cate_coverage:.3f}" if cate_coverage is not None else "")
    )
    return CateResult(intervals=intervals, report=report, predictors=(predictors[0], predictors[1]))
