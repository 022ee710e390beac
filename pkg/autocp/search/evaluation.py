"""
The search objective: J-fold cross-validated mean interval length.
"""

import math
import time
from typing import Callable, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from loguru import logger
from sklearn.model_selection import KFold

from autocp.conformal.calibration import fit_predictor
from autocp.conformal.diagnostics import coverage, mean_length
from autocp.exceptions import CalibrationError
from autocp.learners import BaseLearner
from autocp.models.pipeline import PipelineSpec
from autocp.models.response_models import EvaluationRecord
from autocp.utils.seeding import derive_seed, sklearn_seed

Evaluator = Callable[..., EvaluationRecord]

PENALTY_FACTOR = 10.0

# a pipeline that hits one of these on some fold is flagged; anything else propagates
FIT_FAILURES = (CalibrationError, FloatingPointError, np.linalg.LinAlgError)


def length_penalty(y: np.ndarray) -> float:
    """Objective value of flagged evaluations: 10 x the label range."""
    spread = float(np.ptp(y))
    return PENALTY_FACTOR * (spread if spread > 0 else 1.0)


def outer_folds(n: int, j_folds: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    return list(KFold(n_splits=j_folds, shuffle=True, random_state=sklearn_seed(seed, 0)).split(np.arange(n)))


def fold_seed(seed: int, fold: int) -> int:
    return derive_seed(seed, fold + 1)


def _evaluate_fold(
    X: np.ndarray,
    y: np.ndarray,
    fit_idx: np.ndarray,
    val_idx: np.ndarray,
    spec: PipelineSpec,
    alpha: float,
    seed: int,
    learner: Optional[BaseLearner],
) -> Tuple[float, Optional[float], Optional[str]]:
    try:
        predictor = fit_predictor(X[fit_idx], y[fit_idx], spec, alpha, seed, learner)
        lower, upper, empty = predictor.predict_intervals(X[val_idx])
    except FIT_FAILURES as e:
        return math.inf, None, f"{type(e).__name__}: {e}"
    fold_coverage = coverage(y[val_idx], lower, upper, empty)
    if predictor.degenerate:
        return math.inf, fold_coverage, f"degenerate quantile index with {predictor.scores.size} scores at alpha={alpha}"
    return mean_length(lower, upper, empty), fold_coverage, None


def evaluate_pipeline(
    X: np.ndarray,
    y: np.ndarray,
    spec: PipelineSpec,
    alpha: float,
    j_folds: int = 3,
    seed: int = 0,
    jobs: int = 1,
    learner: Optional[BaseLearner] = None,
) -> EvaluationRecord:
    """
    Score a pipeline by its J-fold cross-validated mean interval length.

    Each outer fold calibrates the pipeline on the remaining folds and
    averages interval lengths (and coverage) over the held-out fold.
    Failed or infinite folds flag the record and replace its length by
    ``length_penalty(y)``.

    Args:
        X: Training features
        y: Training labels
        spec: Pipeline to evaluate
        alpha: Miscoverage rate
        j_folds: Number of outer folds
        seed: Seed for the outer folds and every calibration inside them
        jobs: Folds evaluated concurrently
        learner: Optional learner used instead of building one from ``spec.model``
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    start = time.perf_counter()

    if X.shape[0] < j_folds:
        folds_out = [(math.inf, None, f"{X.shape[0]} rows cannot form {j_folds} folds")]
    else:
        folds_out = Parallel(n_jobs=jobs)(
            delayed(_evaluate_fold)(X, y, fit_idx, val_idx, spec, alpha, fold_seed(seed, j), learner)
            for j, (fit_idx, val_idx) in enumerate(outer_folds(X.shape[0], j_folds, seed))
        )
    wall_seconds = round(time.perf_counter() - start, 3)

    fold_lengths = [length for length, _, _ in folds_out]
    coverages = [c for _, c, _ in folds_out if c is not None]
    reasons = [r for _, _, r in folds_out if r is not None]
    mean_coverage = float(np.mean(coverages)) if coverages else 0.0

    if reasons or not all(np.isfinite(fold_lengths)):
        reason = "; ".join(dict.fromkeys(reasons)) or "infinite interval length"
        logger.warning(f"Evaluation of {spec.label()} flagged: {reason}")
        return EvaluationRecord(
            spec=spec,
            mean_length=length_penalty(y),
            mean_coverage=mean_coverage,
            wall_seconds=wall_seconds,
            fold_lengths=[v if math.isfinite(v) else None for v in fold_lengths],
            flagged=True,
            reason=reason,
        )

    record = EvaluationRecord(
        spec=spec,
        mean_length=float(np.mean(fold_lengths)),
        mean_coverage=mean_coverage,
        wall_seconds=wall_seconds,
        fold_lengths=fold_lengths,
    )
    logger.debug(f"Evaluated {spec.label()}: length {record.mean_length:.4f}, coverage {record.mean_coverage:.3f}")
    return record
