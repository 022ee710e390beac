"""
Calibration schemes: split conformal, K-fold cross-conformal (CV+) and
out-of-bag bootstrap (jackknife+-after-bootstrap).
"""

import math
from typing import Optional, Tuple

import numpy as np
from loguru import logger
from sklearn.model_selection import KFold

from autocp.conformal.estimators import fit_heads, head_values, stack_head_values
from autocp.conformal.predictor import IntervalPredictor
from autocp.conformal.scores import HeadValues, score
from autocp.exceptions import CalibrationError
from autocp.learners import BaseLearner
from autocp.models.pipeline import CalibrationMethod, PipelineSpec
from autocp.utils.seeding import derive_seed, make_rng, sklearn_seed

MIN_OOB_POINTS = 10


def _training_arrays(X: np.ndarray, y: np.ndarray):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise CalibrationError(f"Features of shape {X.shape} do not match {y.shape[0]} labels")
    return X, y


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise CalibrationError(f"alpha must be in (0, 1), got {alpha}")


def split_halves(n: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded fit/calibration partition of ``0..n-1``; the fit half gets the extra point."""
    perm = make_rng(seed, 0).permutation(n)
    n_fit = math.ceil(n / 2)
    return perm[:n_fit], perm[n_fit:]


def fit_split(
    X: np.ndarray,
    y: np.ndarray,
    spec: PipelineSpec,
    alpha: float,
    seed: int = 0,
    learner: Optional[BaseLearner] = None,
) -> IntervalPredictor:
    """
    Split conformal: fit heads on a seeded half, score the other half.

    The first half gets the extra point when the count is odd.

    Args:
        X: Training features
        y: Training labels
        spec: Pipeline to calibrate
        alpha: Miscoverage rate
        seed: Seed for the partition and the learner
        learner: Optional learner used instead of building one from ``spec.model``
    """
    X, y = _training_arrays(X, y)
    _check_alpha(alpha)
    n = X.shape[0]
    if n < 4:
        raise CalibrationError(f"Split calibration needs at least 4 training rows, got {n}")

    fit_idx, cal_idx = split_halves(n, seed)
    kind = spec.estimator.kind
    model = fit_heads(kind, learner or spec.model, X[fit_idx], y[fit_idx], alpha, derive_seed(seed, 1))
    scores = score(kind, head_values(kind, model, X[cal_idx]), y[cal_idx])
    logger.debug(f"Split calibration of {spec.label()}: {fit_idx.size} fit rows, {cal_idx.size} calibration rows")
    return IntervalPredictor(spec=spec, alpha=alpha, models=(model,), scores=np.sort(scores))


def fit_cross(
    X: np.ndarray,
    y: np.ndarray,
    spec: PipelineSpec,
    alpha: float,
    seed: int = 0,
    learner: Optional[BaseLearner] = None,
) -> IntervalPredictor:
    """
    K-fold cross-conformal (CV+) calibration.

    Every training point is scored by the fold model that did not see it.
    ``folds`` equal to the number of rows gives leave-one-out.
    """
    X, y = _training_arrays(X, y)
    _check_alpha(alpha)
    n = X.shape[0]
    folds = spec.calibration.folds
    if folds is None or folds < 2:
        raise CalibrationError(f"kfold calibration needs folds >= 2, got {folds}")
    if folds > n or n - math.ceil(n / folds) < 2:
        raise CalibrationError(f"{folds}-fold calibration needs more than {n} training rows")

    kind = spec.estimator.kind
    splitter = KFold(n_splits=folds, shuffle=True, random_state=sklearn_seed(seed))
    models = []
    scores = np.empty(n)
    model_index = np.empty(n, dtype=int)
    for j, (fit_idx, held_idx) in enumerate(splitter.split(X)):
        model = fit_heads(kind, learner or spec.model, X[fit_idx], y[fit_idx], alpha, derive_seed(seed, j + 1))
        scores[held_idx] = score(kind, head_values(kind, model, X[held_idx]), y[held_idx])
        model_index[held_idx] = j
        models.append(model)

    order = np.argsort(scores, kind="stable")
    logger.debug(f"Cross-conformal calibration of {spec.label()}: {folds} folds over {n} rows")
    return IntervalPredictor(
        spec=spec,
        alpha=alpha,
        models=tuple(models),
        scores=scores[order],
        model_index=model_index[order],
    )


def _aggregate_at_rows(values: HeadValues, weights: np.ndarray) -> HeadValues:
    # values hold (n, n_models) head outputs at the training rows; weights are (n_models, n)
    return HeadValues(**{
        name: None if getattr(values, name) is None else np.einsum("ib,bi->i", getattr(values, name), weights)
        for name in ("mean", "mad", "q_lo", "q_hi")
    })


def fit_bootstrap(
    X: np.ndarray,
    y: np.ndarray,
    spec: PipelineSpec,
    alpha: float,
    seed: int = 0,
    learner: Optional[BaseLearner] = None,
) -> IntervalPredictor:
    """
    Bootstrap calibration with out-of-bag aggregated heads.

    Each point is scored by the average of the models whose resample left it
    out; points left out by no resample are dropped from calibration.

    Raises:
        CalibrationError: If fewer than 10 points receive an out-of-bag score
    """
    X, y = _training_arrays(X, y)
    _check_alpha(alpha)
    n = X.shape[0]
    n_boot = spec.calibration.n_boot
    if n_boot is None or n_boot < 10:
        raise CalibrationError(f"bootstrap calibration needs n_boot >= 10, got {n_boot}")
    if n < 2:
        raise CalibrationError(f"Bootstrap calibration needs at least 2 training rows, got {n}")

    kind = spec.estimator.kind
    rng = make_rng(seed, 0)
    in_bag = np.zeros((n_boot, n), dtype=bool)
    models = []
    for b in range(n_boot):
        sample = rng.integers(0, n, size=n)
        in_bag[b, sample] = True
        models.append(fit_heads(kind, learner or spec.model, X[sample], y[sample], alpha, derive_seed(seed, b + 1)))

    out_of_bag = ~in_bag
    counts = out_of_bag.sum(axis=0)
    kept = np.flatnonzero(counts > 0)
    n_dropped = n - kept.size
    if n_dropped:
        logger.warning(f"Bootstrap calibration dropped {n_dropped} of {n} points that were in every resample")
    if kept.size < MIN_OOB_POINTS:
        logger.error(f"Only {kept.size} out-of-bag scored points with n_boot={n_boot}")
        raise CalibrationError(
            f"Only {kept.size} points received an out-of-bag score (need {MIN_OOB_POINTS}); increase n_boot"
        )

    weights = out_of_bag[:, kept] / counts[kept]
    stacked = stack_head_values([head_values(kind, model, X[kept]) for model in models])
    scores = score(kind, _aggregate_at_rows(stacked, weights), y[kept])

    order = np.argsort(scores, kind="stable")
    logger.debug(f"Bootstrap calibration of {spec.label()}: {n_boot} resamples, {kept.size} scored points")
    return IntervalPredictor(
        spec=spec,
        alpha=alpha,
        models=tuple(models),
        scores=scores[order],
        oob_weights=weights[:, order],
        n_dropped=n_dropped,
    )


def fit_predictor(
    X: np.ndarray,
    y: np.ndarray,
    spec: PipelineSpec,
    alpha: float,
    seed: int = 0,
    learner: Optional[BaseLearner] = None,
) -> IntervalPredictor:
    """Calibrate ``spec`` with the scheme its calibration choice names."""
    calibrators = {
        CalibrationMethod.SPLIT: fit_split,
        CalibrationMethod.KFOLD: fit_cross,
        CalibrationMethod.BOOTSTRAP: fit_bootstrap,
    }
    return calibrators[spec.calibration.method](X, y, spec, alpha, seed, learner)
