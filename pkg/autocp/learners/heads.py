"""
Fitting and evaluating the mean, MAD and quantile heads of a learner.
"""

from dataclasses import replace
from typing import Tuple, Union

import numpy as np

from autocp.exceptions import HeadUnavailableError
from autocp.learners.base import BaseLearner, FittedModel, Head
from autocp.learners.learner_provider import create_learner
from autocp.models.pipeline import ModelHyperparams

# floor on the MAD head so normalised scores stay finite
EPS_SIGMA = 1e-6

LearnerLike = Union[ModelHyperparams, BaseLearner]


def _as_learner(model: LearnerLike, seed: int) -> BaseLearner:
    if isinstance(model, BaseLearner):
        return model
    return create_learner(model, seed)


def _check_training_data(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise ValueError(f"Training features must be a matrix, got shape {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
    if X.shape[0] < 2:
        raise ValueError(f"At least 2 training rows are required, got {X.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("Training data contains non-finite values")
    return X, y


def fit_mean(model: LearnerLike, X: np.ndarray, y: np.ndarray, seed: int = 0) -> FittedModel:
    """
    Fit the conditional-mean head.

    Args:
        model: Hyperparameters of a model family, or an already built learner
        X: Training features (n, d)
        y: Training labels (n,)
        seed: Learner seed when ``model`` is a hyperparameter set

    Returns:
        FittedModel exposing the mean head
    """
    X, y = _check_training_data(X, y)
    learner = _as_learner(model, seed)
    return FittedModel(learner=learner, n_features=X.shape[1], mean_state=learner.fit_regressor(X, y, stream=0))


def fit_mad(model: FittedModel, X: np.ndarray, y: np.ndarray) -> FittedModel:
    """Add a MAD head: a second regressor of the same family fitted to |y - mean(X)|."""
    if Head.MEAN not in model.heads_available:
        raise HeadUnavailableError("fit_mad needs a model with a fitted mean head")
    X, y = _check_training_data(X, y)
    residuals = np.abs(y - predict(model, Head.MEAN, X))
    return replace(model, mad_state=model.learner.fit_regressor(X, residuals, stream=1))


def fit_quantiles(model: LearnerLike, X: np.ndarray, y: np.ndarray, alpha: float, seed: int = 0) -> FittedModel:
    """Fit conditional quantiles at levels alpha/2 and 1 - alpha/2."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    X, y = _check_training_data(X, y)
    learner = _as_learner(model, seed)
    state = learner.fit_quantile_pair(X, y, (alpha / 2.0, 1.0 - alpha / 2.0))
    return FittedModel(learner=learner, n_features=X.shape[1], quantile_state=state, alpha=alpha)


def predict(
    model: FittedModel, head: Union[Head, str], X: np.ndarray
) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
    """
    Evaluate one head at the rows of ``X``.

    Returns:
        A vector for the mean and mad heads, a (lower, upper) pair with
        lower <= upper pointwise for the quantile head

    Raises:
        HeadUnavailableError: If the head was never fitted
        ValueError: For non-finite input or a feature-count mismatch
    """
    head = Head(head)
    if head not in model.heads_available:
        available = ", ".join(sorted(h.value for h in model.heads_available)) or "none"
        raise HeadUnavailableError(f"Head '{head.value}' is not fitted on this model; available: {available}")

    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != model.n_features:
        raise ValueError(f"Model expects {model.n_features} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("Prediction input contains non-finite values")

    learner = model.learner
    if head == Head.MEAN:
        out = np.asarray(learner.predict_regressor(model.mean_state, X), dtype=float)
    elif head == Head.MAD:
        out = np.maximum(np.asarray(learner.predict_regressor(model.mad_state, X), dtype=float), EPS_SIGMA)
    else:
        lower, upper = learner.predict_quantile_pair(model.quantile_state, X)
        lower, upper = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
        # crossing quantiles are swapped pointwise
        out = (np.minimum(lower, upper), np.maximum(lower, upper))
        if not (np.all(np.isfinite(out[0])) and np.all(np.isfinite(out[1]))):
            raise FloatingPointError(f"{learner!r} produced non-finite quantiles")
        return out

    if not np.all(np.isfinite(out)):
        raise FloatingPointError(f"{learner!r} produced non-finite {head.value} predictions")
    return out
