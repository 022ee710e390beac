from .base import BaseLearner, FittedModel, Head
from .heads import EPS_SIGMA, fit_mad, fit_mean, fit_quantiles, predict
from .learner_provider import create_learner

__all__ = [
    "BaseLearner",
    "FittedModel",
    "Head",
    "EPS_SIGMA",
    "create_learner",
    "fit_mad",
    "fit_mean",
    "fit_quantiles",
    "predict",
]
