"""
Learner factory: maps validated hyperparameters to a learner instance.
"""

from loguru import logger

from autocp.learners.base import BaseLearner
from autocp.learners.constant import ConstantLearner
from autocp.learners.forest import ForestLearner
from autocp.learners.ridge import RidgeLearner
from autocp.models.pipeline import ModelHyperparams
from autocp.utils.backend_utils import import_backend


def _create_mlp(hp, seed: int) -> BaseLearner:
    MLPLearner = import_backend("mlp")
    return MLPLearner(
        hidden=hp.hidden,
        layers=hp.layers,
        learning_rate=hp.learning_rate,
        epochs=hp.epochs,
        weight_decay=hp.weight_decay,
        seed=seed,
    )


def create_learner(hp: ModelHyperparams, seed: int = 0) -> BaseLearner:
    """
    Create a learner for the given hyperparameters.

    Args:
        hp: Validated hyperparameters of one model family
        seed: Seed for every random choice the learner makes

    Returns:
        An unfitted learner

    Raises:
        ValueError: If the model family is unknown
        BackendUnavailableError: If the family's optional backend is not installed
    """
    learner_factories = {
        "ridge": lambda: RidgeLearner(lam=hp.lam, seed=seed),
        "forest": lambda: ForestLearner(
            n_trees=hp.n_trees,
            max_depth=hp.max_depth,
            min_leaf=hp.min_leaf,
            feature_frac=hp.feature_frac,
            seed=seed,
        ),
        "mlp": lambda: _create_mlp(hp, seed),
        "constant": lambda: ConstantLearner(seed=seed),
    }

    factory = learner_factories.get(hp.model_id)
    if factory is None:
        raise ValueError(
            f"Unsupported model: {hp.model_id}. "
            f"Supported models: {', '.join(learner_factories.keys())}"
        )
    logger.debug(f"Creating {hp.model_id} learner with seed {seed}")
    return factory()
