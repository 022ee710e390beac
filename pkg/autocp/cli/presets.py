"""
Named fixed pipelines: the eight baseline algorithms the search is compared against.
"""

from typing import Dict, Optional

from autocp.exceptions import ConfigError
from autocp.models.pipeline import (
    CalibrationChoice,
    EstimatorChoice,
    EstimatorKind,
    ForestParams,
    MLPParams,
    PipelineSpec,
    RidgeParams,
)
from autocp.models.schemas import RunConfig
from autocp.utils.backend_utils import backend_available, install_hint

_MODELS = {
    "Ridge": RidgeParams(lam=1.0),
    "RF": ForestParams(n_trees=100, max_depth=8, min_leaf=5, feature_frac=1.0),
    "NN": MLPParams(hidden=64, layers=2, learning_rate=1e-2, epochs=200, weight_decay=1e-4),
}


def _preset(model: str, estimator: EstimatorKind) -> PipelineSpec:
    return PipelineSpec(
        model=_MODELS[model],
        estimator=EstimatorChoice(kind=estimator),
        calibration=CalibrationChoice(),
    )


PRESETS: Dict[str, PipelineSpec] = {
    "SCP-Ridge": _preset("Ridge", EstimatorKind.MEAN_RESIDUAL),
    "SCP-RF": _preset("RF", EstimatorKind.MEAN_RESIDUAL),
    "SCP-NN": _preset("NN", EstimatorKind.MEAN_RESIDUAL),
    "SCP-Ridge-Local": _preset("Ridge", EstimatorKind.LOCALLY_WEIGHTED),
    "SCP-RF-Local": _preset("RF", EstimatorKind.LOCALLY_WEIGHTED),
    "SCP-NN-Local": _preset("NN", EstimatorKind.LOCALLY_WEIGHTED),
    "CQR-NN": _preset("NN", EstimatorKind.CQR),
    "CQR-RF": _preset("RF", EstimatorKind.CQR),
}


def get_preset(name: str) -> PipelineSpec:
    spec = PRESETS.get(name)
    if spec is None:
        raise ConfigError(f"Unknown preset: {name}. Available presets: {', '.join(PRESETS.keys())}")
    return spec


def resolve_pipeline(config: RunConfig) -> Optional[PipelineSpec]:
    """
    The fixed pipeline a run uses, or None when it searches.

    Raises:
        ConfigError: If the preset is unknown or its learner backend is not installed
    """
    spec = get_preset(config.preset) if config.preset is not None else config.pipeline
    if spec is not None and not backend_available(spec.model_id):
        raise ConfigError(f"{algorithm_name(config)}: {install_hint(spec.model_id.value)}")
    return spec


def algorithm_name(config: RunConfig) -> str:
    if config.preset is not None:
        return config.preset
    if config.pipeline is not None:
        return config.pipeline.label()
    return "AutoCP"
