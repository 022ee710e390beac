"""
The configured pipeline search space and its unit-cube parametrisation.

Per model family a pipeline is a point in [0, 1]^(d_m + 3): one coordinate
per hyperparameter, then estimator, calibration method and calibration
size. Categorical coordinates select among the configured choices by
equal-width bins.
"""

from typing import List, Optional

import numpy as np
from scipy.stats import qmc

from autocp.exceptions import ConfigError
from autocp.models.pipeline import (
    MODEL_RANGES,
    PARAM_CLASSES,
    SIZE_RANGES,
    CalibrationChoice,
    CalibrationMethod,
    EstimatorChoice,
    ModelId,
    ParamRange,
    PipelineSpec,
)
from autocp.models.schemas import SearchSpaceConfig
from autocp.utils.backend_utils import install_hint, missing_backends


def _bin(unit: float, n_choices: int) -> int:
    return min(int(unit * n_choices), n_choices - 1)


class SearchSpace:
    def __init__(self, config: Optional[SearchSpaceConfig] = None):
        self.config = config or SearchSpaceConfig()
        self.models: List[ModelId] = list(self.config.models)
        self.estimators = list(self.config.estimators)
        self.calibrations = list(self.config.calibrations)
        self.size_ranges = {
            method: SIZE_RANGES[method].restrict(*getattr(self.config, SIZE_RANGES[method].name))
            for method in SIZE_RANGES
        }

    def require_backends(self) -> None:
        """
        Raises:
            ConfigError: If a searched model family needs a package that is not installed
        """
        missing = missing_backends(m.value for m in self.models)
        if missing:
            hints = "; ".join(install_hint(m) for m in missing)
            raise ConfigError(f"search.models lists {', '.join(missing)} but {hints}")

    def ranges(self, model_id: ModelId) -> List[ParamRange]:
        model_id = ModelId(model_id)
        overrides = getattr(self.config, model_id.value, {}) if model_id != ModelId.CONSTANT else {}
        return [
            r.restrict(*overrides[r.name]) if r.name in overrides else r
            for r in MODEL_RANGES[model_id]
        ]

    def unit_dims(self, model_id: ModelId) -> int:
        return len(MODEL_RANGES[ModelId(model_id)]) + 3

    def from_unit(self, model_id: ModelId, unit: np.ndarray) -> PipelineSpec:
        model_id = ModelId(model_id)
        ranges = self.ranges(model_id)
        d = len(ranges)
        model = PARAM_CLASSES[model_id](**{r.name: r.from_unit(u) for r, u in zip(ranges, unit[:d])})
        estimator = EstimatorChoice(kind=self.estimators[_bin(unit[d], len(self.estimators))])

        method = self.calibrations[_bin(unit[d + 1], len(self.calibrations))]
        if method == CalibrationMethod.SPLIT:
            calibration = CalibrationChoice(method=method)
        else:
            size = self.size_ranges[method]
            calibration = CalibrationChoice(method=method, **{size.name: size.from_unit(unit[d + 2])})
        return PipelineSpec(model=model, estimator=estimator, calibration=calibration)

    def to_unit(self, spec: PipelineSpec) -> np.ndarray:
        """A unit-cube point that maps back to ``spec`` (categoricals sit at bin centres)."""
        ranges = self.ranges(spec.model_id)
        unit = [r.to_unit(getattr(spec.model, r.name)) for r in ranges]
        unit.append((self.estimators.index(spec.estimator.kind) + 0.5) / len(self.estimators))
        method = spec.calibration.method
        unit.append((self.calibrations.index(method) + 0.5) / len(self.calibrations))
        unit.append(self.size_ranges[method].to_unit(spec.calibration.size) if method in self.size_ranges else 0.5)
        return np.clip(np.asarray(unit, dtype=float), 0.0, 1.0)

    def sample(self, model_id: ModelId, rng: np.random.Generator) -> PipelineSpec:
        return self.from_unit(model_id, rng.uniform(size=self.unit_dims(model_id)))

    def sobol_candidates(self, model_id: ModelId, n: int, seed: int) -> List[PipelineSpec]:
        """``n`` scrambled Sobol points mapped into the space."""
        sampler = qmc.Sobol(d=self.unit_dims(model_id), scramble=True, seed=np.random.default_rng(seed))
        return [self.from_unit(model_id, u) for u in sampler.random(n)]

    def perturb(
        self, spec: PipelineSpec, n: int, rng: np.random.Generator, scale: float = 0.1, flip: float = 0.1
    ) -> List[PipelineSpec]:
        """
        Local moves around ``spec``: Gaussian steps on the continuous and
        size coordinates, and a re-draw of each categorical with probability ``flip``.
        """
        base = self.to_unit(spec)
        d = len(self.ranges(spec.model_id))
        categorical = np.zeros(base.size, dtype=bool)
        categorical[[d, d + 1]] = True

        candidates = []
        for _ in range(n):
            step = np.where(categorical, 0.0, rng.normal(scale=scale, size=base.size))
            point = np.clip(base + step, 0.0, 1.0)
            redraw = categorical & (rng.uniform(size=base.size) < flip)
            point[redraw] = rng.uniform(size=int(redraw.sum()))
            candidates.append(self.from_unit(spec.model_id, point))
        return candidates

    def contains(self, spec: PipelineSpec) -> bool:
        if spec.model_id not in self.models:
            return False
        if not all(r.contains(getattr(spec.model, r.name)) for r in self.ranges(spec.model_id)):
            return False
        if spec.estimator.kind not in self.estimators:
            return False
        method = spec.calibration.method
        if method not in self.calibrations:
            return False
        return method not in self.size_ranges or self.size_ranges[method].contains(spec.calibration.size)
