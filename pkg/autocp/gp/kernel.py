"""
Sparse additive kernel over encoded pipelines.

    k(a, b) = k_m(a, b) + k_e(a, b) + k_c(a, b)

k_m is a squared-exponential over the model block with one lengthscale per
dimension; k_e is an overlap kernel on the estimator one-hot; k_c is a
method overlap kernel times a squared-exponential on the size coordinate.
k_m belongs to one model family, k_e, k_c and the noise are shared by all.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from autocp.gp.encoding import PipelineEncoding, model_dims
from autocp.models.pipeline import ModelId


@dataclass(frozen=True)
class BlockParams:
    signal_variance: float = 1.0
    lengthscales: Tuple[float, ...] = ()


@dataclass(frozen=True)
class AdditiveKernelParams:
    models: Dict[ModelId, BlockParams] = field(default_factory=dict)
    estimator_variance: float = 0.5
    calibration_variance: float = 0.5
    size_lengthscale: float = 0.5
    noise_variance: float = 1e-2

    def __post_init__(self):
        values = [self.estimator_variance, self.calibration_variance, self.size_lengthscale, self.noise_variance]
        for block in self.models.values():
            values += [block.signal_variance, *block.lengthscales]
        if not all(v > 0 and np.isfinite(v) for v in values):
            raise ValueError("All kernel parameters must be finite and strictly positive")

    @classmethod
    def default(cls, model_ids: Iterable[ModelId], lengthscale: float = 0.5) -> "AdditiveKernelParams":
        models = {
            ModelId(m): BlockParams(1.0, (lengthscale,) * model_dims(m)) for m in model_ids
        }
        return cls(models=models)

    def block(self, model_id: ModelId) -> BlockParams:
        try:
            return self.models[ModelId(model_id)]
        except KeyError:
            return BlockParams(1.0, (0.5,) * model_dims(model_id))

    def total_variance(self, model_id: ModelId) -> float:
        return self.block(model_id).signal_variance + self.estimator_variance + self.calibration_variance

    def with_noise(self, noise_variance: float) -> "AdditiveKernelParams":
        return replace(self, noise_variance=noise_variance)

    def to_log_vector(self, model_ids: List[ModelId]) -> np.ndarray:
        """Log-parameters: per model [variance, lengthscales...], then the shared block."""
        values = []
        for m in model_ids:
            block = self.block(m)
            values += [block.signal_variance, *block.lengthscales]
        values += [self.estimator_variance, self.calibration_variance, self.size_lengthscale, self.noise_variance]
        return np.log(np.asarray(values, dtype=float))

    @classmethod
    def from_log_vector(cls, model_ids: List[ModelId], theta: np.ndarray) -> "AdditiveKernelParams":
        values = np.exp(np.asarray(theta, dtype=float))
        models = {}
        pos = 0
        for m in model_ids:
            d = model_dims(m)
            models[ModelId(m)] = BlockParams(float(values[pos]), tuple(float(v) for v in values[pos + 1 : pos + 1 + d]))
            pos += 1 + d
        est, cal, size, noise = (float(v) for v in values[pos : pos + 4])
        return cls(models=models, estimator_variance=est, calibration_variance=cal, size_lengthscale=size, noise_variance=noise)


def _blocks(model_id: ModelId, A: np.ndarray):
    d = model_dims(model_id)
    return A[:, :d], A[:, d : d + 3], A[:, d + 3 : d + 6], A[:, d + 6]


@dataclass(frozen=True)
class KernelTerms:
    """The three block kernels plus the pieces their gradients need."""

    model: np.ndarray
    estimator: np.ndarray
    calibration: np.ndarray
    model_sq_dists: np.ndarray  # (d, n, m), already divided by lengthscale^2
    size_sq_dist: np.ndarray  # divided by size_lengthscale^2

    @property
    def total(self) -> np.ndarray:
        return self.model + self.estimator + self.calibration


def kernel_terms(
    params: AdditiveKernelParams, model_id: ModelId, A: np.ndarray, B: Optional[np.ndarray] = None
) -> KernelTerms:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = A if B is None else np.atleast_2d(np.asarray(B, dtype=float))
    a_model, a_est, a_method, a_size = _blocks(model_id, A)
    b_model, b_est, b_method, b_size = _blocks(model_id, B)
    block = params.block(model_id)

    if a_model.shape[1]:
        scaled = (a_model[:, None, :] - b_model[None, :, :]) / np.asarray(block.lengthscales)
        model_sq = np.moveaxis(scaled**2, -1, 0)
    else:
        model_sq = np.zeros((0, A.shape[0], B.shape[0]))
    k_model = block.signal_variance * np.exp(-0.5 * model_sq.sum(axis=0))

    k_est = params.estimator_variance * (a_est @ b_est.T)

    size_sq = ((a_size[:, None] - b_size[None, :]) / params.size_lengthscale) ** 2
    k_cal = params.calibration_variance * (a_method @ b_method.T) * np.exp(-0.5 * size_sq)
    return KernelTerms(k_model, k_est, k_cal, model_sq, size_sq)


def gram(params: AdditiveKernelParams, model_id: ModelId, A: np.ndarray, B: Optional[np.ndarray] = None) -> np.ndarray:
    """Kernel matrix between the rows of A and B (A with itself when B is None); no noise term."""
    return kernel_terms(params, model_id, A, B).total


def kernel_eval(params: AdditiveKernelParams, a: PipelineEncoding, b: PipelineEncoding) -> float:
    if a.model_id != b.model_id:
        raise ValueError(f"Cannot compare encodings of {a.model_id.value} and {b.model_id.value}")
    return float(gram(params, a.model_id, a.vector[None, :], b.vector[None, :])[0, 0])
