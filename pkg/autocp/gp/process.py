"""
Exact GP regression per model family with jointly fitted shared kernels.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import linalg, optimize

from autocp.exceptions import GPNumericalError
from autocp.gp.encoding import PipelineEncoding, model_dims
from autocp.gp.kernel import AdditiveKernelParams, gram, kernel_terms
from autocp.models.pipeline import ModelId
from autocp.utils.seeding import make_rng

JITTER_START = 1e-8
JITTER_MAX = 1e-4
MIN_NOISE = 1e-8
NEGATIVE_VARIANCE_TOLERANCE = 1e-10

# log-space bounds searched by the hyperparameter optimiser
LOG_VARIANCE_BOUNDS = (math.log(1e-3), math.log(1e2))
LOG_LENGTHSCALE_BOUNDS = (math.log(1e-2), math.log(1e1))
LOG_NOISE_BOUNDS = (math.log(1e-6), math.log(1e1))

Inputs = Union[Sequence[PipelineEncoding], np.ndarray]


@dataclass(frozen=True)
class GPState:
    model_id: ModelId
    inputs: np.ndarray
    raw_targets: np.ndarray
    target_mean: float
    target_std: float
    params: AdditiveKernelParams
    chol: np.ndarray
    weights: np.ndarray
    jitter: float = 0.0

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def targets(self) -> np.ndarray:
        """Standardised targets the GP is fitted to."""
        return (self.raw_targets - self.target_mean) / self.target_std

    @property
    def log_marginal(self) -> float:
        y = self.targets
        return float(
            -0.5 * y @ self.weights - np.sum(np.log(np.diag(self.chol))) - 0.5 * self.n * math.log(2 * math.pi)
        )

    def destandardize(self, mean: np.ndarray, variance: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self.target_mean + self.target_std * mean, self.target_std**2 * variance


def _input_matrix(inputs: Inputs, model_id: Optional[ModelId]) -> Tuple[np.ndarray, ModelId]:
    if isinstance(inputs, np.ndarray):
        if model_id is None:
            raise ValueError("model_id is required when inputs are given as a matrix")
        return np.atleast_2d(inputs).astype(float), ModelId(model_id)
    inputs = list(inputs)
    if not inputs:
        raise ValueError("gp_fit needs at least one observation")
    ids = {enc.model_id for enc in inputs}
    if len(ids) != 1:
        raise ValueError(f"All encodings of one GP must share a model family, got {sorted(i.value for i in ids)}")
    return np.vstack([enc.vector for enc in inputs]), ids.pop()


def _factorize(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """Cholesky factor of ``matrix``, adding diagonal jitter 1e-8, 1e-7, ... up to 1e-4 on failure."""
    eye = np.eye(matrix.shape[0])
    jitter = 0.0
    while True:
        try:
            return linalg.cholesky(matrix + jitter * eye, lower=True), jitter
        except linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10.0
            if jitter > JITTER_MAX * (1 + 1e-9):
                condition = np.linalg.cond(matrix)
                logger.error(f"GP covariance not factorisable at jitter {JITTER_MAX:g} (condition number {condition:.3e})")
                raise GPNumericalError(
                    f"Covariance factorisation failed at jitter {JITTER_MAX:g}; condition number {condition:.3e}"
                )
            logger.debug(f"Cholesky failed, retrying with jitter {jitter:g}")


def gp_fit(
    inputs: Inputs,
    targets: np.ndarray,
    params: AdditiveKernelParams,
    model_id: Optional[ModelId] = None,
) -> GPState:
    """
    Factorise K + noise * I for one model family's observations.

    Args:
        inputs: Encodings of the observed pipelines, or their stacked vectors
        targets: Raw observed values; standardised internally
        params: Kernel hyperparameters
        model_id: Required when ``inputs`` is a matrix

    Raises:
        GPNumericalError: If the factorisation fails even at the largest jitter
    """
    X, model_id = _input_matrix(inputs, model_id)
    raw = np.asarray(targets, dtype=float).ravel()
    if X.shape[0] < 1 or raw.shape[0] != X.shape[0]:
        raise ValueError(f"gp_fit needs matching inputs and targets, got {X.shape[0]} and {raw.shape[0]}")
    if params.noise_variance < MIN_NOISE:
        raise ValueError(f"noise_variance must be >= {MIN_NOISE:g}, got {params.noise_variance:g}")

    mean = float(np.mean(raw))
    std = float(np.std(raw))
    if std < 1e-12:
        std = 1.0

    K = gram(params, model_id, X) + params.noise_variance * np.eye(X.shape[0])
    chol, jitter = _factorize(K)
    weights = linalg.cho_solve((chol, True), (raw - mean) / std)
    return GPState(model_id, X, raw, mean, std, params, chol, weights, jitter)


def gp_predict(state: GPState, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of the latent function in standardised units."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    cross = gram(state.params, state.model_id, X, state.inputs)
    mean = cross @ state.weights
    v = linalg.solve_triangular(state.chol, cross.T, lower=True)
    variance = state.params.total_variance(state.model_id) - np.sum(v**2, axis=0)
    if np.any(variance < -NEGATIVE_VARIANCE_TOLERANCE):
        raise GPNumericalError(f"Posterior variance {variance.min():.3e} is negative beyond roundoff")
    return mean, np.maximum(variance, 0.0)


def gp_posterior(state: GPState, x: Union[PipelineEncoding, np.ndarray]) -> Tuple[float, float]:
    """Posterior (mean, variance) at one encoding, in standardised units."""
    if isinstance(x, PipelineEncoding):
        if x.model_id != state.model_id:
            raise ValueError(f"Encoding of {x.model_id.value} queried on the {state.model_id.value} GP")
        x = x.vector
    mean, variance = gp_predict(state, np.asarray(x)[None, :])
    return float(mean[0]), float(variance[0])


def gp_predict_raw(state: GPState, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation in the units of the raw targets."""
    mean, variance = state.destandardize(*gp_predict(state, X))
    return mean, np.sqrt(variance)


def joint_log_marginal(states: Sequence[GPState]) -> float:
    """Sum of per-model log marginal likelihoods under their shared hyperparameters."""
    states = list(states)
    if not states:
        raise ValueError("joint_log_marginal needs at least one GP state")
    return float(sum(state.log_marginal for state in states))


def _layout(model_ids: List[ModelId]) -> Tuple[Dict[ModelId, int], int]:
    offsets = {}
    pos = 0
    for m in model_ids:
        offsets[m] = pos
        pos += 1 + model_dims(m)
    return offsets, pos


def joint_log_marginal_and_grad(
    theta: np.ndarray, states: Sequence[GPState], model_ids: List[ModelId]
) -> Tuple[float, np.ndarray]:
    """
    Joint log marginal likelihood and its gradient in log-parameter space.

    ``theta`` follows ``AdditiveKernelParams.to_log_vector(model_ids)``; the
    inputs and standardised targets of ``states`` are used, their stored
    parameters are ignored.
    """
    params = AdditiveKernelParams.from_log_vector(model_ids, theta)
    offsets, shared = _layout(model_ids)
    value = 0.0
    grad = np.zeros_like(np.asarray(theta, dtype=float))

    for state in states:
        terms = kernel_terms(params, state.model_id, state.inputs)
        n = state.n
        K = terms.total + params.noise_variance * np.eye(n)
        chol, _ = _factorize(K)
        y = state.targets
        w = linalg.cho_solve((chol, True), y)
        value += -0.5 * y @ w - np.sum(np.log(np.diag(chol))) - 0.5 * n * math.log(2 * math.pi)

        inner = np.outer(w, w) - linalg.cho_solve((chol, True), np.eye(n))

        def contribution(dK: np.ndarray) -> float:
            return 0.5 * float(np.sum(inner * dK))

        o = offsets[state.model_id]
        grad[o] += contribution(terms.model)
        for j in range(terms.model_sq_dists.shape[0]):
            grad[o + 1 + j] += contribution(terms.model * terms.model_sq_dists[j])
        grad[shared] += contribution(terms.estimator)
        grad[shared + 1] += contribution(terms.calibration)
        grad[shared + 2] += contribution(terms.calibration * terms.size_sq_dist)
        grad[shared + 3] += 0.5 * params.noise_variance * float(np.trace(inner))

    return float(value), grad


def _bounds(model_ids: List[ModelId]) -> List[Tuple[float, float]]:
    bounds = []
    for m in model_ids:
        bounds += [LOG_VARIANCE_BOUNDS] + [LOG_LENGTHSCALE_BOUNDS] * model_dims(m)
    bounds += [LOG_VARIANCE_BOUNDS, LOG_VARIANCE_BOUNDS, LOG_LENGTHSCALE_BOUNDS, LOG_NOISE_BOUNDS]
    return bounds


def refit_states(states: Sequence[GPState], params: AdditiveKernelParams) -> List[GPState]:
    return [gp_fit(s.inputs, s.raw_targets, params, s.model_id) for s in states]


def optimize_hyperparams(
    states: Sequence[GPState],
    incumbent: Optional[AdditiveKernelParams] = None,
    restarts: int = 5,
    steps: int = 100,
    seed: int = 0,
) -> AdditiveKernelParams:
    """
    Maximise the joint log marginal likelihood over all per-model GPs.

    Runs L-BFGS-B in log-parameter space from the incumbent and from
    ``restarts - 1`` seeded random points inside the bounds, each for at most
    ``steps`` iterations. The step size comes from L-BFGS-B's line search.

    Returns:
        The best parameters found, or the incumbent if no start beats it
    """
    states = [s for s in states if s.n > 0]
    if sum(s.n for s in states) < 2:
        raise ValueError("optimize_hyperparams needs at least 2 observations in total")
    incumbent = incumbent or states[0].params
    model_ids = sorted({s.model_id for s in states}, key=lambda m: list(ModelId).index(m))
    bounds = _bounds(model_ids)
    lows, highs = np.array([b[0] for b in bounds]), np.array([b[1] for b in bounds])

    theta0 = incumbent.to_log_vector(model_ids)
    try:
        best_value = joint_log_marginal_and_grad(theta0, states, model_ids)[0]
    except GPNumericalError:
        best_value = -math.inf
    best_theta = None

    rng = make_rng(seed, 0)
    starts = [np.clip(theta0, lows, highs)] + [rng.uniform(lows, highs) for _ in range(max(restarts - 1, 0))]

    def objective(theta: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = joint_log_marginal_and_grad(theta, states, model_ids)
        return -value, -grad

    failures = 0
    for start in starts:
        try:
            result = optimize.minimize(
                objective, start, jac=True, method="L-BFGS-B", bounds=bounds, options={"maxiter": steps}
            )
        except (GPNumericalError, linalg.LinAlgError, FloatingPointError, ValueError) as e:
            failures += 1
            logger.debug(f"Hyperparameter start failed: {e}")
            continue
        value = -float(result.fun)
        if np.isfinite(value) and value > best_value:
            best_value, best_theta = value, result.x

    if failures == len(starts):
        logger.warning("All hyperparameter starts failed; keeping the incumbent kernel parameters")
    if best_theta is None:
        return incumbent

    fitted = AdditiveKernelParams.from_log_vector(model_ids, best_theta)
    # models without observations keep their incumbent blocks
    models = {**incumbent.models, **fitted.models}
    logger.debug(f"Joint log marginal likelihood after optimisation: {best_value:.4f}")
    return AdditiveKernelParams(
        models=models,
        estimator_variance=fitted.estimator_variance,
        calibration_variance=fitted.calibration_variance,
        size_lengthscale=fitted.size_lengthscale,
        noise_variance=fitted.noise_variance,
    )
