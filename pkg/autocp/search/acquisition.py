from typing import Optional, Union

import numpy as np
from scipy.stats import norm

from autocp.gp.encoding import PipelineEncoding
from autocp.gp.process import GPState, gp_predict_raw

# predicted wall time is floored at one second before dividing
MIN_COST_SECONDS = 1.0


def expected_improvement(
    mean: Union[float, np.ndarray], std: Union[float, np.ndarray], best: float
) -> np.ndarray:
    """
    Expected improvement below ``best`` for a Gaussian with ``mean`` and ``std``.

    Where std is 0 the improvement is deterministic: max(best - mean, 0).
    """
    mean = np.asarray(mean, dtype=float)
    std = np.asarray(std, dtype=float)
    gap = best - mean
    safe_std = np.where(std > 0, std, 1.0)
    z = gap / safe_std
    ei = gap * norm.cdf(z) + safe_std * norm.pdf(z)
    ei = np.where(std > 0, ei, np.maximum(gap, 0.0))
    return np.maximum(ei, 0.0)


def _matrix(candidates) -> np.ndarray:
    if isinstance(candidates, PipelineEncoding):
        return candidates.vector[None, :]
    if isinstance(candidates, (list, tuple)):
        return np.vstack([c.vector for c in candidates])
    return np.atleast_2d(np.asarray(candidates, dtype=float))


def acquisition(
    state: GPState,
    candidates,
    best_observed: float,
    cost_state: Optional[GPState] = None,
) -> np.ndarray:
    """
    Expected improvement of each candidate encoding over ``best_observed``.

    With ``cost_state`` (a GP on log wall-seconds) the improvement is divided
    by the predicted wall time, floored at one second.
    """
    X = _matrix(candidates)
    mean, std = gp_predict_raw(state, X)
    ei = expected_improvement(mean, std, best_observed)
    if cost_state is not None:
        log_seconds, _ = gp_predict_raw(cost_state, X)
        ei = ei / np.maximum(np.exp(log_seconds), MIN_COST_SECONDS)
    return ei
