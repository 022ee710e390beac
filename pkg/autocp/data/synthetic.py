"""
Synthetic regression and treatment-effect generators with known ground truth.
"""

from typing import Callable, Dict, Tuple

import numpy as np
import pandas as pd

from autocp.data.dataset import Dataset


def make_gaussian(n: int, d: int = 5, noise: float = 1.0, seed: int = 0) -> Dataset:
    """Linear model with i.i.d. Gaussian noise: y = X @ beta + noise * eps."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    beta = np.linspace(1.0, -1.0, d)
    y = X @ beta + noise * rng.normal(size=n)
    return Dataset.from_arrays(X, y, name="gaussian")


def make_heteroscedastic(n: int, d_noise: int = 0, seed: int = 0) -> Tuple[Dataset, np.ndarray]:
    """
    y = x * eps with x ~ U[0.1, 2] and eps ~ N(0, 1).

    Args:
        n: Number of samples
        d_noise: Extra irrelevant standard-normal feature columns
        seed: Random seed

    Returns:
        The dataset and the true conditional standard deviation |x| per row
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.1, 2.0, size=n)
    y = x * rng.normal(size=n)
    X = x[:, None]
    if d_noise:
        X = np.hstack([X, rng.normal(size=(n, d_noise))])
    return Dataset.from_arrays(X, y, name="heteroscedastic"), np.abs(x)


def _regime_linear(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    X = rng.normal(size=(n, 4))
    return X, X @ np.array([1.0, -0.5, 0.25, 0.0]) + 0.5 * rng.normal(size=n)


def _regime_hetero_linear(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    X = rng.uniform(-2, 2, size=(n, 3))
    scale = 0.1 + np.abs(X[:, 0])
    return X, X[:, 1] + scale * rng.normal(size=n)


def _regime_sine(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    X = rng.uniform(-3, 3, size=(n, 2))
    return X, np.sin(2 * X[:, 0]) + 0.3 * rng.normal(size=n)


def _regime_step(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    X = rng.uniform(-1, 1, size=(n, 3))
    return X, np.where(X[:, 0] > 0, 2.0, -1.0) + 0.2 * rng.normal(size=n)


def _regime_heavy_tail(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    X = rng.normal(size=(n, 3))
    return X, X[:, 0] - X[:, 1] + 0.5 * rng.standard_t(3, size=n)


def _regime_skewed(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    X = rng.uniform(0, 2, size=(n, 2))
    return X, X[:, 0] + X[:, 1] * rng.exponential(1.0, size=n)


def _regime_interaction(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    X = rng.normal(size=(n, 4))
    return X, X[:, 0] * X[:, 1] + 0.3 * (1 + np.abs(X[:, 2])) * rng.normal(size=n)


def _regime_bimodal_noise(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    X = rng.uniform(-1, 1, size=(n, 2))
    sign = np.where(rng.uniform(size=n) < 0.5, -1.0, 1.0)
    noise = sign * (0.5 + 0.1 * rng.normal(size=n)) * (X[:, 1] > 0)
    return X, X[:, 0] + noise + 0.1 * rng.normal(size=n)


BENCHMARK_REGIMES: Dict[str, Callable[[np.random.Generator, int], Tuple[np.ndarray, np.ndarray]]] = {
    "linear": _regime_linear,
    "hetero_linear": _regime_hetero_linear,
    "sine": _regime_sine,
    "step": _regime_step,
    "heavy_tail": _regime_heavy_tail,
    "skewed": _regime_skewed,
    "interaction": _regime_interaction,
    "bimodal_noise": _regime_bimodal_noise,
}


def make_regime(name: str, n: int, seed: int = 0) -> Dataset:
    """Draw ``n`` rows from one of the eight named benchmark regimes."""
    generator = BENCHMARK_REGIMES.get(name)
    if generator is None:
        raise ValueError(
            f"Unknown synthetic regime: {name}. "
            f"Available regimes: {', '.join(BENCHMARK_REGIMES.keys())}"
        )
    X, y = generator(np.random.default_rng(seed), n)
    return Dataset.from_arrays(X, y, name=name)


def make_two_arm(n: int, effect: str = "heterogeneous", seed: int = 0) -> pd.DataFrame:
    """
    Randomised two-arm data with both potential outcomes recorded.

    Args:
        n: Number of units
        effect: "heterogeneous" (effect varies with x0) or "zero" (identical arms)
        seed: Random seed

    Returns:
        DataFrame with feature columns x0..x2, treatment ``t``, observed ``y``
        and counterfactual columns ``y0``/``y1``
    """
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    base = X[:, 0] + 0.5 * X[:, 1]
    y0 = base + (0.5 + 0.25 * np.abs(X[:, 2])) * rng.normal(size=n)
    if effect == "zero":
        y1 = base + (0.5 + 0.25 * np.abs(X[:, 2])) * rng.normal(size=n)
    elif effect == "heterogeneous":
        y1 = base + 1.0 + X[:, 0] + (0.5 + 0.25 * np.abs(X[:, 2])) * rng.normal(size=n)
    else:
        raise ValueError(f"Unknown effect type: {effect}. Available: heterogeneous, zero")
    t = (rng.uniform(size=n) < 0.5).astype(int)
    frame = pd.DataFrame(X, columns=["x0", "x1", "x2"])
    frame["t"] = t
    frame["y"] = np.where(t == 1, y1, y0)
    frame["y0"] = y0
    frame["y1"] = y1
    return frame
