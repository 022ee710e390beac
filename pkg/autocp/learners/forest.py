"""
Random forest regressor with a quantile-forest read-out.

The quantile head keeps the training leaf memberships of every tree and
answers a query with a weighted empirical quantile of the training labels,
each label weighted by how often it shares a leaf with the query.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from sklearn.ensemble import RandomForestRegressor

from autocp.learners.base import BaseLearner
from autocp.models.pipeline import ModelId
from autocp.utils.seeding import sklearn_seed


@dataclass(frozen=True)
class QuantileForestState:
    forest: RandomForestRegressor
    sorted_labels: np.ndarray
    # leaf id of every (sorted) training row, one column per tree
    train_leaves: np.ndarray
    leaf_sizes: List[np.ndarray]
    levels: Tuple[float, float]


def weighted_quantiles(sorted_values: np.ndarray, weights: np.ndarray, level: float) -> np.ndarray:
    """
    Row-wise weighted quantile of ``sorted_values``.

    Args:
        sorted_values: Ascending values, length n
        weights: Non-negative weights of shape (m, n), each row summing to 1
        level: Quantile level in (0, 1)

    Returns:
        For each row, the smallest value whose cumulative weight reaches ``level``
    """
    cumulative = np.cumsum(weights, axis=1)
    reached = cumulative >= level * cumulative[:, -1:] - 1e-12
    return sorted_values[np.argmax(reached, axis=1)]


class ForestLearner(BaseLearner):
    model_id = ModelId.FOREST

    def __init__(
        self,
        n_trees: int = 100,
        max_depth: int = 8,
        min_leaf: int = 5,
        feature_frac: float = 1.0,
        bootstrap: bool = True,
        seed: int = 0,
    ):
        super().__init__(seed)
        self.n_trees = int(n_trees)
        self.max_depth = int(max_depth)
        self.min_leaf = int(min_leaf)
        self.feature_frac = float(feature_frac)
        self.bootstrap = bootstrap

    def _forest(self, stream: int) -> RandomForestRegressor:
        # criterion "squared_error" is variance reduction
        return RandomForestRegressor(
            n_estimators=self.n_trees,
            criterion="squared_error",
            max_depth=self.max_depth,
            min_samples_leaf=self.min_leaf,
            max_features=self.feature_frac,
            bootstrap=self.bootstrap,
            random_state=sklearn_seed(self.seed, stream),
            n_jobs=1,
        )

    def fit_regressor(self, X: np.ndarray, y: np.ndarray, stream: int = 0) -> RandomForestRegressor:
        return self._forest(stream).fit(X, y)

    def predict_regressor(self, state: RandomForestRegressor, X: np.ndarray) -> np.ndarray:
        return state.predict(X)

    def fit_quantile_pair(
        self, X: np.ndarray, y: np.ndarray, levels: Tuple[float, float]
    ) -> QuantileForestState:
        forest = self._forest(stream=2).fit(X, y)
        order = np.argsort(y, kind="stable")
        train_leaves = forest.apply(X[order])
        leaf_sizes = [
            np.bincount(train_leaves[:, t], minlength=tree.tree_.node_count)
            for t, tree in enumerate(forest.estimators_)
        ]
        return QuantileForestState(
            forest=forest,
            sorted_labels=np.asarray(y, dtype=float)[order],
            train_leaves=train_leaves,
            leaf_sizes=leaf_sizes,
            levels=tuple(levels),
        )

    def leaf_weights(self, state: QuantileForestState, X: np.ndarray) -> np.ndarray:
        """Weights over the sorted training labels for every query row."""
        query_leaves = state.forest.apply(X)
        weights = np.zeros((X.shape[0], state.sorted_labels.shape[0]))
        for t in range(query_leaves.shape[1]):
            shared = query_leaves[:, t : t + 1] == state.train_leaves[None, :, t]
            sizes = state.leaf_sizes[t][query_leaves[:, t]]
            weights += shared / sizes[:, None]
        return weights / query_leaves.shape[1]

    def predict_quantile_pair(self, state: QuantileForestState, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        weights = self.leaf_weights(state, X)
        lower_level, upper_level = state.levels
        return (
            weighted_quantiles(state.sorted_labels, weights, lower_level),
            weighted_quantiles(state.sorted_labels, weights, upper_level),
        )

    def __repr__(self) -> str:
        return (
            f"ForestLearner(n_trees={self.n_trees}, max_depth={self.max_depth}, "
            f"min_leaf={self.min_leaf}, feature_frac={self.feature_frac:g})"
        )
