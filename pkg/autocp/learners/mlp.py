"""
Multilayer perceptron learner (requires the ``mlp`` extra).
"""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
import torch
from loguru import logger
from torch import nn

from autocp.learners.base import BaseLearner
from autocp.models.pipeline import ModelId
from autocp.utils.seeding import derive_seed

LossFn = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]


@dataclass(frozen=True)
class MLPState:
    network: nn.Module
    levels: Tuple[float, ...] = ()


def pinball_loss(levels: Tuple[float, ...]) -> LossFn:
    """Mean pinball loss with one output column per quantile level."""
    tau = torch.tensor(levels, dtype=torch.float64)

    def loss(prediction: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
        diff = target - prediction
        return torch.mean(torch.maximum(tau * diff, (tau - 1.0) * diff))

    return loss


def squared_loss(prediction: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    return torch.mean((prediction - target) ** 2)


class MLPLearner(BaseLearner):
    """
    Tanh MLP trained by mini-batch gradient descent with weight decay.

    All tensors are float64 and every source of randomness (initialisation
    and batch order) is drawn from the learner seed.
    """

    model_id = ModelId.MLP

    def __init__(
        self,
        hidden: int = 64,
        layers: int = 2,
        learning_rate: float = 1e-2,
        epochs: int = 200,
        weight_decay: float = 1e-4,
        batch_size: int = 32,
        seed: int = 0,
    ):
        super().__init__(seed)
        self.hidden = int(hidden)
        self.layers = int(layers)
        self.learning_rate = float(learning_rate)
        self.epochs = int(epochs)
        self.weight_decay = float(weight_decay)
        self.batch_size = int(batch_size)

    def build_network(self, n_inputs: int, n_outputs: int, stream: int = 0) -> nn.Sequential:
        modules = []
        width = n_inputs
        for _ in range(self.layers):
            modules += [nn.Linear(width, self.hidden), nn.Tanh()]
            width = self.hidden
        modules.append(nn.Linear(width, n_outputs))
        network = nn.Sequential(*modules).to(torch.float64)

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(derive_seed(self.seed, 2 * stream) & 0x7FFFFFFFFFFFFFFF)
            for module in network:
                if isinstance(module, nn.Linear):
                    nn.init.xavier_uniform_(module.weight)
                    nn.init.zeros_(module.bias)
        return network

    def train(self, network: nn.Module, X: np.ndarray, Y: np.ndarray, loss_fn: LossFn, stream: int = 0) -> nn.Module:
        inputs = torch.as_tensor(X, dtype=torch.float64)
        targets = torch.as_tensor(Y, dtype=torch.float64)
        optimizer = torch.optim.SGD(
            network.parameters(), lr=self.learning_rate, weight_decay=self.weight_decay
        )
        generator = torch.Generator().manual_seed(derive_seed(self.seed, 2 * stream + 1) & 0x7FFFFFFFFFFFFFFF)
        n = inputs.shape[0]

        network.train()
        for epoch in range(self.epochs):
            order = torch.randperm(n, generator=generator)
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                optimizer.zero_grad()
                loss = loss_fn(network(inputs[batch]), targets[batch])
                loss.backward()
                optimizer.step()
            if not torch.isfinite(loss):
                logger.debug(f"MLP training diverged at epoch {epoch} (lr={self.learning_rate:g})")
                raise FloatingPointError(f"MLP training diverged at epoch {epoch}")
        network.eval()
        return network

    @staticmethod
    def _forward(network: nn.Module, X: np.ndarray) -> np.ndarray:
        with torch.no_grad():
            return network(torch.as_tensor(X, dtype=torch.float64)).numpy()

    def fit_regressor(self, X: np.ndarray, y: np.ndarray, stream: int = 0) -> MLPState:
        network = self.build_network(X.shape[1], 1, stream)
        network = self.train(network, X, np.asarray(y)[:, None], squared_loss, stream)
        return MLPState(network=network)

    def predict_regressor(self, state: MLPState, X: np.ndarray) -> np.ndarray:
        return self._forward(state.network, X)[:, 0]

    def fit_quantile_pair(self, X: np.ndarray, y: np.ndarray, levels: Tuple[float, float]) -> MLPState:
        network = self.build_network(X.shape[1], 2, stream=2)
        targets = np.repeat(np.asarray(y)[:, None], 2, axis=1)
        network = self.train(network, X, targets, pinball_loss(tuple(levels)), stream=2)
        return MLPState(network=network, levels=tuple(levels))

    def predict_quantile_pair(self, state: MLPState, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        out = self._forward(state.network, X)
        return out[:, 0], out[:, 1]

    def __repr__(self) -> str:
        return (
            f"MLPLearner(hidden={self.hidden}, layers={self.layers}, lr={self.learning_rate:g}, "
            f"epochs={self.epochs}, weight_decay={self.weight_decay:g})"
        )
