"""
Q-Network

Feedforward network with rectifier hidden layers and a linear output
layer, trained by hand-written backpropagation. Parameters are plain
numpy arrays so the trainer, checkpoints and gradient checks can reach
them directly.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..core.errors import DimensionError


@dataclass
class Gradients:
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def is_zero(self) -> bool:
        return all(not np.any(g) for g in self.weights + self.biases)

    def norm(self) -> float:
        """Global L2 norm over every weight and bias gradient."""
        return float(np.sqrt(sum(float(np.sum(g * g)) for g in self.weights + self.biases)))

    def clipped(self, max_norm: float) -> "Gradients":
        """Rescaled to ``max_norm`` when the global norm exceeds it; 0 disables clipping."""
        total = self.norm()
        if max_norm <= 0 or total <= max_norm:
            return self
        scale = max_norm / total
        return Gradients([g * scale for g in self.weights], [g * scale for g in self.biases])


class QNetwork:
    """Maps a state vector to one Q-value per action."""

    def __init__(self, weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]):
        if len(weights) != len(biases) or not weights:
            raise DimensionError("need one bias vector per weight matrix")
        self.weights = [np.array(w, dtype=float) for w in weights]
        self.biases = [np.array(b, dtype=float).reshape(-1) for b in biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or w.shape[0] != b.size:
                raise DimensionError(f"layer {i}: weight {w.shape} does not match bias {b.shape}")
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise DimensionError(f"layer {i} input does not match previous output")

    @classmethod
    def initialize(cls, layer_sizes: Sequence[int], rng: np.random.Generator) -> "QNetwork":
        """He-uniform weights, zero biases."""
        if len(layer_sizes) < 2:
            raise DimensionError("need at least input and output sizes")
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            limit = np.sqrt(6.0 / fan_in)
            weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @classmethod
    def zeros(cls, layer_sizes: Sequence[int]) -> "QNetwork":
        return cls(
            [np.zeros((o, i)) for i, o in zip(layer_sizes[:-1], layer_sizes[1:])],
            [np.zeros(o) for o in layer_sizes[1:]],
        )

    @property
    def layer_sizes(self) -> List[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def input_size(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_size(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "QNetwork":
        return QNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def _check_input(self, states: np.ndarray) -> np.ndarray:
        states = np.asarray(states, dtype=float)
        if states.shape[-1] != self.input_size:
            raise DimensionError(
                f"state dimension {states.shape[-1]} does not match input layer {self.input_size}"
            )
        return states

    def forward(self, states: np.ndarray) -> np.ndarray:
        """Q-values for one state (vector) or a batch (rows)."""
        activation = self._check_input(states)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            activation = activation @ w.T + b
            if i < last:
                activation = np.maximum(activation, 0.0)
        return activation

    def _forward_with_cache(
        self, states: np.ndarray
    ) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
        activation = np.atleast_2d(self._check_input(states))
        inputs, pre_activations = [], []
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(activation)
            z = activation @ w.T + b
            pre_activations.append(z)
            activation = np.maximum(z, 0.0) if i < last else z
        return activation, inputs, pre_activations

    def loss_and_gradients(
        self, states: np.ndarray, actions: Sequence[int], targets: Sequence[float]
    ) -> Tuple[float, Gradients]:
        """
        Mean squared error on the taken actions and its gradient.

        Only the output unit of each transition's action receives error;
        targets are treated as constants.
        """
        outputs, inputs, pre_activations = self._forward_with_cache(states)
        actions = np.asarray(actions, dtype=int)
        targets = np.asarray(targets, dtype=float)
        batch = outputs.shape[0]
        if actions.size != batch or targets.size != batch:
            raise DimensionError("actions and targets must match the batch size")
        rows = np.arange(batch)
        errors = outputs[rows, actions] - targets
        loss = float(np.mean(errors ** 2))

        delta = np.zeros_like(outputs)
        delta[rows, actions] = 2.0 * errors / batch
        grad_w: List[np.ndarray] = [np.empty(0)] * len(self.weights)
        grad_b: List[np.ndarray] = [np.empty(0)] * len(self.weights)
        for i in reversed(range(len(self.weights))):
            grad_w[i] = delta.T @ inputs[i]
            grad_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i]) * (pre_activations[i - 1] > 0)
        return loss, Gradients(grad_w, grad_b)

    def apply_gradients(self, gradients: Gradients, step_size: float) -> None:
        """Descent step w <- w - step_size * grad."""
        for w, g in zip(self.weights, gradients.weights):
            w -= step_size * g
        for b, g in zip(self.biases, gradients.biases):
            b -= step_size * g

    def parameters(self) -> np.ndarray:
        """All weights and biases flattened layer by layer."""
        return np.concatenate([p.ravel() for pair in zip(self.weights, self.biases) for p in pair])

    def set_parameters(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        offset = 0
        for w, b in zip(self.weights, self.biases):
            for p in (w, b):
                p[...] = values[offset:offset + p.size].reshape(p.shape)
                offset += p.size
        if offset != values.size:
            raise DimensionError(f"expected {offset} parameters, got {values.size}")

    def flatten_gradients(self, gradients: Gradients) -> np.ndarray:
        return np.concatenate(
            [g.ravel() for pair in zip(gradients.weights, gradients.biases) for g in pair]
        )

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.parameters())))


def layer_sizes_for(state_size: int, hidden: Sequence[int], action_count: int) -> List[int]:
    return [state_size, *hidden, action_count]


def greedy_action(q_values: np.ndarray) -> int:
    """Argmax with ties going to the lowest index."""
    return int(np.argmax(q_values))
