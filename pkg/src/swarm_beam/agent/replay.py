"""
Experience Replay

Bounded FIFO of transitions with uniform minibatch sampling.
"""

from collections import deque
from dataclasses import dataclass
from typing import Deque, List

import numpy as np

from ..core.errors import DimensionError


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class ReplayBuffer:
    """Keeps the most recent ``capacity`` transitions; the oldest is evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise DimensionError("replay capacity must be at least 1")
        self.capacity = capacity
        self._records: Deque[Transition] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._records)

    def __getitem__(self, index: int) -> Transition:
        return self._records[index]

    def add(self, transition: Transition) -> None:
        self._records.append(transition)

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if batch_size < 1:
            raise DimensionError("batch size must be at least 1")
        if batch_size > len(self._records):
            raise DimensionError(
                f"cannot sample {batch_size} transitions from a buffer of {len(self._records)}"
            )
        return rng.choice(len(self._records), size=batch_size, replace=False)

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[Transition]:
        """Uniform minibatch without replacement."""
        return [self._records[int(i)] for i in self.sample_indices(batch_size, rng)]

    def clear(self) -> None:
        self._records.clear()
