"""
Deep Q-Learning Trainer

Epsilon-greedy control, Bellman targets, minibatch updates from the
replay buffer and the greedy rollout that turns a trained network into
position and phase corrections.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.errors import DimensionError, SwarmBeamError
from ..core.geometry import UavState
from ..core.hover import Perturbation
from .environment import ReformEnvironment, ReformScenario
from .network import QNetwork, greedy_action, layer_sizes_for
from .replay import ReplayBuffer, Transition

logger = logging.getLogger(__name__)

STEP_SCHEDULES = ("constant", "decaying")


@dataclass(frozen=True)
class AgentConfig:
    """Learning hyperparameters; scenario-level knobs live on ReformScenario."""
    learning_rate: float = 0.05
    discount: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay: float = 0.99
    batch_size: int = 32
    replay_capacity: int = 10_000
    episodes: int = 300
    hidden_sizes: Tuple[int, ...] = (128, 128)
    step_schedule: str = "decaying"
    step_decay: float = 1000.0
    target_sync_interval: int = 100
    max_grad_norm: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if not 0 < self.learning_rate <= 1:
            raise DimensionError("learning_rate must lie in (0, 1]")
        if not 0 < self.discount <= 1:
            raise DimensionError("discount must lie in (0, 1]")
        if not 0 <= self.epsilon_end <= self.epsilon_start <= 1:
            raise DimensionError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if not 0 < self.epsilon_decay <= 1:
            raise DimensionError("epsilon_decay must lie in (0, 1]")
        if not 1 <= self.batch_size <= self.replay_capacity:
            raise DimensionError("need 1 <= batch_size <= replay_capacity")
        if self.step_schedule not in STEP_SCHEDULES:
            raise DimensionError(f"step_schedule must be one of {STEP_SCHEDULES}")
        if not self.step_decay > 0:
            raise DimensionError("step_decay must be positive")
        if self.target_sync_interval < 0:
            raise DimensionError("target_sync_interval must be non-negative")
        if self.max_grad_norm < 0:
            raise DimensionError("max_grad_norm must be non-negative")

    def step_size(self, update_index: int) -> float:
        if self.step_schedule == "constant":
            return self.learning_rate
        return self.learning_rate / (1.0 + update_index / self.step_decay)

    def epsilon(self, episode: int) -> float:
        return max(self.epsilon_end, self.epsilon_start * self.epsilon_decay ** episode)


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    total_reward: float
    steps: int
    final_eta: float
    epsilon: float


@dataclass
class TrainingLog:
    network: QNetwork
    eta_threshold: float
    losses: List[float] = field(default_factory=list)
    episodes: List[EpisodeRecord] = field(default_factory=list)


def bellman_target(q_current, reward, q_next_max, alpha: float, gamma: float, terminal=False):
    """Q + alpha * (reward + gamma * (Q'max - Q)) with Q'max taken as 0 after a terminal step."""
    q_next_max = np.where(terminal, 0.0, q_next_max)
    target = q_current + alpha * (reward + gamma * (q_next_max - q_current))
    return float(target) if np.ndim(target) == 0 else target


def dqn_loss(predicted: Sequence[float], targets: Sequence[float]) -> float:
    predicted = np.asarray(predicted, dtype=float).reshape(-1)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    if predicted.size == 0:
        raise DimensionError("loss of an empty batch")
    if predicted.size != targets.size:
        raise DimensionError("predictions and targets differ in length")
    return float(np.mean((predicted - targets) ** 2))


def compute_targets(
    net: QNetwork,
    minibatch: Sequence[Transition],
    config: AgentConfig,
    target_net: Optional[QNetwork] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """States, actions and Bellman targets for a minibatch."""
    states = np.stack([t.state for t in minibatch])
    next_states = np.stack([t.next_state for t in minibatch])
    actions = np.array([t.action for t in minibatch], dtype=int)
    rewards = np.array([t.reward for t in minibatch], dtype=float)
    terminal = np.array([t.terminal for t in minibatch], dtype=bool)

    q_current = net.forward(states)[np.arange(len(minibatch)), actions]
    q_next_max = (target_net or net).forward(next_states).max(axis=1)
    targets = bellman_target(
        q_current, rewards, q_next_max, config.learning_rate, config.discount, terminal
    )
    return states, actions, np.asarray(targets, dtype=float)


def backward_and_update(
    net: QNetwork,
    minibatch: Sequence[Transition],
    config: AgentConfig,
    update_index: int = 0,
    target_net: Optional[QNetwork] = None,
) -> float:
    """One descent step on the taken-action MSE; returns the loss before the step."""
    if not minibatch:
        raise DimensionError("empty minibatch")
    states, actions, targets = compute_targets(net, minibatch, config, target_net)
    loss, gradients = net.loss_and_gradients(states, actions, targets)
    net.apply_gradients(gradients.clipped(config.max_grad_norm), config.step_size(update_index))
    return loss


def epsilon_greedy(
    net: QNetwork, state: np.ndarray, epsilon: float, rng: np.random.Generator
) -> int:
    if not 0.0 <= epsilon <= 1.0:
        raise DimensionError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(net.output_size))
    return greedy_action(net.forward(state))


def train(
    scenario: ReformScenario,
    config: AgentConfig,
    rng: np.random.Generator,
    network: Optional[QNetwork] = None,
) -> TrainingLog:
    """Run the configured number of episodes; every random draw comes from ``rng``."""
    net = network or QNetwork.initialize(
        layer_sizes_for(scenario.state_size, config.hidden_sizes, scenario.action_count), rng
    )
    if net.input_size != scenario.state_size or net.output_size != scenario.action_count:
        raise DimensionError("network shape does not match the scenario")
    target_net = net.copy() if config.target_sync_interval > 0 else None
    buffer = ReplayBuffer(config.replay_capacity)
    environment = ReformEnvironment(scenario)
    log = TrainingLog(network=net, eta_threshold=scenario.eta_threshold)
    update_index = 0

    for episode in range(config.episodes):
        epsilon = config.epsilon(episode)
        state = environment.reset(scenario.sample_perturbation(rng))
        total_reward = scenario.terminal_bonus if environment.reached else 0.0

        while not environment.done:
            action = epsilon_greedy(net, state, epsilon, rng)
            next_state, reward, _ = environment.step(action)
            # running out of steps also ends the return
            buffer.add(Transition(state, action, reward, next_state, environment.done))
            total_reward += reward
            state = next_state

            if len(buffer) >= config.batch_size:
                loss = backward_and_update(
                    net, buffer.sample(config.batch_size, rng), config, update_index, target_net
                )
                log.losses.append(loss)
                update_index += 1
                if target_net is not None and update_index % config.target_sync_interval == 0:
                    target_net = net.copy()

        if not net.is_finite():
            raise SwarmBeamError("training diverged", {"episode": episode, "updates": update_index})
        record = EpisodeRecord(episode, total_reward, environment.steps, environment.eta, epsilon)
        log.episodes.append(record)
        logger.debug(
            f"Episode {episode}: reward={total_reward:.6g} steps={environment.steps} "
            f"eta={environment.eta:.6g} epsilon={epsilon:.4f}"
        )
        if (episode + 1) % 50 == 0:
            logger.info(f"Trained {episode + 1}/{config.episodes} episodes, {update_index} updates")

    return log


@dataclass(frozen=True)
class ReformOutcome:
    initial_eta: float
    best_eta: float
    steps: int
    corrections: np.ndarray
    states: List[UavState]

    @property
    def improved(self) -> bool:
        return self.best_eta < self.initial_eta


def greedy_rollout(
    net: QNetwork,
    scenario: ReformScenario,
    perturbation: Sequence[Perturbation],
    tracking: bool = False,
) -> ReformOutcome:
    """
    Epsilon-zero rollout keeping the corrections with the lowest eta seen.

    With ``tracking`` a step that does not lower eta below the best so far
    is undone and its action is masked out until the next improvement, so
    the rollout walks down the Q ranking instead of cycling between two
    states. It stops early once every action has been masked.
    """
    environment = ReformEnvironment(scenario)
    state = environment.reset(perturbation)
    initial_eta = best_eta = environment.eta
    best_corrections = environment.corrections.copy()
    masked = np.zeros(scenario.action_count, dtype=bool)
    while not environment.done:
        q_values = net.forward(state)
        if tracking:
            q_values = np.where(masked, -np.inf, q_values)
        action = greedy_action(q_values)
        state, _, _ = environment.step(action)
        if environment.eta < best_eta:
            best_eta = environment.eta
            best_corrections = environment.corrections.copy()
            masked[:] = False
        elif tracking:
            masked[action] = True
            state = environment.restore(best_corrections, best_eta)
            if masked.all():
                break
    return ReformOutcome(
        initial_eta=initial_eta,
        best_eta=best_eta,
        steps=environment.steps,
        corrections=best_corrections,
        states=scenario.corrected_states(perturbation, best_corrections),
    )


def propose_corrections(
    net: QNetwork, scenario: ReformScenario, perturbation: Sequence[Perturbation]
) -> List[UavState]:
    """Corrected states from a tracking rollout; never worse than the hovered formation."""
    return greedy_rollout(net, scenario, perturbation, tracking=True).states
