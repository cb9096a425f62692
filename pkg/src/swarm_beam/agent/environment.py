"""
Beam Reforming Environment

Episodic environment in which an agent nudges the positions and phases of
the selected UAVs, one step at a time, until the hovered beam matches the
nominal one again.

Actions are indexed 8 * k + 2 * control + sign where k is the UAV,
control is 0..3 for x, y, z and phase, and sign 0 is a positive step and
1 a negative one. The observed state is the per-UAV residual displacement
(in units of the grid spacing), the residual rotation (in units of the
hover angle bound) and the current distortion eta.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.beampattern import (
    ISOTROPIC,
    AngularGrid,
    BeamWeights,
    ElementPattern,
    distortion_metric,
    pattern_energy,
)
from ..core.errors import DimensionError, InvalidActionError, SwarmBeamError
from ..core.geometry import UavState, Vec3
from ..core.hover import HoverSpec, Perturbation, perturbation_array, sample_perturbations

logger = logging.getLogger(__name__)

CONTROLS = ("x", "y", "z", "phase")
ACTIONS_PER_UAV = 2 * len(CONTROLS)
DEFAULT_PHASE_STEP = math.pi / 64


@dataclass(frozen=True)
class Action:
    uav: int
    control: str
    sign: int


def decode_action(action: int, uav_count: int) -> Action:
    if not 0 <= action < ACTIONS_PER_UAV * uav_count:
        raise InvalidActionError(
            f"action {action} outside [0, {ACTIONS_PER_UAV * uav_count})", {"action": action}
        )
    uav, rest = divmod(int(action), ACTIONS_PER_UAV)
    control, sign_bit = divmod(rest, 2)
    return Action(uav, CONTROLS[control], -1 if sign_bit else 1)


def encode_action(uav: int, control: str, sign: int) -> int:
    return ACTIONS_PER_UAV * uav + 2 * CONTROLS.index(control) + (0 if sign > 0 else 1)


@dataclass(frozen=True)
class ReformScenario:
    """The selected subset, its beam and everything an episode needs to score corrections."""
    nominal: Tuple[UavState, ...]
    weights: BeamWeights
    grid: AngularGrid
    wavelength: float
    hover: HoverSpec
    spacing_delta: float
    element: ElementPattern = ISOTROPIC
    eta_threshold: float = 0.0
    max_steps: int = 50
    position_step: Optional[float] = None
    phase_step: float = DEFAULT_PHASE_STEP
    terminal_bonus: float = 1.0
    energy: float = field(default=0.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nominal", tuple(self.nominal))
        if not self.nominal:
            raise DimensionError("reform scenario needs at least one UAV")
        if len(self.weights) != len(self.nominal):
            raise DimensionError("one beam weight per selected UAV is required")
        if not self.spacing_delta > 0:
            raise DimensionError("spacing_delta must be positive")
        if self.max_steps < 1:
            raise DimensionError("max_steps must be at least 1")
        if self.eta_threshold < 0:
            raise DimensionError("eta_threshold must be non-negative")
        if self.position_step is None:
            object.__setattr__(self, "position_step", self.spacing_delta / 100.0)
        object.__setattr__(self, "hover", self.hover.resolved(self.spacing_delta))
        if self.energy <= 0:
            energy = pattern_energy(
                self.nominal, self.weights, self.grid, self.wavelength, self.element
            )
            object.__setattr__(self, "energy", energy)

    @property
    def size(self) -> int:
        return len(self.nominal)

    @property
    def action_count(self) -> int:
        return ACTIONS_PER_UAV * self.size

    @property
    def state_size(self) -> int:
        return 6 * self.size + 1

    def with_threshold(self, eta_threshold: float) -> "ReformScenario":
        return replace(self, eta_threshold=eta_threshold)

    def sample_perturbation(self, rng: np.random.Generator) -> List[Perturbation]:
        return sample_perturbations(self.hover, self.size, rng)

    def corrected_states(
        self, perturbation: Sequence[Perturbation], corrections: np.ndarray
    ) -> List[UavState]:
        """Nominal states moved by the residual (hover plus correction) and phase-shifted."""
        residual = self.residual_displacement(perturbation, corrections)
        return [
            replace(
                state,
                position=state.position + Vec3.from_array(residual[k]),
                rotation=state.rotation + p.rotation,
                phase=state.phase + float(corrections[k, 3]),
            )
            for k, (state, p) in enumerate(zip(self.nominal, perturbation))
        ]

    def residual_displacement(
        self, perturbation: Sequence[Perturbation], corrections: np.ndarray
    ) -> np.ndarray:
        if len(perturbation) != self.size:
            raise DimensionError(f"{len(perturbation)} perturbations for {self.size} UAVs")
        return perturbation_array(perturbation)[:, :3] + corrections[:, :3]

    def distortion(self, perturbation: Sequence[Perturbation], corrections: np.ndarray) -> float:
        """eta of the corrected subset against the nominal beam."""
        return distortion_metric(
            self.nominal,
            self.corrected_states(perturbation, corrections),
            self.weights,
            None,
            self.grid,
            self.wavelength,
            self.element,
            energy=self.energy,
        )


class ReformEnvironment:
    """Holds the episode's perturbation and the corrections accumulated so far."""

    def __init__(self, scenario: ReformScenario):
        self.scenario = scenario
        self.perturbation: List[Perturbation] = []
        self.corrections = np.zeros((scenario.size, 4))
        self.eta = 0.0
        self.steps = 0
        self.reached = False
        self.done = True

    def reset(self, perturbation: Sequence[Perturbation]) -> np.ndarray:
        """Start an episode from the given hover draw; returns the initial state."""
        if len(perturbation) != self.scenario.size:
            raise DimensionError(f"{len(perturbation)} perturbations for {self.scenario.size} UAVs")
        self.perturbation = list(perturbation)
        self.corrections = np.zeros((self.scenario.size, 4))
        self.eta = self.scenario.distortion(self.perturbation, self.corrections)
        self.steps = 0
        self.reached = self.eta <= self.scenario.eta_threshold
        self.done = self.reached
        return self.observe()

    def observe(self) -> np.ndarray:
        scenario = self.scenario
        residual = scenario.residual_displacement(self.perturbation, self.corrections)
        rotations = perturbation_array(self.perturbation)[:, 3:]
        angle_max = scenario.hover.angle_max
        rotation_part = rotations / angle_max if angle_max > 0 else np.zeros_like(rotations)
        return np.concatenate([
            (residual / scenario.spacing_delta).ravel(),
            rotation_part.ravel(),
            [self.eta],
        ])

    def step(self, action: int) -> Tuple[np.ndarray, float, bool]:
        """Apply one correction step; returns (next_state, reward, done)."""
        if self.done:
            raise SwarmBeamError("episode already finished", {"steps": self.steps})
        decoded = decode_action(action, self.scenario.size)
        control = CONTROLS.index(decoded.control)
        step = self.scenario.phase_step if decoded.control == "phase" else self.scenario.position_step
        self.corrections[decoded.uav, control] += decoded.sign * step

        eta_before = self.eta
        self.eta = self.scenario.distortion(self.perturbation, self.corrections)
        self.steps += 1
        self.reached = self.eta <= self.scenario.eta_threshold
        self.done = self.reached or self.steps >= self.scenario.max_steps
        reward = eta_before - self.eta
        if self.reached:
            reward += self.scenario.terminal_bonus
        return self.observe(), reward, self.done

    def restore(self, corrections: np.ndarray, eta: Optional[float] = None) -> np.ndarray:
        """Roll the corrections back without refunding the steps already spent."""
        if not self.perturbation:
            raise SwarmBeamError("restore before reset")
        corrections = np.asarray(corrections, dtype=float)
        if corrections.shape != self.corrections.shape:
            raise DimensionError(f"corrections must have shape {self.corrections.shape}")
        self.corrections = corrections.copy()
        if eta is None:
            eta = self.scenario.distortion(self.perturbation, self.corrections)
        self.eta = float(eta)
        self.reached = self.eta <= self.scenario.eta_threshold
        self.done = self.reached or self.steps >= self.scenario.max_steps
        return self.observe()

    def corrected_states(self) -> List[UavState]:
        return self.scenario.corrected_states(self.perturbation, self.corrections)


def env_step(environment: ReformEnvironment, action: int) -> Tuple[np.ndarray, float, bool]:
    return environment.step(action)


def calibrate_threshold(
    scenario: ReformScenario,
    num_draws: int,
    quantile: float,
    rng: np.random.Generator,
) -> float:
    """
    Distortion threshold from uncorrected hover draws.

    Draws ``num_draws`` perturbations, sorts their eta ascending and
    returns the requested quantile (linear interpolation between order
    statistics, so quantile 0 is the smallest draw).
    """
    if num_draws < 2:
        raise DimensionError("calibration needs at least two draws")
    if not 0.0 <= quantile <= 1.0:
        raise DimensionError(f"quantile must lie in [0, 1], got {quantile}")
    zero = np.zeros((scenario.size, 4))
    etas = np.sort([
        scenario.distortion(scenario.sample_perturbation(rng), zero)
        for _ in range(num_draws)
    ])
    threshold = float(np.quantile(etas, quantile))
    logger.info(
        f"Calibrated eta threshold {threshold:.6g} at quantile {quantile} "
        f"(median {float(np.median(etas)):.6g})"
    )
    return threshold
