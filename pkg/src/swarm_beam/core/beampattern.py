"""
Collaborative Beam Pattern

Ideal and distorted array factors of a UAV subset, the distortion
objective J and its normalized form eta, steering phases, and the
angle/pitch/roll/displacement sweeps built on them.

Every UAV contributes P_k * w_k * g_k(d) * exp(j(zeta_k + phase_k + (2 pi / lambda) r_k . u(d)))
where zeta_k comes from the beam weights, phase_k is the UAV's own
transmit phase offset and g_k is the element gain of its rotated antenna.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, GeometryError
from .geometry import (
    Direction,
    RotationAngles,
    UavState,
    Vec3,
    centroid,
    direction_between,
    positions_array,
    rotation_matrices,
    rotations_array,
    unit_vector,
    unit_vectors,
)
from .hover import HoverSpec, apply_hover, sample_perturbations

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BeamWeights:
    """Per-UAV amplitude w_k and phase zeta_k."""
    amplitudes: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=float).reshape(-1)
        phases = np.asarray(self.phases, dtype=float).reshape(-1)
        if amplitudes.shape != phases.shape:
            raise DimensionError("amplitudes and phases differ in length")
        if np.any(amplitudes < 0):
            raise DimensionError("amplitudes must be non-negative")
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "phases", phases)

    def __len__(self) -> int:
        return self.amplitudes.size

    @classmethod
    def unit(cls, count: int, phases: Optional[Sequence[float]] = None) -> "BeamWeights":
        return cls(np.ones(count), np.zeros(count) if phases is None else phases)

    @classmethod
    def from_complex(cls, weights: Sequence[complex]) -> "BeamWeights":
        """Split complex weights (for instance MRT output) into amplitude and phase."""
        weights = np.asarray(weights, dtype=complex)
        return cls(np.abs(weights), np.angle(weights))

    def coefficients(self, phase_error: Optional[np.ndarray] = None) -> np.ndarray:
        phases = self.phases if phase_error is None else self.phases + phase_error
        return self.amplitudes * np.exp(1j * phases)


@dataclass(frozen=True)
class ElementPattern:
    """cos^q element gain around a body-frame boresight."""
    exponent_q: float = 2.0
    boresight_body: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 1.0))

    def __post_init__(self):
        if not self.exponent_q >= 0:
            raise GeometryError("exponent_q must be non-negative")
        if abs(self.boresight_body.norm() - 1.0) > 1e-9:
            raise GeometryError("boresight_body must be a unit vector")

    @classmethod
    def isotropic(cls) -> "ElementPattern":
        return cls(exponent_q=0.0)

    @property
    def is_isotropic(self) -> bool:
        return self.exponent_q == 0.0


ISOTROPIC = ElementPattern.isotropic()


@dataclass(frozen=True)
class AngularGrid:
    thetas: np.ndarray
    phis: np.ndarray

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=float).reshape(-1)
        phis = np.asarray(self.phis, dtype=float).reshape(-1)
        for name, values in (("thetas", thetas), ("phis", phis)):
            if values.size == 0:
                raise DimensionError(f"angular grid has no {name}")
            if np.any(np.diff(values) <= 0):
                raise DimensionError(f"{name} must be strictly increasing")
            if values[0] < -math.pi or values[-1] > math.pi:
                raise DimensionError(f"{name} must lie in [-pi, pi]")
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "phis", phis)

    @classmethod
    def midpoint(cls, size: int, phi_size: Optional[int] = None) -> "AngularGrid":
        """Cell centres of a uniform size x size partition of [-pi, pi]^2."""
        return cls(_midpoints(size), _midpoints(phi_size or size))

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.thetas, self.phis, indexing="ij")

    def cell_areas(self) -> np.ndarray:
        return np.outer(_cell_widths(self.thetas), _cell_widths(self.phis))


def _midpoints(size: int) -> np.ndarray:
    if size < 1:
        raise DimensionError("grid size must be at least 1")
    step = TWO_PI / size
    return -math.pi + step * (np.arange(size) + 0.5)


def _cell_widths(points: np.ndarray) -> np.ndarray:
    if points.size == 1:
        return np.array([TWO_PI])
    middle = 0.5 * (points[1:] + points[:-1])
    first = max(-math.pi, points[0] - (middle[0] - points[0]))
    last = min(math.pi, points[-1] + (points[-1] - middle[-1]))
    return np.diff(np.concatenate(([first], middle, [last])))


@dataclass(frozen=True)
class PatternSample:
    direction: Direction
    magnitude: float
    phase: float


def element_gains(
    rotations: np.ndarray, directions: np.ndarray, element: ElementPattern
) -> np.ndarray:
    """g_k(d) = max(0, cos alpha_k)^q for directions (..., 3) and rotations (K, 3)."""
    if element.is_isotropic:
        return np.ones(directions.shape[:-1] + (rotations.shape[0],))
    boresights = rotation_matrices(rotations) @ element.boresight_body.to_array()
    cosines = directions @ boresights.T
    return np.maximum(cosines, 0.0) ** element.exponent_q


def element_terms(
    states: Sequence[UavState],
    directions: np.ndarray,
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
) -> np.ndarray:
    """Per-UAV contribution before beam weights, shape directions.shape[:-1] + (K,)."""
    if wavelength <= 0:
        raise GeometryError("wavelength must be positive")
    positions = positions_array(states)
    powers = np.array([s.power for s in states], dtype=float)
    offsets = np.array([s.phase for s in states], dtype=float)
    path_phase = (TWO_PI / wavelength) * (directions @ positions.T)
    gains = element_gains(rotations_array(states), directions, element)
    return powers * gains * np.exp(1j * (offsets + path_phase))


def pattern_values(
    states: Sequence[UavState],
    weights: BeamWeights,
    thetas,
    phis,
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
    phase_error: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Complex beam sum S evaluated at broadcast (theta, phi) arrays."""
    if len(states) != len(weights):
        raise DimensionError(f"{len(states)} UAVs but {len(weights)} weights")
    error = None
    if phase_error is not None:
        error = np.asarray(phase_error, dtype=float).reshape(-1)
        if error.size != len(states):
            raise DimensionError("phase_error length differs from UAV count")
    thetas, phis = np.broadcast_arrays(np.asarray(thetas, float), np.asarray(phis, float))
    terms = element_terms(states, unit_vectors(thetas, phis), wavelength, element)
    return (terms * weights.coefficients(error)).sum(axis=-1)


def _sample(direction: Direction, value: complex) -> PatternSample:
    return PatternSample(direction=direction, magnitude=float(abs(value)), phase=float(np.angle(value)))


def array_factor(
    uavs: Sequence[UavState],
    weights: BeamWeights,
    d: Direction,
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
) -> PatternSample:
    value = pattern_values(uavs, weights, d.theta, d.phi, wavelength, element)
    return _sample(d, complex(value))


def steering_direction(uavs: Sequence[UavState], receiver: Vec3) -> Direction:
    """Direction from the swarm centroid toward the receiver."""
    return direction_between(centroid(uavs), receiver)


def steering_phases(uavs: Sequence[UavState], receiver: Vec3, wavelength: float) -> np.ndarray:
    """Phases zeta_k that cancel the path phase toward the receiver, in [0, 2 pi)."""
    for state in uavs:
        if state.position == receiver:
            raise GeometryError("degenerate direction", {"receiver": receiver})
    u = unit_vector(steering_direction(uavs, receiver)).to_array()
    path_phase = (TWO_PI / wavelength) * (positions_array(uavs) @ u)
    return np.mod(-path_phase, TWO_PI)


def distorted_array_factor(
    nominal: Sequence[UavState],
    perturbed: Sequence[UavState],
    weights: BeamWeights,
    d: Direction,
    angle_error: Tuple[float, float],
    phase_error: Optional[Sequence[float]],
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
) -> PatternSample:
    """Beam sum with hatted positions, rotations, phases and look angles."""
    if len(nominal) != len(perturbed):
        raise DimensionError("nominal and perturbed swarms differ in size")
    d_hat = Direction(d.theta + angle_error[0], d.phi + angle_error[1])
    value = pattern_values(
        perturbed, weights, d_hat.theta, d_hat.phi, wavelength, element, phase_error
    )
    return _sample(d_hat, complex(value))


def pattern_energy(
    states: Sequence[UavState],
    weights: BeamWeights,
    grid: AngularGrid,
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
) -> float:
    """Quarter of the integral of |B|^2 over the grid."""
    thetas, phis = grid.mesh()
    magnitude = np.abs(pattern_values(states, weights, thetas, phis, wavelength, element))
    return 0.25 * float(np.sum(magnitude ** 2 * grid.cell_areas()))


def distortion_objective(
    nominal: Sequence[UavState],
    perturbed: Sequence[UavState],
    weights: BeamWeights,
    phase_error: Optional[Sequence[float]],
    grid: AngularGrid,
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
) -> float:
    """Midpoint-rule J = 1/4 * sum |B - B_hat|^2 dtheta dphi over the grid."""
    if len(nominal) != len(perturbed):
        raise DimensionError("nominal and perturbed swarms differ in size")
    thetas, phis = grid.mesh()
    ideal = np.abs(pattern_values(nominal, weights, thetas, phis, wavelength, element))
    distorted = np.abs(
        pattern_values(perturbed, weights, thetas, phis, wavelength, element, phase_error)
    )
    return 0.25 * float(np.sum((ideal - distorted) ** 2 * grid.cell_areas()))


def distortion_metric(
    nominal: Sequence[UavState],
    perturbed: Sequence[UavState],
    weights: BeamWeights,
    phase_error: Optional[Sequence[float]],
    grid: AngularGrid,
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
    energy: Optional[float] = None,
) -> float:
    """eta = J / (1/4 * integral |B|^2); pass energy to skip recomputing the ideal beam."""
    if energy is None:
        energy = pattern_energy(nominal, weights, grid, wavelength, element)
    if energy <= 0:
        raise GeometryError("ideal beam carries no energy")
    objective = distortion_objective(
        nominal, perturbed, weights, phase_error, grid, wavelength, element
    )
    return objective / energy


def aoa_sweep(
    uavs: Sequence[UavState],
    weights: BeamWeights,
    phi_fixed: float,
    theta_grid: Sequence[float],
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
) -> List[PatternSample]:
    """Pattern cut at fixed azimuth, magnitudes normalized to the cut maximum."""
    thetas = np.asarray(theta_grid, dtype=float)
    if thetas.size == 0:
        raise DimensionError("theta grid is empty")
    values = pattern_values(uavs, weights, thetas, phi_fixed, wavelength, element)
    magnitudes = np.abs(values)
    peak = magnitudes.max()
    if peak > 0:
        magnitudes = magnitudes / peak
    return [
        PatternSample(Direction(float(t), phi_fixed), float(m), float(np.angle(v)))
        for t, m, v in zip(thetas, magnitudes, values)
    ]


def main_lobe_width(angles: Sequence[float], magnitudes: Sequence[float], level_db: float = -3.0) -> float:
    """Width of the lobe around the global peak where 20 log10(m / peak) stays above level_db."""
    angles = np.asarray(angles, dtype=float)
    magnitudes = np.asarray(magnitudes, dtype=float)
    peak_index = int(np.argmax(magnitudes))
    level = magnitudes[peak_index] * 10.0 ** (level_db / 20.0)

    def crossing(step: int) -> float:
        i = peak_index
        while 0 <= i + step < magnitudes.size and magnitudes[i + step] >= level:
            i += step
        j = i + step
        if not 0 <= j < magnitudes.size:
            return float(angles[i])
        # interpolate between the last sample above and the first below
        fraction = (magnitudes[i] - level) / (magnitudes[i] - magnitudes[j])
        return float(angles[i] + fraction * (angles[j] - angles[i]))

    return abs(crossing(1) - crossing(-1))


def count_sidelobes(magnitudes: Sequence[float], threshold_db: float = -10.0) -> int:
    """Interior local maxima above threshold_db relative to the peak, excluding the peak itself."""
    m = np.asarray(magnitudes, dtype=float)
    if m.size < 3:
        return 0
    peak_index = int(np.argmax(m))
    level = m[peak_index] * 10.0 ** (threshold_db / 20.0)
    interior = np.arange(1, m.size - 1)
    is_peak = (m[interior] > m[interior - 1]) & (m[interior] >= m[interior + 1])
    candidates = interior[is_peak & (m[interior] >= level)]
    return int(np.count_nonzero(candidates != peak_index))


@dataclass(frozen=True)
class HoverMap:
    """Received power and phase over a pitch x roll grid."""
    pitches: np.ndarray
    rolls: np.ndarray
    power_db: np.ndarray
    phase_rad: np.ndarray


def hover_power_phase_map(
    uavs: Sequence[UavState],
    weights: BeamWeights,
    receiver: Vec3,
    pitch_grid: Sequence[float],
    roll_grid: Sequence[float],
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
    yaw: float = 0.0,
) -> HoverMap:
    """Rotate every UAV by (yaw, pitch, roll) and record the beam toward the receiver."""
    d = steering_direction(uavs, receiver)
    pitches = np.asarray(pitch_grid, dtype=float)
    rolls = np.asarray(roll_grid, dtype=float)
    power = np.empty((pitches.size, rolls.size))
    phase = np.empty((pitches.size, rolls.size))
    for i, pitch in enumerate(pitches):
        for j, roll in enumerate(rolls):
            offset = RotationAngles(yaw, float(pitch), float(roll))
            rotated = [
                UavState(s.position, s.rotation + offset, s.power, s.phase) for s in uavs
            ]
            sample = distorted_array_factor(
                uavs, rotated, weights, d, (0.0, 0.0), None, wavelength, element
            )
            with np.errstate(divide="ignore"):
                power[i, j] = 20.0 * np.log10(sample.magnitude)
            phase[i, j] = sample.phase
    logger.debug(f"Hover map of {pitches.size}x{rolls.size} cells toward {receiver}")
    return HoverMap(pitches, rolls, power, phase)


@dataclass(frozen=True)
class DisplacementCut:
    """Ideal and hovered pattern cut for one displacement tolerance."""
    tolerance: float
    thetas: np.ndarray
    ideal_db: np.ndarray
    distorted_db: np.ndarray
    distorted_phase: np.ndarray


def displacement_pattern_sweep(
    uavs: Sequence[UavState],
    weights: BeamWeights,
    tolerances: Sequence[float],
    phi_fixed: float,
    theta_grid: Sequence[float],
    wavelength: float,
    rng: np.random.Generator,
    element: ElementPattern = ISOTROPIC,
) -> List[DisplacementCut]:
    """One hover draw per tolerance, compared against the ideal cut (normalized to its peak)."""
    thetas = np.asarray(theta_grid, dtype=float)
    ideal = np.abs(pattern_values(uavs, weights, thetas, phi_fixed, wavelength, element))
    reference = ideal.max() if ideal.max() > 0 else 1.0
    cuts = []
    for tolerance in tolerances:
        spec = HoverSpec.uniform(float(tolerance))
        hovered = apply_hover(uavs, sample_perturbations(spec, len(uavs), rng))
        values = pattern_values(hovered, weights, thetas, phi_fixed, wavelength, element)
        with np.errstate(divide="ignore"):
            cuts.append(DisplacementCut(
                tolerance=float(tolerance),
                thetas=thetas,
                ideal_db=20.0 * np.log10(ideal / reference),
                distorted_db=20.0 * np.log10(np.abs(values) / reference),
                distorted_phase=np.angle(values),
            ))
    return cuts


def beam_misalignment(
    states: Sequence[UavState],
    weights: BeamWeights,
    intended: Direction,
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
    span: float = math.radians(5.0),
    resolution: int = 81,
) -> float:
    """Angle between the intended direction and the beam peak found in a local window."""
    offsets = np.linspace(-span, span, resolution)
    thetas, phis = np.meshgrid(intended.theta + offsets, intended.phi + offsets, indexing="ij")
    magnitude = np.abs(pattern_values(states, weights, thetas, phis, wavelength, element))
    peak = np.unravel_index(int(np.argmax(magnitude)), magnitude.shape)
    found = unit_vectors(thetas[peak], phis[peak])
    target = unit_vector(intended).to_array()
    return float(math.acos(min(1.0, max(-1.0, float(found @ target)))))
