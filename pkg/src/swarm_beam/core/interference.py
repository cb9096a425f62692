"""
Interference Model

Neighboring-network and satellite interference sources, the
subset-dependent SINR used as the selection objective, and interference
heatmaps over a horizontal plane.

Interference seen by a subset is weighted by that subset's relative
pattern gain toward each source, so subsets whose sidelobes point at
strong sources are penalized. Directions are taken from a reference
point of the swarm (its centroid unless given), which keeps them
independent of the subset being scored.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .beampattern import ISOTROPIC, BeamWeights, ElementPattern, element_terms
from .channel import FadingParams, path_loss
from .errors import DegenerateChannelError, DimensionError, GeometryError
from .geometry import UavState, Vec3, centroid, direction_between, unit_vector

logger = logging.getLogger(__name__)

# heatmap cells closer than this to a source are evaluated at this distance
MIN_HEATMAP_DISTANCE = 1e-6


@dataclass(frozen=True)
class Box:
    """Axis-aligned region, corners in meters."""
    lower: Vec3
    upper: Vec3

    def __post_init__(self):
        if self.lower.x > self.upper.x or self.lower.y > self.upper.y or self.lower.z > self.upper.z:
            raise GeometryError("inverted box", {"lower": self.lower, "upper": self.upper})

    def contains(self, point: Vec3) -> bool:
        return (
            self.lower.x <= point.x <= self.upper.x
            and self.lower.y <= point.y <= self.upper.y
            and self.lower.z <= point.z <= self.upper.z
        )


@dataclass(frozen=True)
class InterferenceSource:
    position: Vec3
    power: float

    def __post_init__(self):
        if not self.power >= 0:
            raise GeometryError(f"source power must be non-negative, got {self.power}")


@dataclass(frozen=True)
class InterferenceField:
    """Interference sources plus the receiver noise floor."""
    sources: Tuple[InterferenceSource, ...]
    noise_power: float
    region: Box

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        if not self.noise_power > 0:
            raise GeometryError("noise_power must be positive")
        for source in self.sources:
            if not self.region.contains(source.position):
                raise GeometryError("interference source outside its region", {"source": source})

    def positions(self) -> np.ndarray:
        return np.array([s.position.to_array() for s in self.sources], dtype=float).reshape(-1, 3)

    def powers(self) -> np.ndarray:
        return np.array([s.power for s in self.sources], dtype=float)

    def with_source(self, source: InterferenceSource) -> "InterferenceField":
        return InterferenceField(self.sources + (source,), self.noise_power, self.region)


@dataclass(frozen=True)
class SinrReport:
    signal_power: float
    interference_power: float
    noise_power: float
    sinr_db: float


def sinr_db(signal: float, interference: float, noise: float) -> float:
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(signal / (interference + noise)))


def sample_field(
    region: Box,
    num_sources: int,
    power_range: Tuple[float, float],
    noise_power: float,
    rng: np.random.Generator,
) -> InterferenceField:
    """Sources i.i.d. uniform over the box with i.i.d. uniform powers."""
    if num_sources < 0:
        raise DimensionError("num_sources must be non-negative")
    low, high = power_range
    if low < 0 or low > high:
        raise GeometryError(f"invalid power range {power_range}")
    positions = rng.uniform(region.lower.to_array(), region.upper.to_array(), size=(num_sources, 3))
    powers = rng.uniform(low, high, size=num_sources)
    # keep sampled points inside closed box bounds
    positions = np.clip(positions, region.lower.to_array(), region.upper.to_array())
    sources = tuple(
        InterferenceSource(Vec3.from_array(p), float(w)) for p, w in zip(positions, powers)
    )
    logger.debug(f"Sampled {num_sources} interference sources")
    return InterferenceField(sources, noise_power, region)


def source_directions(field: InterferenceField, reference: Vec3) -> np.ndarray:
    """Unit vectors from the reference point toward every source, shape (J, 3)."""
    return np.array(
        [unit_vector(direction_between(reference, s.position)).to_array() for s in field.sources],
        dtype=float,
    ).reshape(-1, 3)


def weighted_source_powers(field: InterferenceField, receiver: Vec3, params: FadingParams) -> np.ndarray:
    """P_j * pathloss(|source_j - receiver|)."""
    if not field.sources:
        return np.zeros(0)
    distances = np.linalg.norm(field.positions() - receiver.to_array(), axis=1)
    return field.powers() * path_loss(params, distances)


def relative_gains(
    states: Sequence[UavState],
    weights: Sequence[complex],
    directions: np.ndarray,
    anchor: np.ndarray,
    wavelength: float,
    element: ElementPattern = ISOTROPIC,
) -> np.ndarray:
    """|S(u_j)|^2 / |S(anchor)|^2 for the weighted subset pattern S."""
    all_dirs = np.vstack([anchor.reshape(1, 3), directions.reshape(-1, 3)])
    terms = element_terms(states, all_dirs, wavelength, element)
    pattern = (terms * np.asarray(weights, dtype=complex)).sum(axis=-1)
    anchor_power = abs(pattern[0]) ** 2
    if anchor_power == 0.0:
        raise DegenerateChannelError("degenerate channel", {"reason": "null toward receiver"})
    return np.abs(pattern[1:]) ** 2 / anchor_power


def subset_sinr(
    subset_states: Sequence[UavState],
    weights: BeamWeights,
    channel_subset: Sequence[complex],
    receiver: Vec3,
    field: InterferenceField,
    params: FadingParams,
    tx_power: float = 1.0,
    element: ElementPattern = ISOTROPIC,
    reference: Optional[Vec3] = None,
) -> SinrReport:
    """SINR of a beamforming subset with pattern-weighted interference."""
    h = np.asarray(channel_subset, dtype=complex).reshape(-1)
    if not (len(subset_states) == len(weights) == h.size):
        raise DimensionError("subset states, weights and channel differ in length")
    w = weights.coefficients()
    if np.linalg.norm(w) == 0.0:
        raise DegenerateChannelError("degenerate channel", {"reason": "zero weights"})

    signal = tx_power * abs(np.sum(h * w)) ** 2
    interference = 0.0
    if field.sources:
        reference = reference or centroid(subset_states)
        anchor = unit_vector(direction_between(reference, receiver)).to_array()
        gains = relative_gains(
            subset_states, w, source_directions(field, reference), anchor,
            params.wavelength, element,
        )
        # exactly rounded so that an extra source can never lower the total
        interference = math.fsum(weighted_source_powers(field, receiver, params) * gains)
    return SinrReport(
        signal_power=float(signal),
        interference_power=interference,
        noise_power=field.noise_power,
        sinr_db=sinr_db(signal, interference, field.noise_power),
    )


@dataclass(frozen=True)
class Heatmap:
    """Interference plus noise level in dB on a horizontal plane; values indexed [ix, iy]."""
    xs: np.ndarray
    ys: np.ndarray
    plane_z: float
    values_db: np.ndarray


def interference_power_at(field: InterferenceField, points: np.ndarray, params: FadingParams) -> np.ndarray:
    """Total received interference plus noise (watts) at (..., 3) points."""
    points = np.asarray(points, dtype=float)
    total = np.full(points.shape[:-1], field.noise_power)
    for source in field.sources:
        distance = np.linalg.norm(points - source.position.to_array(), axis=-1)
        total = total + source.power * path_loss(params, np.maximum(distance, MIN_HEATMAP_DISTANCE))
    return total


def heatmap(
    field: InterferenceField,
    plane_z: float,
    grid: Tuple[int, int],
    params: FadingParams,
) -> Heatmap:
    """10 log10(sum P_j pathloss + noise) at the cell centres of the region's x/y extent."""
    nx, ny = grid
    if nx < 1 or ny < 1:
        raise DimensionError("heatmap grid dimensions must be at least 1")
    xs = _cell_centres(field.region.lower.x, field.region.upper.x, nx)
    ys = _cell_centres(field.region.lower.y, field.region.upper.y, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    points = np.stack([gx, gy, np.full_like(gx, plane_z)], axis=-1)
    values = 10.0 * np.log10(interference_power_at(field, points, params))
    return Heatmap(xs, ys, plane_z, values)


def _cell_centres(lower: float, upper: float, count: int) -> np.ndarray:
    step = (upper - lower) / count
    return lower + step * (np.arange(count) + 0.5)


def field_from_sources(
    positions: Sequence[Vec3], powers: Sequence[float], noise_power: float, region: Optional[Box] = None
) -> InterferenceField:
    """Build a field from explicit sources, defaulting the region to their bounding box."""
    sources = [InterferenceSource(p, float(w)) for p, w in zip(positions, powers)]
    if region is None:
        if sources:
            stack = np.array([p.to_array() for p in positions])
            region = Box(Vec3.from_array(stack.min(axis=0)), Vec3.from_array(stack.max(axis=0)))
        else:
            region = Box(Vec3.zero(), Vec3.zero())
    return InterferenceField(tuple(sources), noise_power, region)
