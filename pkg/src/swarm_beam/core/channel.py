"""
Channel Model

Rician air-to-ground channel gains (the CQI vector), maximum ratio
transmission weights and the distance/fading correlation analysis.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import pearsonr

from .errors import DegenerateChannelError, DimensionError, UndefinedCorrelationError
from .geometry import UavState, Vec3, positions_array
from .hover import HoverSpec, apply_hover, sample_perturbations

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299_792_458.0


def wavelength(carrier_freq: float) -> float:
    return SPEED_OF_LIGHT / carrier_freq


@dataclass(frozen=True)
class FadingParams:
    """Large- and small-scale fading parameters."""
    rician_k: float = 5.0
    pathloss_exponent: float = 2.2
    reference_gain: float = 1.0
    carrier_freq: float = 3.5e9

    def __post_init__(self):
        if not self.rician_k >= 0:
            raise ValueError("rician_k must be non-negative")
        if not self.pathloss_exponent > 0:
            raise ValueError("pathloss_exponent must be positive")
        if not self.reference_gain > 0:
            raise ValueError("reference_gain must be positive")
        if not self.carrier_freq > 0:
            raise ValueError("carrier_freq must be positive")

    @property
    def wavelength(self) -> float:
        return wavelength(self.carrier_freq)


@dataclass(frozen=True)
class ChannelRealization:
    """Complex gain of every UAV toward the receiver at sample t."""
    gains: np.ndarray
    timestamp: int = 0

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(gains)):
            raise DegenerateChannelError("non-finite channel gain")
        object.__setattr__(self, "gains", gains)

    def __len__(self) -> int:
        return self.gains.size

    def subset(self, indices: Sequence[int]) -> np.ndarray:
        """Gains for zero-based UAV indices."""
        return self.gains[np.asarray(indices, dtype=int)]


def path_loss(params: FadingParams, distance) -> np.ndarray:
    """Power gain reference_gain * d^-n; distances must be positive."""
    distance = np.asarray(distance, dtype=float)
    if np.any(distance <= 0):
        raise DegenerateChannelError("zero link distance")
    return params.reference_gain * distance ** (-params.pathloss_exponent)


def _rician_gains(
    distances: np.ndarray, params: FadingParams, rng: Optional[np.random.Generator]
) -> np.ndarray:
    amplitude = np.sqrt(path_loss(params, distances))
    los = np.exp(-2j * np.pi * distances / params.wavelength)
    if math.isinf(params.rician_k):
        return amplitude * los
    scatter = (rng.standard_normal(distances.shape) + 1j * rng.standard_normal(distances.shape))
    scatter /= math.sqrt(2.0)
    k = params.rician_k
    return amplitude * (math.sqrt(k / (k + 1.0)) * los + math.sqrt(1.0 / (k + 1.0)) * scatter)


def sample_channel(
    uavs: Sequence[UavState],
    receiver: Vec3,
    params: FadingParams,
    rng: np.random.Generator,
    timestamp: int = 0,
) -> ChannelRealization:
    """One Rician draw per UAV toward the receiver."""
    distances = np.linalg.norm(positions_array(uavs) - receiver.to_array(), axis=1)
    return ChannelRealization(_rician_gains(distances, params, rng), timestamp)


def mrt_weights(h_subset: Sequence[complex]) -> np.ndarray:
    """Unit-norm conjugate weights w = h^H / ||h||."""
    h = np.asarray(h_subset, dtype=complex).reshape(-1)
    norm = np.linalg.norm(h)
    if h.size == 0 or norm == 0.0:
        raise DegenerateChannelError("degenerate channel")
    return np.conj(h) / norm


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionError("pearson inputs must be equal-length 1-D series")
    if x.size < 2:
        raise DimensionError("pearson needs at least two samples")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise UndefinedCorrelationError("undefined correlation")
    return float(pearsonr(x, y)[0])


def sample_channel_series(
    uavs: Sequence[UavState],
    receiver: Vec3,
    params: FadingParams,
    num_time_samples: int,
    rng: np.random.Generator,
    hover: Optional[HoverSpec] = None,
    spacing_delta: Optional[float] = None,
) -> np.ndarray:
    """(num_time_samples, N) complex gains, re-hovering the swarm before each draw."""
    series = np.empty((num_time_samples, len(uavs)), dtype=complex)
    for t in range(num_time_samples):
        states = uavs
        if hover is not None:
            states = apply_hover(uavs, sample_perturbations(hover, len(uavs), rng, spacing_delta))
        series[t] = sample_channel(states, receiver, params, rng, timestamp=t).gains
    return series


def distance_fading_correlation(
    reference_uav: int,
    uavs: Sequence[UavState],
    receiver: Vec3,
    params: FadingParams,
    num_time_samples: int,
    rng: np.random.Generator,
    hover: Optional[HoverSpec] = None,
    spacing_delta: Optional[float] = None,
) -> List[Tuple[float, float]]:
    """
    Relative distance and amplitude correlation of the reference UAV with every other UAV.

    Correlation is computed on |h| time series. Pairs are returned in UAV index
    order, skipping the reference itself.
    """
    if len(uavs) < 2:
        raise DimensionError("correlation analysis needs at least two UAVs")
    if num_time_samples < 2:
        raise DimensionError("correlation analysis needs at least two time samples")
    if not 0 <= reference_uav < len(uavs):
        raise DimensionError(f"reference UAV {reference_uav} out of range")

    amplitudes = np.abs(
        sample_channel_series(uavs, receiver, params, num_time_samples, rng, hover, spacing_delta)
    )
    positions = positions_array(uavs)
    results = []
    for j in range(len(uavs)):
        if j == reference_uav:
            continue
        distance = float(np.linalg.norm(positions[reference_uav] - positions[j]))
        results.append((distance, pearson(amplitudes[:, reference_uav], amplitudes[:, j])))
    logger.debug(f"Computed {len(results)} fading correlations over {num_time_samples} samples")
    return results
