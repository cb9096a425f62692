"""
Hovering Perturbations

Samples the displacement and rotational jitter of hovering UAVs and
applies it to nominal swarm states.
"""

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, GeometryError
from .geometry import RotationAngles, UavState, Vec3

DEFAULT_ANGLE_MAX = math.radians(10.0)
DEFAULT_TOLERANCE_FRACTION = 0.30


@dataclass(frozen=True)
class HoverSpec:
    """Half-widths of the hovering tolerance box."""
    dx_max: float = 0.0
    dy_max: float = 0.0
    dz_max: float = 0.0
    angle_max: float = DEFAULT_ANGLE_MAX
    tolerance_fraction: Optional[float] = None

    def __post_init__(self):
        for name in ("dx_max", "dy_max", "dz_max", "angle_max"):
            if not getattr(self, name) >= 0:
                raise GeometryError(f"{name} must be non-negative")
        if self.tolerance_fraction is not None and not 0.0 <= self.tolerance_fraction <= 1.0:
            raise GeometryError("tolerance_fraction must lie in [0, 1]")

    @classmethod
    def uniform(cls, delta: float, angle_max: float = 0.0) -> "HoverSpec":
        """Same displacement tolerance on every axis."""
        return cls(dx_max=delta, dy_max=delta, dz_max=delta, angle_max=angle_max)

    @classmethod
    def zero(cls) -> "HoverSpec":
        return cls(angle_max=0.0)

    def bounds(self, spacing_delta: Optional[float] = None) -> Tuple[float, float, float]:
        """Displacement half-widths, resolving tolerance_fraction against spacing."""
        if self.tolerance_fraction is None:
            return self.dx_max, self.dy_max, self.dz_max
        if spacing_delta is None:
            raise GeometryError("tolerance_fraction needs the swarm spacing to resolve")
        delta = self.tolerance_fraction * spacing_delta
        return delta, delta, delta

    def resolved(self, spacing_delta: Optional[float]) -> "HoverSpec":
        dx, dy, dz = self.bounds(spacing_delta)
        return replace(self, dx_max=dx, dy_max=dy, dz_max=dz, tolerance_fraction=None)


@dataclass(frozen=True)
class Perturbation:
    """Displacement and rotation offsets of one UAV."""
    displacement: Vec3
    rotation: RotationAngles

    @classmethod
    def zero(cls) -> "Perturbation":
        return cls(Vec3.zero(), RotationAngles())


def sample_perturbation(
    spec: HoverSpec,
    rng: np.random.Generator,
    spacing_delta: Optional[float] = None,
) -> Perturbation:
    """Independent per-axis uniform draw inside the tolerance box."""
    dx, dy, dz = spec.bounds(spacing_delta)
    displacement = rng.uniform(-1.0, 1.0, size=3) * np.array([dx, dy, dz])
    rotation = rng.uniform(-1.0, 1.0, size=3) * spec.angle_max
    return Perturbation(
        displacement=Vec3.from_array(displacement),
        rotation=RotationAngles(*map(float, rotation)),
    )


def sample_perturbations(
    spec: HoverSpec,
    count: int,
    rng: np.random.Generator,
    spacing_delta: Optional[float] = None,
) -> List[Perturbation]:
    """One perturbation per UAV, drawn in UAV order from the same stream."""
    return [sample_perturbation(spec, rng, spacing_delta) for _ in range(count)]


def apply_hover(
    states: Sequence[UavState], perturbations: Sequence[Perturbation]
) -> List[UavState]:
    """Add displacement and rotation offsets; power and phase are untouched."""
    if len(states) != len(perturbations):
        raise DimensionError(
            f"{len(states)} states but {len(perturbations)} perturbations",
            {"states": len(states), "perturbations": len(perturbations)},
        )
    return [
        replace(
            state,
            position=state.position + p.displacement,
            rotation=state.rotation + p.rotation,
        )
        for state, p in zip(states, perturbations)
    ]


def perturbation_array(perturbations: Sequence[Perturbation]) -> np.ndarray:
    """(n, 6) rows of dx, dy, dz, yaw, pitch, roll."""
    return np.array(
        [
            [p.displacement.x, p.displacement.y, p.displacement.z,
             p.rotation.yaw, p.rotation.pitch, p.rotation.roll]
            for p in perturbations
        ],
        dtype=float,
    ).reshape(-1, 6)
