"""
Swarm Geometry

Positions, directions and rigid-body rotations shared by every other
module. Angles are radians, distances are meters.
"""

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import GeometryError


def wrap_angle(angle: float) -> float:
    """Map an angle into (-pi, pi]; values already inside are returned untouched."""
    if -math.pi < angle <= math.pi:
        return angle
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class Vec3:
    """Point or vector in meters."""
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise GeometryError(f"non-finite vector ({self.x}, {self.y}, {self.z})")

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, scale: float) -> "Vec3":
        return Vec3(self.x * scale, self.y * scale, self.z * scale)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "Vec3":
        return cls(float(values[0]), float(values[1]), float(values[2]))

    @classmethod
    def zero(cls) -> "Vec3":
        return cls(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Direction:
    """Polar angle theta (from +Z) and azimuth phi."""
    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise GeometryError(f"non-finite direction ({self.theta}, {self.phi})")
        object.__setattr__(self, "theta", wrap_angle(self.theta))
        object.__setattr__(self, "phi", wrap_angle(self.phi))


@dataclass(frozen=True)
class RotationAngles:
    """Yaw, pitch and roll of a UAV body frame."""
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def __post_init__(self):
        for name in ("yaw", "pitch", "roll"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise GeometryError(f"non-finite {name} angle: {value}")
            object.__setattr__(self, name, wrap_angle(value))

    def __add__(self, other: "RotationAngles") -> "RotationAngles":
        return RotationAngles(self.yaw + other.yaw, self.pitch + other.pitch, self.roll + other.roll)

    def to_array(self) -> np.ndarray:
        return np.array([self.yaw, self.pitch, self.roll], dtype=float)

    def is_zero(self) -> bool:
        return self.yaw == 0.0 and self.pitch == 0.0 and self.roll == 0.0


@dataclass(frozen=True)
class SwarmLayout:
    """Rectangular 3D arrangement of the swarm."""
    l_u: int
    c_u: int
    r_u: int
    spacing_delta: float
    origin: Vec3 = field(default_factory=Vec3.zero)

    def __post_init__(self):
        for name in ("l_u", "c_u", "r_u"):
            if int(getattr(self, name)) < 1:
                raise GeometryError(f"{name} must be a positive integer")
        if not self.spacing_delta > 0:
            raise GeometryError(f"spacing_delta must be positive, got {self.spacing_delta}")

    @property
    def size(self) -> int:
        return self.l_u * self.c_u * self.r_u


@dataclass(frozen=True)
class UavState:
    """Pose and transmit parameters of one UAV."""
    position: Vec3
    rotation: RotationAngles = field(default_factory=RotationAngles)
    power: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if not self.power >= 0:
            raise GeometryError(f"power must be non-negative, got {self.power}")
        if not math.isfinite(self.phase):
            raise GeometryError(f"non-finite phase: {self.phase}")


def build_grid_layout(layout: SwarmLayout) -> List[UavState]:
    """UAVs at origin + delta*(i, j, k), X index fastest, then Y, then Z."""
    delta = layout.spacing_delta
    states = []
    for k in range(layout.r_u):
        for j in range(layout.c_u):
            for i in range(layout.l_u):
                offset = Vec3(i * delta, j * delta, k * delta)
                states.append(UavState(position=layout.origin + offset))
    return states


def direction_between(source: Vec3, target: Vec3) -> Direction:
    """Direction of the ray from source towards target."""
    delta = target - source
    distance = delta.norm()
    if distance == 0.0:
        raise GeometryError("degenerate direction", {"point": (source.x, source.y, source.z)})
    cos_theta = min(1.0, max(-1.0, delta.z / distance))
    return Direction(theta=math.acos(cos_theta), phi=math.atan2(delta.y, delta.x))


def unit_vector(direction: Direction) -> Vec3:
    sin_theta = math.sin(direction.theta)
    return Vec3(
        math.cos(direction.phi) * sin_theta,
        math.sin(direction.phi) * sin_theta,
        math.cos(direction.theta),
    )


def unit_vectors(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Vectorized unit_vector; output has shape thetas.shape + (3,)."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    sin_theta = np.sin(thetas)
    return np.stack([np.cos(phis) * sin_theta, np.sin(phis) * sin_theta, np.cos(thetas)], axis=-1)


def rotation_matrix(angles: RotationAngles) -> np.ndarray:
    """Intrinsic Z-Y-X matrix R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    return Rotation.from_euler("ZYX", [angles.yaw, angles.pitch, angles.roll]).as_matrix()


def rotation_matrices(angles: np.ndarray) -> np.ndarray:
    """Stack of rotation matrices for an (n, 3) array of yaw/pitch/roll rows."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    return Rotation.from_euler("ZYX", angles).as_matrix().reshape(-1, 3, 3)


def rotate_vector(vector: Vec3, angles: RotationAngles) -> Vec3:
    if angles.is_zero():
        return vector
    return Vec3.from_array(rotation_matrix(angles) @ vector.to_array())


def positions_array(states: Sequence[UavState]) -> np.ndarray:
    return np.array([[s.position.x, s.position.y, s.position.z] for s in states], dtype=float).reshape(-1, 3)


def rotations_array(states: Sequence[UavState]) -> np.ndarray:
    return np.array([s.rotation.to_array() for s in states], dtype=float).reshape(-1, 3)


def centroid(states: Sequence[UavState]) -> Vec3:
    if not states:
        raise GeometryError("centroid of an empty swarm")
    return Vec3.from_array(positions_array(states).mean(axis=0))
