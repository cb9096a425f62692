"""
Configuration Models

Validated scenario configuration: one section per simulation concern,
with documented defaults, strict key checking and conversion into the
domain types used by the simulation core and the agent.
"""

import hashlib
import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..agent.trainer import AgentConfig
from ..core.beampattern import ElementPattern
from ..core.channel import FadingParams
from ..core.errors import ConfigError
from ..core.geometry import SwarmLayout, Vec3
from ..core.hover import DEFAULT_TOLERANCE_FRACTION, HoverSpec
from ..core.interference import Box

Point = Tuple[float, float, float]


class LogLevel(Enum):
    """Logging level options."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class WeightMode(Enum):
    """How beam weights are chosen for pattern experiments."""
    STEERING = "steering"  # unit amplitudes, geometric steering phases
    MRT = "mrt"  # MRT weights of the swarm channel draw that selection scored


class StepSchedule(Enum):
    CONSTANT = "constant"
    DECAYING = "decaying"


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LayoutSection(Section):
    """Rectangular swarm grid."""
    l_u: int = Field(4, ge=1)
    c_u: int = Field(4, ge=1)
    r_u: int = Field(4, ge=1)
    spacing_delta: float = Field(1.0, gt=0)
    origin: Point = (0.0, 0.0, 30.0)

    def to_domain(self) -> SwarmLayout:
        return SwarmLayout(self.l_u, self.c_u, self.r_u, self.spacing_delta, Vec3(*self.origin))


class HoverSection(Section):
    """
    Per-axis displacement bound as a fraction of the spacing, or in meters.

    A set tolerance_fraction wins over dx_max/dy_max/dz_max. Leaving it out
    falls back to the absolute bounds when all three are given and to the
    30 % default otherwise.
    """
    tolerance_fraction: Optional[float] = Field(None, ge=0, le=1)
    dx_max: Optional[float] = Field(None, ge=0)
    dy_max: Optional[float] = Field(None, ge=0)
    dz_max: Optional[float] = Field(None, ge=0)
    angle_max_deg: float = Field(10.0, ge=0, le=180)

    @model_validator(mode="after")
    def _bounds_given(self) -> "HoverSection":
        absolute_given = all(v is not None for v in (self.dx_max, self.dy_max, self.dz_max))
        if self.tolerance_fraction is None and not absolute_given:
            if "tolerance_fraction" in self.model_fields_set:
                raise ValueError("set tolerance_fraction or all of dx_max, dy_max, dz_max")
            self.tolerance_fraction = DEFAULT_TOLERANCE_FRACTION
        return self

    def to_domain(self, spacing_delta: float) -> HoverSpec:
        angle_max = math.radians(self.angle_max_deg)
        if self.tolerance_fraction is not None:
            return HoverSpec(0.0, 0.0, 0.0, angle_max, self.tolerance_fraction).resolved(spacing_delta)
        return HoverSpec(self.dx_max, self.dy_max, self.dz_max, angle_max)


class ChannelSection(Section):
    rician_k: float = Field(5.0, ge=0)
    pathloss_exponent: float = Field(2.2, gt=0)
    reference_gain: float = Field(1.0, gt=0)
    carrier_freq: float = Field(3.5e9, gt=0)

    def to_domain(self) -> FadingParams:
        return FadingParams(
            rician_k=self.rician_k,
            pathloss_exponent=self.pathloss_exponent,
            reference_gain=self.reference_gain,
            carrier_freq=self.carrier_freq,
        )


class InterferenceSection(Section):
    num_sources: int = Field(10, ge=0)
    region_lower: Point = (-100.0, -100.0, 0.0)
    region_upper: Point = (200.0, 200.0, 400.0)
    power_range: Tuple[float, float] = (0.01, 0.1)
    noise_power: float = Field(1e-13, gt=0)

    @model_validator(mode="after")
    def _consistent(self) -> "InterferenceSection":
        if any(lo > hi for lo, hi in zip(self.region_lower, self.region_upper)):
            raise ValueError("region_lower must not exceed region_upper")
        low, high = self.power_range
        if low < 0 or low > high:
            raise ValueError("power_range must be a non-negative (low, high) pair")
        return self

    def region(self) -> Box:
        return Box(Vec3(*self.region_lower), Vec3(*self.region_upper))


class BeamSection(Section):
    weight_mode: WeightMode = WeightMode.MRT
    element_exponent_q: float = Field(2.0, ge=0)
    grid_size: int = Field(64, ge=2)

    def element(self) -> ElementPattern:
        return ElementPattern(exponent_q=self.element_exponent_q)


class SelectionSection(Section):
    k: int = Field(4, ge=1)
    tx_power: float = Field(1.0, gt=0)
    chunk_size: int = Field(65536, ge=1)
    time_instants: int = Field(5, ge=1)


class AgentSection(Section):
    learning_rate: float = Field(0.05, gt=0, le=1)
    discount: float = Field(0.9, gt=0, le=1)
    epsilon_start: float = Field(1.0, ge=0, le=1)
    epsilon_end: float = Field(0.05, ge=0, le=1)
    epsilon_decay: float = Field(0.99, gt=0, le=1)
    batch_size: int = Field(32, ge=1)
    replay_capacity: int = Field(10_000, ge=1)
    episodes: int = Field(300, ge=1)
    hidden_sizes: List[int] = Field(default_factory=lambda: [128, 128])
    step_schedule: StepSchedule = StepSchedule.DECAYING
    step_decay: float = Field(1000.0, gt=0)
    target_sync_interval: int = Field(100, ge=0)
    max_grad_norm: float = Field(1.0, ge=0)
    eta_threshold: Optional[float] = Field(None, gt=0)
    threshold_quantile: float = Field(0.05, gt=0, lt=1)
    threshold_draws: int = Field(100, ge=2)
    max_steps_per_episode: int = Field(50, ge=1)
    position_step: Optional[float] = Field(None, gt=0)
    phase_step: float = Field(math.pi / 64, gt=0)
    terminal_bonus: float = 1.0
    eval_draws: int = Field(100, ge=1)

    @model_validator(mode="after")
    def _consistent(self) -> "AgentSection":
        if self.batch_size > self.replay_capacity:
            raise ValueError("batch_size must not exceed replay_capacity")
        if self.epsilon_end > self.epsilon_start:
            raise ValueError("epsilon_end must not exceed epsilon_start")
        if any(h < 1 for h in self.hidden_sizes):
            raise ValueError("hidden_sizes must be positive")
        return self

    def to_domain(self) -> AgentConfig:
        return AgentConfig(
            learning_rate=self.learning_rate,
            discount=self.discount,
            epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
            epsilon_decay=self.epsilon_decay,
            batch_size=self.batch_size,
            replay_capacity=self.replay_capacity,
            episodes=self.episodes,
            hidden_sizes=tuple(self.hidden_sizes),
            step_schedule=self.step_schedule.value,
            step_decay=self.step_decay,
            target_sync_interval=self.target_sync_interval,
            max_grad_norm=self.max_grad_norm,
        )


class ExperimentsSection(Section):
    """Sweep grids of the figure-style experiments."""
    hover_map_max_deg: float = Field(10.0, gt=0, le=90)
    hover_map_resolution: int = Field(21, ge=2)
    displacement_tolerances_cm: List[float] = Field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0])
    displacement_k: List[int] = Field(default_factory=lambda: [2, 4])
    displacement_receiver: Optional[Point] = None
    displacement_phi_deg: Optional[float] = None  # None: azimuth of the receiver
    theta_points: int = Field(361, ge=3)
    aoa_k: int = Field(4, ge=1)
    aoa_phi_deg: float = 0.0
    aoa_spacings_wavelengths: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])
    heatmap_grid: Tuple[int, int] = (64, 64)
    heatmap_plane_z: float = 0.0
    pearson_samples: int = Field(200, ge=2)
    pearson_reference_uav: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _positive_lists(self) -> "ExperimentsSection":
        if any(t < 0 for t in self.displacement_tolerances_cm):
            raise ValueError("displacement_tolerances_cm must be non-negative")
        if any(k < 1 for k in self.displacement_k):
            raise ValueError("displacement_k entries must be positive")
        if any(s <= 0 for s in self.aoa_spacings_wavelengths):
            raise ValueError("aoa_spacings_wavelengths must be positive")
        if min(self.heatmap_grid) < 1:
            raise ValueError("heatmap_grid dimensions must be positive")
        return self


class ScenarioConfig(Section):
    """Complete scenario: the swarm, its environment and every experiment knob."""
    layout: LayoutSection
    receiver: Point
    hover: HoverSection = Field(default_factory=HoverSection)
    channel: ChannelSection = Field(default_factory=ChannelSection)
    interference: InterferenceSection = Field(default_factory=InterferenceSection)
    beam: BeamSection = Field(default_factory=BeamSection)
    selection: SelectionSection = Field(default_factory=SelectionSection)
    agent: AgentSection = Field(default_factory=AgentSection)
    experiments: ExperimentsSection = Field(default_factory=ExperimentsSection)
    seed: int = Field(2024, ge=0, lt=2 ** 64)
    log_level: LogLevel = LogLevel.INFO

    @model_validator(mode="after")
    def _cross_section(self) -> "ScenarioConfig":
        size = self.layout.l_u * self.layout.c_u * self.layout.r_u
        if self.selection.k > size:
            raise ValueError(f"selection.k = {self.selection.k} exceeds the swarm size {size}")
        if self.experiments.pearson_reference_uav >= size:
            raise ValueError("experiments.pearson_reference_uav is outside the swarm")
        if any(k > size for k in self.experiments.displacement_k):
            raise ValueError("experiments.displacement_k entries must not exceed the swarm size")
        return self

    def receiver_point(self) -> Vec3:
        return Vec3(*self.receiver)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def _error_key(location) -> str:
    return ".".join(str(part) for part in location)


def validate_config(document: Dict[str, Any]) -> ScenarioConfig:
    """Validate a parsed document; the error names the first offending dotted key."""
    try:
        return ScenarioConfig.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        key = _error_key(first.get("loc", ()))
        message = first.get("msg", "invalid value")
        where = f"{key}: " if key else ""
        raise ConfigError(f"{where}{message}", ConfigError.INVALID, key or None) from e


def read_document(path: Path) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", ConfigError.MISSING_FILE)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"malformed config {path}: {e.msg} at line {e.lineno}, column {e.colno}",
            ConfigError.MALFORMED,
        ) from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"malformed config {path}: not UTF-8 text", ConfigError.MALFORMED) from e
    if not isinstance(document, dict):
        raise ConfigError(f"malformed config {path}: top level must be an object", ConfigError.MALFORMED)
    return document


def load_config(path: Path, environ: Optional[Dict[str, str]] = None) -> ScenarioConfig:
    """
    Read, override and validate a JSON scenario file.

    Environment overrides are applied when ``environ`` is given (the CLI
    passes ``os.environ``); library callers get the file as written.
    """
    document = read_document(path)
    if environ is not None:
        from ..settings import apply_env_overrides
        document = apply_env_overrides(document, environ)
    return validate_config(document)


def config_hash(config: ScenarioConfig) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON form."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
