"""Shared fixtures for the swarm-beam test suite."""

import json
import math

import numpy as np
import pytest

from swarm_beam.agent.environment import ReformScenario
from swarm_beam.core.beampattern import AngularGrid, BeamWeights, steering_phases
from swarm_beam.core.channel import FadingParams
from swarm_beam.core.geometry import SwarmLayout, UavState, Vec3, build_grid_layout
from swarm_beam.core.hover import HoverSpec

WAVELENGTH = 299_792_458.0 / 3.5e9


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params():
    return FadingParams()


@pytest.fixture
def receiver():
    return Vec3(50.0, 50.0, 300.0)


@pytest.fixture
def small_swarm():
    """Eight UAVs on a 2 x 2 x 2 grid with one meter spacing."""
    return build_grid_layout(SwarmLayout(2, 2, 2, 1.0, Vec3(0.0, 0.0, 30.0)))


def half_wave_line(count, wavelength=WAVELENGTH, origin=Vec3(0.0, 0.0, 30.0)):
    step = wavelength / 2
    return [UavState(origin + Vec3(i * step, 0.0, 0.0)) for i in range(count)]


@pytest.fixture
def reform_scenario(receiver):
    """Two half-wavelength-spaced UAVs steered at the receiver on a coarse grid."""
    nominal = half_wave_line(2)
    spacing = WAVELENGTH / 2
    return ReformScenario(
        nominal=tuple(nominal),
        weights=BeamWeights.unit(2, steering_phases(nominal, receiver, WAVELENGTH)),
        grid=AngularGrid.midpoint(16),
        wavelength=WAVELENGTH,
        hover=HoverSpec(0.0, 0.0, 0.0, angle_max=math.radians(5.0), tolerance_fraction=0.3),
        spacing_delta=spacing,
        max_steps=5,
    )


@pytest.fixture
def minimal_document():
    return {"layout": {"l_u": 2, "c_u": 2, "r_u": 2, "spacing_delta": 1.0}, "receiver": [50, 50, 300]}


@pytest.fixture
def write_config(tmp_path):
    def write(document, name="scenario.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    return write
