"""Tests for interference fields, subset SINR and heatmaps."""

import math

import numpy as np
import pytest

from conftest import WAVELENGTH, half_wave_line
from swarm_beam.core.beampattern import BeamWeights
from swarm_beam.core.channel import FadingParams
from swarm_beam.core.errors import DegenerateChannelError, DimensionError, GeometryError
from swarm_beam.core.geometry import Vec3
from swarm_beam.core.interference import (
    Box,
    InterferenceField,
    InterferenceSource,
    field_from_sources,
    heatmap,
    interference_power_at,
    relative_gains,
    sample_field,
    sinr_db,
    subset_sinr,
)

REGION = Box(Vec3(-100.0, -100.0, 0.0), Vec3(200.0, 200.0, 400.0))
PARAMS = FadingParams()


def test_inverted_box_rejected():
    with pytest.raises(GeometryError, match="inverted box"):
        Box(Vec3(1.0, 0.0, 0.0), Vec3(0.0, 1.0, 1.0))


def test_source_outside_region_rejected():
    with pytest.raises(GeometryError):
        InterferenceField((InterferenceSource(Vec3(500.0, 0.0, 0.0), 0.1),), 1e-13, REGION)
    with pytest.raises(GeometryError):
        InterferenceSource(Vec3.zero(), -1.0)


def test_sample_field_inside_region(rng):
    field = sample_field(REGION, 10, (0.01, 0.1), 1e-13, rng)
    assert len(field.sources) == 10
    assert all(REGION.contains(s.position) for s in field.sources)
    assert np.all((field.powers() >= 0.01) & (field.powers() <= 0.1))
    assert field.positions().shape == (10, 3)


def test_sample_field_is_seeded():
    a = sample_field(REGION, 5, (0.01, 0.1), 1e-13, np.random.default_rng(9))
    b = sample_field(REGION, 5, (0.01, 0.1), 1e-13, np.random.default_rng(9))
    assert a == b


def test_sample_field_rejects_bad_arguments(rng):
    with pytest.raises(DimensionError):
        sample_field(REGION, -1, (0.01, 0.1), 1e-13, rng)
    with pytest.raises(GeometryError):
        sample_field(REGION, 3, (0.1, 0.01), 1e-13, rng)


def test_sample_field_first_moments(rng):
    field = sample_field(REGION, 10_000, (0.01, 0.1), 1e-13, rng)
    centre = (REGION.lower.to_array() + REGION.upper.to_array()) / 2
    extent = REGION.upper.to_array() - REGION.lower.to_array()
    assert np.all(np.abs(field.positions().mean(axis=0) - centre) < 0.03 * extent)
    assert field.powers().mean() == pytest.approx(0.055, rel=0.03)


def test_sinr_db_values():
    assert sinr_db(1.0, 0.0, 1.0) == pytest.approx(0.0)
    assert sinr_db(100.0, 0.5, 0.5) == pytest.approx(20.0)


def test_no_sources_gives_signal_to_noise():
    field = field_from_sources([], [], noise_power=1e-3)
    uav = half_wave_line(1)
    report = subset_sinr(uav, BeamWeights.unit(1), [1.0], Vec3(0.0, 0.0, 300.0), field, PARAMS)
    assert report.interference_power == 0.0
    assert report.signal_power == pytest.approx(1.0)
    assert report.sinr_db == pytest.approx(30.0)


def test_relative_gain_is_one_at_anchor_and_zero_in_null():
    states = half_wave_line(2)
    up = np.array([0.0, 0.0, 1.0])
    directions = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    gains = relative_gains(states, np.ones(2), directions, up, WAVELENGTH)
    assert gains == pytest.approx([1.0, 0.0], abs=1e-12)


def test_source_in_pattern_null_is_suppressed():
    states = half_wave_line(2)
    middle = states[0].position.x + WAVELENGTH / 4
    receiver = Vec3(middle, 0.0, 300.0)
    null_source = Vec3(middle + 1000.0, 0.0, 30.0)
    beam_source = Vec3(middle, 0.0, 600.0)
    weights = BeamWeights.unit(2)

    in_null = subset_sinr(states, weights, [1, 1], receiver,
                          field_from_sources([null_source], [1.0], 1e-3), PARAMS)
    in_beam = subset_sinr(states, weights, [1, 1], receiver,
                          field_from_sources([beam_source], [1.0], 1e-3), PARAMS)
    assert in_null.signal_power == pytest.approx(4.0)
    assert in_null.interference_power < 1e-12
    assert in_beam.interference_power == pytest.approx(1.0 * 300.0 ** -2.2)
    assert in_null.sinr_db > in_beam.sinr_db


def test_extra_source_never_raises_sinr(small_swarm, receiver, params, rng):
    field = sample_field(REGION, 4, (0.01, 0.1), 1e-13, rng)
    h = rng.standard_normal(len(small_swarm)) + 1j * rng.standard_normal(len(small_swarm))
    weights = BeamWeights.from_complex(np.conj(h) / np.linalg.norm(h))
    before = subset_sinr(small_swarm, weights, h, receiver, field, params)
    for _ in range(5):
        position = Vec3.from_array(rng.uniform(REGION.lower.to_array(), REGION.upper.to_array()))
        field = field.with_source(InterferenceSource(position, float(rng.uniform(0.01, 0.1))))
        after = subset_sinr(small_swarm, weights, h, receiver, field, params)
        assert after.sinr_db <= before.sinr_db
        before = after


def test_subset_sinr_errors(small_swarm, receiver, params):
    field = field_from_sources([], [], 1e-13)
    with pytest.raises(DimensionError):
        subset_sinr(small_swarm[:2], BeamWeights.unit(3), [1, 1], receiver, field, params)
    with pytest.raises(DegenerateChannelError):
        subset_sinr(small_swarm[:2], BeamWeights(np.zeros(2), np.zeros(2)), [1, 1],
                    receiver, field, params)


def test_interference_power_at_point():
    field = field_from_sources([Vec3(0.0, 0.0, 0.0)], [2.0], noise_power=1e-9)
    value = interference_power_at(field, np.array([10.0, 0.0, 0.0]), PARAMS)
    assert value == pytest.approx(2.0 * 10.0 ** -2.2 + 1e-9)


def test_heatmap_cells_and_values():
    region = Box(Vec3(-10.0, -10.0, 0.0), Vec3(10.0, 10.0, 0.0))
    field = field_from_sources([Vec3(0.0, 0.0, 0.0)], [1.0], noise_power=1e-9, region=region)
    result = heatmap(field, 0.0, (2, 4), PARAMS)
    assert result.values_db.shape == (2, 4)
    assert result.xs.tolist() == [-5.0, 5.0]
    assert result.ys.tolist() == [-7.5, -2.5, 2.5, 7.5]
    assert result.values_db[0, 1] == pytest.approx(
        10 * math.log10(math.hypot(5.0, 2.5) ** -2.2 + 1e-9)
    )
    assert result.values_db[1, 0] == pytest.approx(
        10 * math.log10(math.hypot(5.0, 7.5) ** -2.2 + 1e-9)
    )


def test_heatmap_without_sources_is_noise_floor():
    field = field_from_sources([], [], noise_power=1e-10, region=REGION)
    result = heatmap(field, 0.0, (3, 3), PARAMS)
    assert result.values_db == pytest.approx(np.full((3, 3), -100.0))


def test_heatmap_peaks_in_the_cell_nearest_a_source():
    region = Box(Vec3(0.0, 0.0, 0.0), Vec3(100.0, 100.0, 50.0))
    source = Vec3(62.0, 23.0, 20.0)
    field = field_from_sources([source], [0.05], noise_power=1e-13, region=region)
    result = heatmap(field, 0.0, (20, 20), PARAMS)
    ix, iy = np.unravel_index(np.argmax(result.values_db), result.values_db.shape)
    assert (result.xs[ix], result.ys[iy]) == (62.5, 22.5)


def test_heatmap_of_two_sources_is_the_sum_of_each():
    region = Box(Vec3(0.0, 0.0, 0.0), Vec3(100.0, 100.0, 50.0))
    a, b = Vec3(20.0, 30.0, 10.0), Vec3(80.0, 70.0, 40.0)
    noise = 1e-13

    def linear(positions, powers):
        field = field_from_sources(positions, powers, noise_power=noise, region=region)
        return 10.0 ** (heatmap(field, 5.0, (8, 6), PARAMS).values_db / 10.0) - noise

    both = linear([a, b], [0.02, 0.07])
    assert both == pytest.approx(linear([a], [0.02]) + linear([b], [0.07]), rel=1e-9)


def test_heatmap_rejects_empty_grid():
    field = field_from_sources([], [], noise_power=1e-10, region=REGION)
    with pytest.raises(DimensionError):
        heatmap(field, 0.0, (0, 3), PARAMS)
