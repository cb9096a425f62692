"""Tests for array factors, distortion and pattern sweeps."""

import math

import numpy as np
import pytest

from conftest import WAVELENGTH, half_wave_line
from swarm_beam.core.beampattern import (
    ISOTROPIC,
    AngularGrid,
    BeamWeights,
    ElementPattern,
    aoa_sweep,
    array_factor,
    beam_misalignment,
    count_sidelobes,
    displacement_pattern_sweep,
    distorted_array_factor,
    distortion_metric,
    distortion_objective,
    hover_power_phase_map,
    main_lobe_width,
    pattern_energy,
    pattern_values,
    steering_direction,
    steering_phases,
)
from swarm_beam.core.errors import DimensionError, GeometryError
from swarm_beam.core.geometry import (
    Direction,
    RotationAngles,
    SwarmLayout,
    UavState,
    Vec3,
    build_grid_layout,
)
from swarm_beam.core.hover import HoverSpec, apply_hover, sample_perturbations


def line(count, spacing, origin=Vec3(0.0, 0.0, 30.0)):
    return [UavState(origin + Vec3(i * spacing, 0.0, 0.0)) for i in range(count)]


def steered(uavs, receiver):
    return BeamWeights.unit(len(uavs), steering_phases(uavs, receiver, WAVELENGTH))


def hovered(uavs, tolerance, seed):
    rng = np.random.default_rng(seed)
    return apply_hover(uavs, sample_perturbations(HoverSpec.uniform(tolerance), len(uavs), rng))


def test_single_isotropic_element_is_flat():
    uav = [UavState(Vec3.zero())]
    for theta, phi in [(0.0, 0.0), (1.0, -2.0), (math.pi / 2, math.pi / 2), (-3.0, 3.0)]:
        sample = array_factor(uav, BeamWeights.unit(1), Direction(theta, phi), WAVELENGTH)
        assert sample.magnitude == pytest.approx(1.0)


def test_half_wave_pair_null_and_broadside():
    pair = line(2, WAVELENGTH / 2, origin=Vec3.zero())
    weights = BeamWeights.unit(2)
    endfire = array_factor(pair, weights, Direction(math.pi / 2, 0.0), WAVELENGTH)
    broadside = array_factor(pair, weights, Direction(math.pi / 2, math.pi / 2), WAVELENGTH)
    assert endfire.magnitude == pytest.approx(0.0, abs=1e-12)
    assert broadside.magnitude == pytest.approx(2.0)


def test_single_uav_at_origin_has_zero_steering_phase(receiver):
    assert steering_phases([UavState(Vec3.zero())], receiver, WAVELENGTH).tolist() == [0.0]


@pytest.mark.parametrize("count", [1, 2, 4, 8])
def test_steering_gives_coherent_gain(count, receiver):
    uavs = half_wave_line(count)
    d = steering_direction(uavs, receiver)
    sample = array_factor(uavs, steered(uavs, receiver), d, WAVELENGTH)
    assert sample.magnitude == pytest.approx(count, abs=1e-9)


def test_magnitude_never_exceeds_coherent_sum(rng):
    grid = AngularGrid.midpoint(24)
    thetas, phis = grid.mesh()
    element = ElementPattern(exponent_q=2.0)
    for _ in range(5):
        uavs = [
            UavState(Vec3.from_array(rng.uniform(-2.0, 2.0, 3)),
                     RotationAngles(*rng.uniform(-0.3, 0.3, 3)), power=float(rng.uniform(0.5, 2.0)))
            for _ in range(6)
        ]
        weights = BeamWeights(rng.uniform(0.0, 1.0, 6), rng.uniform(-math.pi, math.pi, 6))
        bound = sum(s.power * a for s, a in zip(uavs, weights.amplitudes))
        for pattern in (ISOTROPIC, element):
            values = pattern_values(uavs, weights, thetas, phis, WAVELENGTH, pattern)
            assert np.abs(values).max() <= bound + 1e-12


def test_array_factor_scales_with_weights_and_geometry(rng, receiver):
    uavs = half_wave_line(4)
    weights = steered(uavs, receiver)
    grid = AngularGrid.midpoint(16)
    thetas, phis = grid.mesh()
    base = pattern_values(uavs, weights, thetas, phis, WAVELENGTH)

    louder = BeamWeights(3.0 * weights.amplitudes, weights.phases)
    assert pattern_values(uavs, louder, thetas, phis, WAVELENGTH) == pytest.approx(3.0 * base)

    # positions and wavelength scaled together leave every path phase unchanged
    stretched = [UavState(s.position * 2.5) for s in uavs]
    assert pattern_values(stretched, weights, thetas, phis, 2.5 * WAVELENGTH) == pytest.approx(
        base, abs=1e-9
    )


def test_steering_phase_difference_follows_path_length(receiver):
    uavs = line(2, 1.0)
    phases = steering_phases(uavs, receiver, WAVELENGTH)
    u_x = (50.0 - 0.5) / math.dist((0.5, 0.0, 30.0), (50.0, 50.0, 300.0))
    expected = -2 * math.pi / WAVELENGTH * u_x
    assert np.exp(1j * (phases[1] - phases[0])) == pytest.approx(np.exp(1j * expected))
    assert np.all((phases >= 0) & (phases < 2 * math.pi))


def test_steering_rejects_uav_at_receiver():
    with pytest.raises(GeometryError, match="degenerate direction"):
        steering_phases([UavState(Vec3(1.0, 2.0, 3.0))], Vec3(1.0, 2.0, 3.0), WAVELENGTH)


def test_distorted_equals_ideal_without_errors(receiver):
    uavs = half_wave_line(4)
    weights = steered(uavs, receiver)
    d = Direction(0.7, 0.3)
    ideal = array_factor(uavs, weights, d, WAVELENGTH)
    same = distorted_array_factor(uavs, uavs, weights, d, (0.0, 0.0), None, WAVELENGTH)
    assert (same.magnitude, same.phase) == (ideal.magnitude, ideal.phase)


def test_common_phase_error_only_rotates_phase(receiver):
    uavs = half_wave_line(4)
    weights = steered(uavs, receiver)
    d = Direction(0.7, 0.3)
    ideal = array_factor(uavs, weights, d, WAVELENGTH)
    shifted = distorted_array_factor(uavs, uavs, weights, d, (0.0, 0.0), [0.4] * 4, WAVELENGTH)
    assert shifted.magnitude == pytest.approx(ideal.magnitude)
    assert np.exp(1j * shifted.phase) == pytest.approx(np.exp(1j * (ideal.phase + 0.4)))


def test_hovering_loses_coherence(receiver):
    uavs = half_wave_line(4)
    weights = steered(uavs, receiver)
    d = steering_direction(uavs, receiver)
    for seed in range(50):
        sample = distorted_array_factor(
            uavs, hovered(uavs, 0.05, seed), weights, d, (0.0, 0.0), None, WAVELENGTH
        )
        assert sample.magnitude < 4.0 - 1e-9


def test_distortion_is_zero_without_perturbation(receiver):
    uavs = half_wave_line(4)
    grid = AngularGrid.midpoint(32)
    assert distortion_objective(uavs, uavs, steered(uavs, receiver), None, grid, WAVELENGTH) == 0.0


def test_distortion_is_symmetric(receiver):
    uavs = half_wave_line(4)
    moved = hovered(uavs, 0.02, 1)
    weights = steered(uavs, receiver)
    grid = AngularGrid.midpoint(32)
    forward = distortion_objective(uavs, moved, weights, None, grid, WAVELENGTH)
    backward = distortion_objective(moved, uavs, weights, None, grid, WAVELENGTH)
    assert forward > 0
    assert forward == pytest.approx(backward)


def test_distortion_grows_with_tolerance(receiver):
    uavs = half_wave_line(4)
    weights = steered(uavs, receiver)
    grid = AngularGrid.midpoint(32)

    def mean_objective(tolerance):
        return np.mean([
            distortion_objective(uavs, hovered(uavs, tolerance, seed), weights, None, grid, WAVELENGTH)
            for seed in range(20)
        ])

    assert mean_objective(0.05) > mean_objective(0.01)


def test_mean_distortion_orders_tolerances_and_swarm_sizes(receiver):
    grid = AngularGrid.midpoint(64)

    def mean_objective(count, tolerance):
        uavs = half_wave_line(count)
        weights = steered(uavs, receiver)
        # same seeds for every tolerance, so each draw only stretches
        return np.mean([
            distortion_objective(
                uavs, hovered(uavs, tolerance, seed), weights, None, grid, WAVELENGTH
            )
            for seed in range(200)
        ])

    objectives = [mean_objective(4, cm / 100.0) for cm in (1, 2, 3, 4, 5)]
    assert all(a < b for a, b in zip(objectives, objectives[1:]))
    assert objectives[-1] > mean_objective(2, 0.05)


def test_quadrature_is_stable_under_refinement(receiver):
    uavs = half_wave_line(4)
    weights = steered(uavs, receiver)
    for seed in range(3):
        moved = hovered(uavs, 0.01, seed)
        coarse = distortion_objective(uavs, moved, weights, None, AngularGrid.midpoint(64), WAVELENGTH)
        fine = distortion_objective(uavs, moved, weights, None, AngularGrid.midpoint(128), WAVELENGTH)
        assert fine == pytest.approx(coarse, rel=0.01)


def test_distortion_metric_normalizes_by_energy(receiver):
    uavs = half_wave_line(4)
    moved = hovered(uavs, 0.02, 4)
    weights = steered(uavs, receiver)
    grid = AngularGrid.midpoint(32)
    energy = pattern_energy(uavs, weights, grid, WAVELENGTH)
    objective = distortion_objective(uavs, moved, weights, None, grid, WAVELENGTH)
    eta = distortion_metric(uavs, moved, weights, None, grid, WAVELENGTH)
    assert eta == pytest.approx(objective / energy)
    assert distortion_metric(uavs, moved, weights, None, grid, WAVELENGTH, energy=energy) == eta


def test_distortion_metric_needs_beam_energy():
    uavs = half_wave_line(2)
    silent = BeamWeights(np.zeros(2), np.zeros(2))
    with pytest.raises(GeometryError):
        distortion_metric(uavs, uavs, silent, None, AngularGrid.midpoint(8), WAVELENGTH)


def test_single_isotropic_energy_is_quarter_square_area():
    energy = pattern_energy([UavState(Vec3.zero())], BeamWeights.unit(1), AngularGrid.midpoint(8), WAVELENGTH)
    assert energy == pytest.approx(math.pi ** 2)


def test_angular_grid_validation():
    grid = AngularGrid.midpoint(4)
    assert grid.thetas.tolist() == pytest.approx([-0.75 * math.pi, -0.25 * math.pi,
                                                  0.25 * math.pi, 0.75 * math.pi])
    assert grid.cell_areas().sum() == pytest.approx(4 * math.pi ** 2)
    with pytest.raises(DimensionError):
        AngularGrid(np.array([0.2, 0.1]), np.array([0.0]))
    with pytest.raises(DimensionError):
        AngularGrid.midpoint(0)


def test_mismatched_weights_rejected():
    with pytest.raises(DimensionError):
        array_factor(half_wave_line(3), BeamWeights.unit(2), Direction(0.0, 0.0), WAVELENGTH)


def test_aoa_single_uav_is_flat():
    thetas = np.linspace(-math.pi / 2, math.pi / 2, 61)
    samples = aoa_sweep([UavState(Vec3.zero())], BeamWeights.unit(1), 0.0, thetas, WAVELENGTH)
    assert [s.magnitude for s in samples] == pytest.approx([1.0] * 61)


def test_wider_spacing_narrows_main_lobe_and_adds_sidelobes():
    thetas = np.linspace(-math.pi / 2, math.pi / 2, 361)

    def cut(spacing):
        samples = aoa_sweep(line(4, spacing), BeamWeights.unit(4), 0.0, thetas, WAVELENGTH)
        return np.array([s.magnitude for s in samples])

    half, double = cut(WAVELENGTH / 2), cut(2 * WAVELENGTH)
    assert main_lobe_width(thetas, double) < main_lobe_width(thetas, half)
    assert count_sidelobes(double) > count_sidelobes(half)


def test_main_lobe_width_interpolates_crossings():
    angles = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    magnitudes = np.array([0.0, 0.5, 1.0, 0.5, 0.0])
    level = 10 ** (-3 / 20)
    half_width = (1.0 - level) / 0.5
    assert main_lobe_width(angles, magnitudes) == pytest.approx(2 * half_width)


def test_count_sidelobes_threshold():
    magnitudes = [0.0, 1.0, 0.0, 0.5, 0.0, 0.2, 0.0]
    assert count_sidelobes(magnitudes) == 1
    assert count_sidelobes(magnitudes, threshold_db=-20.0) == 2
    assert count_sidelobes([1.0, 0.5]) == 0


def test_isotropic_hover_map_is_constant(receiver):
    uavs = half_wave_line(4)
    weights = steered(uavs, receiver)
    grid = np.radians([-10.0, 0.0, 10.0])
    result = hover_power_phase_map(uavs, weights, receiver, grid, grid, WAVELENGTH)
    assert result.power_db.shape == (3, 3)
    assert result.power_db == pytest.approx(np.full((3, 3), result.power_db[1, 1]))
    assert result.power_db[1, 1] == pytest.approx(20 * math.log10(4.0))


def test_tilting_away_from_receiver_loses_power():
    receiver = Vec3(0.0, 0.0, 50.0)
    uavs = half_wave_line(4)
    weights = steered(uavs, receiver)
    element = ElementPattern(exponent_q=2.0)
    result = hover_power_phase_map(
        uavs, weights, receiver, np.radians([0.0, 60.0]), [0.0], WAVELENGTH, element
    )
    d = steering_direction(uavs, receiver)
    level = array_factor(uavs, weights, d, WAVELENGTH, element).magnitude
    assert result.power_db[0, 0] == pytest.approx(20 * math.log10(level))
    assert result.power_db[1, 0] < result.power_db[0, 0]


def test_displacement_sweep_zero_tolerance_matches_ideal(rng, receiver):
    uavs = half_wave_line(4)
    thetas = np.linspace(-math.pi / 2, math.pi / 2, 91)
    cuts = displacement_pattern_sweep(
        uavs, steered(uavs, receiver), [0.0, 0.05], 0.0, thetas, WAVELENGTH, rng
    )
    assert [c.tolerance for c in cuts] == [0.0, 0.05]
    assert cuts[0].distorted_db == pytest.approx(cuts[0].ideal_db)
    assert np.nanmax(cuts[0].ideal_db) == pytest.approx(0.0)
    assert not np.allclose(cuts[1].distorted_db, cuts[1].ideal_db)


def test_ideal_beam_is_not_misaligned(receiver):
    uavs = build_grid_layout(SwarmLayout(2, 2, 2, WAVELENGTH / 2, Vec3(0.0, 0.0, 30.0)))
    weights = steered(uavs, receiver)
    intended = steering_direction(uavs, receiver)
    assert beam_misalignment(uavs, weights, intended, WAVELENGTH) < 1e-6
