"""
Experiment Runner

One method per command-line subcommand. Each draws its randomness from a
named stream derived from the scenario seed, writes its CSV/JSON
artifacts through an ArtifactWriter and records its wall time for the
run manifest.
"""

import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..agent.checkpoint import load_checkpoint, save_checkpoint
from ..agent.environment import ReformScenario, calibrate_threshold
from ..agent.network import QNetwork, layer_sizes_for
from ..agent.trainer import TrainingLog, greedy_rollout, train
from ..config import APP_VERSION, make_rng, peak_rss_mb
from ..core.beampattern import (
    AngularGrid,
    BeamWeights,
    aoa_sweep,
    beam_misalignment,
    count_sidelobes,
    displacement_pattern_sweep,
    hover_power_phase_map,
    main_lobe_width,
    pattern_values,
    steering_direction,
    steering_phases,
)
from ..core.channel import (
    ChannelRealization,
    distance_fading_correlation,
    mrt_weights,
    sample_channel,
)
from ..core.errors import DegenerateChannelError
from ..core.geometry import UavState, Vec3, build_grid_layout
from ..core.interference import InterferenceField, heatmap, sample_field
from ..core.selection import SelectionResult, brute_force_select, select_over_time
from ..logging_config import LogContext
from ..models.config import ScenarioConfig, WeightMode, config_hash
from .artifacts import ArtifactWriter, RunManifest

COMMANDS = (
    "hover-map",
    "displacement-pattern",
    "aoa-sweep",
    "heatmap",
    "pearson",
    "select",
    "train",
    "reform-eval",
)

PATTERN_HEADER = ("theta_rad", "phi_rad", "magnitude_db", "phase_rad")


def _db(magnitudes: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 20.0 * np.log10(magnitudes)


def reform_succeeded(initial_eta: float, final_eta: float, eta_threshold: float) -> bool:
    """A draw already inside the threshold needs no correction; otherwise eta must drop."""
    return initial_eta <= eta_threshold or final_eta < initial_eta


def _tag(value: float) -> str:
    """Compact number for file names: 0.5 -> 0.5, 2.0 -> 2."""
    return format(value, "g")


class ExperimentRunner:
    """Runs subcommands for one validated scenario into one output directory."""

    def __init__(
        self,
        config: ScenarioConfig,
        out_dir: Path,
        threads: int = 1,
        checkpoint: Optional[Path] = None,
    ):
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.out_dir = Path(out_dir)
        self.threads = max(1, int(threads))
        self.checkpoint = checkpoint
        self.writer = ArtifactWriter(self.out_dir)
        self.wall_times: Dict[str, float] = {}
        self.config_hash = config_hash(config)

        self.layout = config.layout.to_domain()
        self.params = config.channel.to_domain()
        self.receiver = config.receiver_point()
        self.element = config.beam.element()
        self.wavelength = self.params.wavelength

    # -- plumbing --------------------------------------------------------

    def rng(self, name: str) -> np.random.Generator:
        return make_rng(self.config.seed, name)

    def timed(self, operation: str, func: Callable, *args, **kwargs):
        with LogContext(self.logger, operation) as context:
            result = func(*args, **kwargs)
        self.wall_times[operation] = context.duration
        return result

    def run(self, command: str) -> RunManifest:
        handlers: Dict[str, Callable[[], None]] = {
            "hover-map": self.hover_map,
            "displacement-pattern": self.displacement_pattern,
            "aoa-sweep": self.aoa_sweep,
            "heatmap": self.heatmap,
            "pearson": self.pearson,
            "select": self.select,
            "train": self.train,
            "reform-eval": self.reform_eval,
        }
        if command not in handlers:
            raise ValueError(f"unknown subcommand {command!r}")
        self.logger.info(
            f"Running {command} (seed {self.config.seed}, config {self.config_hash}, "
            f"{self.threads} threads)"
        )
        self.timed(command, handlers[command])
        return self.manifest(command)

    def manifest(self, command: str, log_files: Sequence[str] = ()) -> RunManifest:
        return RunManifest(
            command=command,
            config_hash=self.config_hash,
            seed=self.config.seed,
            library_version=APP_VERSION,
            threads=self.threads,
            artifacts=list(self.writer.written),
            wall_times_s=dict(self.wall_times),
            peak_rss_mb=peak_rss_mb(),
            log_files=list(log_files),
        )

    # -- shared scenario pieces -----------------------------------------

    def swarm(self) -> List[UavState]:
        return build_grid_layout(self.layout)

    def swarm_channel(self, receiver: Vec3) -> ChannelRealization:
        """The first channel draw of the whole swarm, the one selection scores."""
        return sample_channel(self.swarm(), receiver, self.params, self.rng("channel"))

    def beam_weights(
        self,
        indices: Sequence[int],
        receiver: Vec3,
        channel: Optional[ChannelRealization] = None,
    ) -> BeamWeights:
        """Weights of the given swarm members; MRT reuses the swarm channel draw."""
        if self.config.beam.weight_mode is WeightMode.MRT:
            if channel is None:
                channel = self.swarm_channel(receiver)
            return BeamWeights.from_complex(mrt_weights(channel.subset(indices)))
        uavs = self.swarm()
        states = [uavs[i] for i in indices]
        return BeamWeights.unit(len(states), steering_phases(states, receiver, self.wavelength))

    def interference_field(self) -> InterferenceField:
        section = self.config.interference
        return sample_field(
            section.region(),
            section.num_sources,
            section.power_range,
            section.noise_power,
            self.rng("interference"),
        )

    def selected_subset(self) -> Tuple[SelectionResult, ChannelRealization]:
        """Stage one: the best K-subset for the first channel draw."""
        uavs = self.swarm()
        channel = self.swarm_channel(self.receiver)
        result = self.timed(
            "selection",
            brute_force_select,
            uavs,
            channel,
            self.receiver,
            self.interference_field(),
            self.params,
            self.config.selection.k,
            tx_power=self.config.selection.tx_power,
            element=self.element,
            threads=self.threads,
            chunk_size=self.config.selection.chunk_size,
        )
        if result.best is None:
            raise DegenerateChannelError("every candidate subset is degenerate; nothing to select")
        return result, channel

    def reform_scenario(self) -> Tuple[ReformScenario, SelectionResult]:
        agent = self.config.agent
        result, channel = self.selected_subset()
        members = result.best.zero_based()
        uavs = self.swarm()
        scenario = ReformScenario(
            nominal=tuple(uavs[i] for i in members),
            weights=self.beam_weights(members, self.receiver, channel),
            grid=AngularGrid.midpoint(self.config.beam.grid_size),
            wavelength=self.wavelength,
            hover=self.config.hover.to_domain(self.layout.spacing_delta),
            spacing_delta=self.layout.spacing_delta,
            element=self.element,
            max_steps=agent.max_steps_per_episode,
            position_step=agent.position_step,
            phase_step=agent.phase_step,
            terminal_bonus=agent.terminal_bonus,
        )
        threshold = agent.eta_threshold
        if threshold is None:
            threshold = self.timed(
                "calibration",
                calibrate_threshold,
                scenario,
                agent.threshold_draws,
                agent.threshold_quantile,
                self.rng("calibration"),
            )
        return scenario.with_threshold(threshold), result

    # -- subcommands -----------------------------------------------------

    def hover_map(self) -> None:
        """Received power and phase toward the receiver over a pitch x roll grid."""
        section = self.config.experiments
        uavs = self.swarm()
        grid = np.radians(
            np.linspace(-section.hover_map_max_deg, section.hover_map_max_deg,
                        section.hover_map_resolution)
        )
        result = hover_power_phase_map(
            uavs, self.beam_weights(range(len(uavs)), self.receiver), self.receiver, grid, grid,
            self.wavelength, self.element,
        )
        rows = (
            (math.degrees(p), math.degrees(r), result.power_db[i, j], result.phase_rad[i, j])
            for i, p in enumerate(result.pitches)
            for j, r in enumerate(result.rolls)
        )
        self.writer.write_csv("hover_map.csv", ("pitch_deg", "roll_deg", "power_db", "phase_rad"), rows)

    def displacement_pattern(self) -> None:
        """Ideal and hovered pattern cuts of short linear subsets for each tolerance."""
        section = self.config.experiments
        receiver = Vec3(*section.displacement_receiver) if section.displacement_receiver else self.receiver
        uavs = self.swarm()
        thetas = np.linspace(-math.pi, math.pi, section.theta_points)
        rng = self.rng("displacement")
        for k in section.displacement_k:
            subset = uavs[:k]
            weights = self.beam_weights(range(k), receiver)
            phi = (
                math.radians(section.displacement_phi_deg)
                if section.displacement_phi_deg is not None
                else steering_direction(subset, receiver).phi
            )
            tolerances = [cm / 100.0 for cm in section.displacement_tolerances_cm]
            cuts = displacement_pattern_sweep(
                subset, weights, tolerances, phi, thetas, self.wavelength, rng, self.element
            )
            ideal = pattern_values(subset, weights, thetas, phi, self.wavelength, self.element)
            peak = np.abs(ideal).max()
            self.writer.write_csv(
                f"displacement_k{k}_ideal.csv",
                PATTERN_HEADER,
                zip(thetas, np.full_like(thetas, phi), _db(np.abs(ideal) / (peak or 1.0)),
                    np.angle(ideal)),
            )
            for cm, cut in zip(section.displacement_tolerances_cm, cuts):
                self.writer.write_csv(
                    f"displacement_k{k}_d{_tag(cm)}cm.csv",
                    PATTERN_HEADER,
                    zip(cut.thetas, np.full_like(cut.thetas, phi), cut.distorted_db,
                        cut.distorted_phase),
                )

    def aoa_sweep(self) -> None:
        """Broadside cuts of a linear array at several spacings, with lobe statistics."""
        section = self.config.experiments
        phi = math.radians(section.aoa_phi_deg)
        thetas = np.linspace(-math.pi / 2, math.pi / 2, section.theta_points)
        origin = self.layout.origin
        summary = []
        for spacing in section.aoa_spacings_wavelengths:
            step = spacing * self.wavelength
            line = [UavState(origin + Vec3(i * step, 0.0, 0.0)) for i in range(section.aoa_k)]
            samples = aoa_sweep(line, BeamWeights.unit(section.aoa_k), phi, thetas,
                                self.wavelength, self.element)
            magnitudes = np.array([s.magnitude for s in samples])
            self.writer.write_csv(
                f"aoa_s{_tag(spacing)}.csv",
                PATTERN_HEADER,
                ((s.direction.theta, phi, m, s.phase) for s, m in zip(samples, _db(magnitudes))),
            )
            summary.append({
                "spacing_wavelengths": spacing,
                "main_lobe_width_rad": main_lobe_width(thetas, magnitudes),
                "sidelobes_above_10db": count_sidelobes(magnitudes),
            })
        self.writer.write_json("aoa_summary.json", {"k": section.aoa_k, "cuts": summary})

    def heatmap(self) -> None:
        """Interference plus noise level over a horizontal plane of the field region."""
        section = self.config.experiments
        field = self.interference_field()
        result = heatmap(field, section.heatmap_plane_z, tuple(section.heatmap_grid), self.params)
        rows = (
            (x, y, result.values_db[i, j] + 30.0)
            for i, x in enumerate(result.xs)
            for j, y in enumerate(result.ys)
        )
        self.writer.write_csv("heatmap.csv", ("x_m", "y_m", "interference_dbm"), rows)
        self.writer.write_csv(
            "interference_sources.csv",
            ("source_index", "x_m", "y_m", "z_m", "power_w"),
            ((i, s.position.x, s.position.y, s.position.z, s.power)
             for i, s in enumerate(field.sources)),
        )

    def pearson(self) -> None:
        """Amplitude fading correlation of one UAV against every other, by distance."""
        section = self.config.experiments
        reference = section.pearson_reference_uav
        pairs = distance_fading_correlation(
            reference,
            self.swarm(),
            self.receiver,
            self.params,
            section.pearson_samples,
            self.rng("pearson"),
            hover=self.config.hover.to_domain(self.layout.spacing_delta),
        )
        self.writer.write_csv(
            "pearson.csv",
            ("pair_index", "relative_distance_m", "pearson_r", "time_samples"),
            ((i, d, r, section.pearson_samples) for i, (d, r) in enumerate(pairs)),
        )

    def select(self) -> None:
        """Best K-subset for the first channel draw plus a timeline over later instants."""
        selection = self.config.selection
        result, _ = self.selected_subset()
        self.writer.write_json("selection.json", {
            "best_indices": list(result.best.indices) if result.best else None,
            "best_sinr_db": result.best_sinr_db,
            "evaluated_count": result.evaluated_count,
            "skipped_count": result.skipped_count,
            "wall_time_s": result.wall_time_s,
            "seed": self.config.seed,
        })
        timeline = self.timed(
            "selection-timeline",
            select_over_time,
            self.swarm(),
            self.receiver,
            self.interference_field(),
            self.params,
            selection.k,
            selection.time_instants,
            self.rng("selection-timeline"),
            tx_power=selection.tx_power,
            element=self.element,
            threads=self.threads,
        )
        self.writer.write_csv(
            "selection_timeline.csv",
            ("time_index", "best_indices", "best_sinr_db"),
            ((t, " ".join(map(str, r.best.indices)) if r.best else "", r.best_sinr_db)
             for t, r in timeline),
        )

    def _train(self, scenario: ReformScenario) -> TrainingLog:
        return self.timed("training", train, scenario, self.config.agent.to_domain(), self.rng("agent"))

    def train(self) -> None:
        """Stage two: learn corrections for the selected subset."""
        scenario, selection = self.reform_scenario()
        log = self._train(scenario)
        self.writer.write_csv(
            "training_loss.csv", ("update_index", "mse_loss"), enumerate(log.losses)
        )
        self.writer.write_csv(
            "training_episodes.csv",
            ("episode", "total_reward", "steps", "final_eta", "epsilon"),
            ((e.episode, e.total_reward, e.steps, e.final_eta, e.epsilon) for e in log.episodes),
        )
        save_checkpoint(self.writer.register("q_network.npz"), log.network, self.config_hash)
        self.writer.write_json("training_summary.json", {
            "selected_indices": list(selection.best.indices),
            "eta_threshold": log.eta_threshold,
            "updates": len(log.losses),
            "episodes": len(log.episodes),
            "config_hash": self.config_hash,
        })

    def reform_eval(self) -> None:
        """Greedy re-forming on held-out hover draws, trained network against an untrained one."""
        agent = self.config.agent
        scenario, _ = self.reform_scenario()
        if self.checkpoint is not None:
            net, trained_hash = load_checkpoint(self.checkpoint)
            if trained_hash != self.config_hash:
                self.logger.warning(
                    f"Checkpoint was trained under config {trained_hash}, running {self.config_hash}"
                )
        else:
            net = self._train(scenario).network
        sizes = layer_sizes_for(scenario.state_size, agent.hidden_sizes, scenario.action_count)
        baseline = QNetwork.initialize(sizes, self.rng("baseline"))
        intended = steering_direction(scenario.nominal, self.receiver)

        def misalignment(states: Sequence[UavState]) -> float:
            return beam_misalignment(states, scenario.weights, intended, self.wavelength, self.element)

        rng = self.rng("reform-eval")
        rows = []
        for draw in range(agent.eval_draws):
            perturbation = scenario.sample_perturbation(rng)
            trained = greedy_rollout(net, scenario, perturbation, tracking=True)
            untrained = greedy_rollout(baseline, scenario, perturbation, tracking=True)
            hovered = scenario.corrected_states(perturbation, np.zeros((scenario.size, 4)))
            rows.append((
                draw,
                trained.initial_eta,
                trained.best_eta,
                untrained.best_eta,
                misalignment(hovered),
                misalignment(trained.states),
            ))

        self.writer.write_csv(
            "reform_eval.csv",
            ("draw", "initial_eta", "trained_final_eta", "untrained_final_eta",
             "initial_misalignment_rad", "trained_misalignment_rad"),
            rows,
        )
        draws = len(rows)
        threshold = scenario.eta_threshold
        trained_rate = sum(reform_succeeded(r[1], r[2], threshold) for r in rows) / draws
        untrained_rate = sum(reform_succeeded(r[1], r[3], threshold) for r in rows) / draws
        reached_rate = sum(r[2] <= threshold for r in rows) / draws
        self.writer.write_json("reform_eval.json", {
            "draws": draws,
            "eta_threshold": scenario.eta_threshold,
            "trained_success_rate": trained_rate,
            "untrained_success_rate": untrained_rate,
            "trained_reached_threshold_rate": reached_rate,
            "mean_initial_eta": float(np.mean([r[1] for r in rows])),
            "mean_trained_eta": float(np.mean([r[2] for r in rows])),
            "mean_untrained_eta": float(np.mean([r[3] for r in rows])),
            "checkpoint": str(self.checkpoint) if self.checkpoint else None,
        })
        self.logger.info(
            f"Re-forming succeeded in {trained_rate:.0%} of draws "
            f"(untrained baseline {untrained_rate:.0%})"
        )
