"""Tests for scenario configuration, environment overrides and seeding."""

import json
import math

import numpy as np
import pytest

from swarm_beam.config import derive_seed, make_rng, prepare_output_dir
from swarm_beam.core.errors import ConfigError, OutputDirError
from swarm_beam.core.hover import HoverSpec
from swarm_beam.models.config import (
    LogLevel,
    WeightMode,
    config_hash,
    load_config,
    read_document,
    validate_config,
)
from swarm_beam.resources import DEFAULT_SCENARIO, resolve_config_path, shipped_scenario
from swarm_beam.settings import Settings, apply_env_overrides


def test_minimal_document_gets_defaults(minimal_document):
    config = validate_config(minimal_document)
    assert config.seed == 2024
    assert config.log_level is LogLevel.INFO
    assert config.hover.tolerance_fraction == pytest.approx(0.3)
    assert config.channel.carrier_freq == 3.5e9
    assert config.selection.k == 4
    assert config.beam.weight_mode is WeightMode.MRT
    assert config.agent.target_sync_interval == 100
    assert config.agent.to_domain().max_grad_norm == 1.0
    assert config.agent.hidden_sizes == [128, 128]
    assert config.receiver_point().z == 300.0


@pytest.mark.parametrize("section, key, value", [
    ("layout", "spacing_delta", -1.0),
    ("layout", "l_u", 0),
    ("hover", "tolerance_fraction", 1.5),
    ("channel", "carrier_freq", 0.0),
    ("agent", "learning_rate", 2.0),
])
def test_invalid_value_names_its_key(minimal_document, section, key, value):
    minimal_document.setdefault(section, {})[key] = value
    with pytest.raises(ConfigError) as excinfo:
        validate_config(minimal_document)
    assert excinfo.value.kind == ConfigError.INVALID
    assert excinfo.value.key == f"{section}.{key}"
    assert f"{section}.{key}" in str(excinfo.value)


def test_unknown_keys_rejected(minimal_document):
    minimal_document["selection"] = {"kk": 3}
    with pytest.raises(ConfigError) as excinfo:
        validate_config(minimal_document)
    assert excinfo.value.key == "selection.kk"


def test_missing_required_section(minimal_document):
    del minimal_document["receiver"]
    with pytest.raises(ConfigError) as excinfo:
        validate_config(minimal_document)
    assert excinfo.value.key == "receiver"


def test_cross_section_checks(minimal_document):
    minimal_document["selection"] = {"k": 9}
    with pytest.raises(ConfigError, match="exceeds the swarm size"):
        validate_config(minimal_document)


def test_hover_needs_some_bound(minimal_document):
    minimal_document["hover"] = {"tolerance_fraction": None, "dx_max": 0.01}
    with pytest.raises(ConfigError):
        validate_config(minimal_document)


def test_hover_section_resolves_bounds(minimal_document):
    minimal_document["hover"] = {"tolerance_fraction": 0.1, "angle_max_deg": 5.0}
    spec = validate_config(minimal_document).hover.to_domain(2.0)
    assert spec.bounds() == pytest.approx((0.2, 0.2, 0.2))
    assert spec.angle_max == pytest.approx(math.radians(5.0))

    minimal_document["hover"] = {"dx_max": 0.01, "dy_max": 0.02, "dz_max": 0.03}
    absolute = validate_config(minimal_document).hover.to_domain(2.0)
    assert absolute.bounds() == (0.01, 0.02, 0.03)


def test_tolerance_fraction_wins_over_absolute_bounds(minimal_document):
    minimal_document["hover"] = {
        "tolerance_fraction": 0.1, "dx_max": 0.01, "dy_max": 0.02, "dz_max": 0.03,
    }
    section = validate_config(minimal_document).hover
    assert section.to_domain(2.0).bounds() == pytest.approx((0.2, 0.2, 0.2))
    assert section.to_domain(2.0) == HoverSpec(
        0.0, 0.0, 0.0, section.to_domain(2.0).angle_max, 0.1
    ).resolved(2.0)


def test_absolute_override_keeps_shipped_fraction(minimal_document):
    minimal_document["hover"] = {"tolerance_fraction": 0.3}
    merged = apply_env_overrides(minimal_document, {
        "SWARM_BEAM__HOVER__DX_MAX": "0.5",
        "SWARM_BEAM__HOVER__DY_MAX": "0.5",
        "SWARM_BEAM__HOVER__DZ_MAX": "0.5",
    })
    spec = validate_config(merged).hover.to_domain(1.0)
    assert spec.bounds() == pytest.approx((0.3, 0.3, 0.3))


def test_hover_defaults_to_fraction_unless_absolute_complete(minimal_document):
    minimal_document["hover"] = {"dx_max": 0.01}
    section = validate_config(minimal_document).hover
    assert section.tolerance_fraction == pytest.approx(0.3)
    assert section.to_domain(1.0).bounds() == pytest.approx((0.3, 0.3, 0.3))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        read_document(tmp_path / "absent.json")
    assert excinfo.value.kind == ConfigError.MISSING_FILE


def test_malformed_file_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"layout": {\n  "l_u": 4,,\n}', encoding="utf-8")
    with pytest.raises(ConfigError, match="line 2") as excinfo:
        read_document(path)
    assert excinfo.value.kind == ConfigError.MALFORMED


def test_top_level_must_be_object(tmp_path):
    path = tmp_path / "list.json"
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError) as excinfo:
        read_document(path)
    assert excinfo.value.kind == ConfigError.MALFORMED


def test_shipped_scenario_loads_and_round_trips(tmp_path):
    path = shipped_scenario(DEFAULT_SCENARIO)
    assert path is not None
    config = load_config(path)
    assert (config.layout.l_u, config.layout.c_u, config.layout.r_u) == (4, 4, 4)
    assert config.layout.spacing_delta == 1.0
    assert config.selection.k == 4
    assert config.receiver == (50.0, 50.0, 300.0)

    copy = tmp_path / "copy.json"
    copy.write_text(json.dumps(config.to_dict()), encoding="utf-8")
    again = load_config(copy)
    assert again == config
    assert config_hash(again) == config_hash(config)


def test_config_path_resolution(tmp_path):
    assert resolve_config_path(DEFAULT_SCENARIO) == shipped_scenario(DEFAULT_SCENARIO)
    existing = tmp_path / "mine.json"
    existing.write_text("{}", encoding="utf-8")
    assert resolve_config_path(str(existing)) == existing
    assert shipped_scenario("no_such_scenario") is None


def test_config_hash_tracks_content(minimal_document):
    base = validate_config(minimal_document)
    assert len(config_hash(base)) == 16
    assert config_hash(base) == config_hash(validate_config(dict(minimal_document)))
    minimal_document["seed"] = 7
    assert config_hash(validate_config(minimal_document)) != config_hash(base)


def test_environment_overrides(minimal_document):
    environ = {
        "SWARM_BEAM__SELECTION__K": "3",
        "SWARM_BEAM__EXPERIMENTS__DISPLACEMENT_K": "[2]",
        "SWARM_BEAM_SEED": "99",
        "SWARM_BEAM_LOG_LEVEL": "DEBUG",
        "UNRELATED": "1",
    }
    merged = apply_env_overrides(minimal_document, environ)
    config = validate_config(merged)
    assert config.selection.k == 3
    assert config.experiments.displacement_k == [2]
    assert config.seed == 99
    assert config.log_level is LogLevel.DEBUG
    assert "selection" not in minimal_document


def test_override_keys_are_validated(minimal_document):
    merged = apply_env_overrides(minimal_document, {"SWARM_BEAM__SELECTION__BOGUS": "1"})
    with pytest.raises(ConfigError) as excinfo:
        validate_config(merged)
    assert excinfo.value.key == "selection.bogus"


def test_malformed_override_variable(minimal_document):
    with pytest.raises(ConfigError):
        Settings({"SWARM_BEAM__SELECTION__": "1"}).overrides()
    with pytest.raises(ConfigError):
        apply_env_overrides({"seed": 1}, {"SWARM_BEAM__SEED__X": "1"})


def test_load_config_applies_environment(write_config, minimal_document):
    path = write_config(minimal_document)
    assert load_config(path).seed == 2024
    assert load_config(path, environ={"SWARM_BEAM_SEED": "5"}).seed == 5


def test_named_streams_are_independent_and_stable():
    a = make_rng(2024, "channel").random(4)
    b = make_rng(2024, "channel").random(4)
    c = make_rng(2024, "interference").random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert derive_seed(2024, "channel").spawn_key == derive_seed(7, "channel").spawn_key


def test_prepare_output_dir(tmp_path):
    out = prepare_output_dir(tmp_path / "nested" / "results")
    assert out.is_dir()
    blocker = tmp_path / "file.txt"
    blocker.write_text("x", encoding="utf-8")
    with pytest.raises(OutputDirError):
        prepare_output_dir(blocker / "results")
