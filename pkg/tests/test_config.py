import json

import pytest

from spatialtap.config import ExperimentConfig, SamplerConfig, TrainConfig
from spatialtap.errors import (
    ConfigError, DivergenceError, GeometryError, ManifestError, NumericInstabilityError, WorkspaceLockedError,
)

from conftest import tiny_config


def test_desk_preset():
    config = ExperimentConfig.from_preset("desk")
    assert config.model.num_bins == 129
    assert config.model.u_in == config.model.u_out == 32
    assert config.model.frame_len == 256 and config.model.hop == 128
    assert config.sampler.duration == 4.0
    assert config.train_count == 200 and config.test_count == 25
    config.validate()


def test_paper_preset():
    config = ExperimentConfig.from_preset("paper")
    assert config.model.num_bins == 513
    assert config.model.u_in == config.model.u_out == 128
    assert config.sampler.duration == 7.0
    assert config.sampler.test_snr_grid == (-10.0, -5.0, 0.0, 5.0, 10.0, 20.0, 30.0, 50.0)
    assert config.sampler.train_snr_grid[0] == -10.0 and config.sampler.train_snr_grid[-1] == 50.0
    assert len(config.sampler.train_snr_grid) == 13


def test_unknown_preset():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_preset("huge")


def test_save_load_round_trip(tmp_path):
    config = tiny_config(str(tmp_path)).with_seed(11)
    path = config.save(tmp_path / "config.json")
    assert ExperimentConfig.load(path) == config


def test_unknown_key(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"model": {"num_bins": 33, "depth": 4}}))
    with pytest.raises(ConfigError, match="depth"):
        ExperimentConfig.load(path)


def test_missing_and_invalid_file(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "absent.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(bad)


def test_merged_overrides_nested_fields():
    config = ExperimentConfig.from_preset("desk").merged({"train": {"lr": 0.01}, "seed": 5})
    assert config.train.lr == 0.01
    assert config.train.epochs == 6
    assert config.seed == 5


def test_with_seed_reaches_every_stage():
    config = ExperimentConfig.from_preset("desk").with_seed(42)
    assert config.seed == config.model.seed == config.train.seed == config.probe.seed == 42


def test_workspace_from_environment(monkeypatch):
    monkeypatch.setenv("SPATIALTAP_WORKSPACE", "/tmp/elsewhere")
    assert ExperimentConfig.from_preset("desk").workspace == "/tmp/elsewhere"


@pytest.mark.parametrize("changes", [
    {"room_x": (4.0, 4.0)},
    {"rt60": (0.0, 0.5)},
    {"num_mics": 1},
    {"switch_2": (5.0, 7.5)},
    {"max_attempts": 0},
])
def test_sampler_validation(changes):
    with pytest.raises(ConfigError):
        SamplerConfig(**changes).validate()


def test_switch_ranges_scale_with_duration():
    sampler = SamplerConfig(duration=3.5)
    assert sampler.scaled_switch_1 == pytest.approx((0.5, 1.5))
    assert sampler.scaled_switch_2 == pytest.approx((2.5, 3.0))


def test_train_validation():
    TrainConfig(lr=0.0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(lr=-1.0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(val_fraction=1.0).validate()


def test_mic_count_must_agree():
    config = tiny_config()
    config = config.replace(sampler=SamplerConfig(num_mics=4))
    with pytest.raises(ConfigError):
        config.validate()


def test_exit_codes():
    assert ConfigError("x").exit_code == 2
    assert GeometryError("x").exit_code == 3
    assert ManifestError("x").exit_code == 3
    assert WorkspaceLockedError("x").exit_code == 3
    assert NumericInstabilityError("x").exit_code == 4
    error = DivergenceError(7, "run/checkpoint.ckpt")
    assert error.exit_code == 4
    assert "step 7" in str(error) and "run/checkpoint.ckpt" in str(error)
