"""
Experiment configuration

Settings are resolved in this order (later wins):
    1. Preset defaults ("paper" or "desk")
    2. Environment (SPATIALTAP_WORKSPACE)
    3. JSON config file (--config)
    4. Command-line flags

Usage:
    config = ExperimentConfig.from_preset("desk")
    config = config.replace(seed=3)
    config.save("run.json")
    assert ExperimentConfig.load("run.json") == config
"""

import json
import os
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ConfigError

WORKSPACE_ENV = "SPATIALTAP_WORKSPACE"
CONFIG_VERSION = 1

PRESETS = ("paper", "desk")


@dataclass(frozen=True)
class SamplerConfig:
    """Ranges used when drawing acoustic scenarios"""

    room_x: Tuple[float, float] = (4.0, 8.0)
    room_y: Tuple[float, float] = (4.0, 8.0)
    room_z: Tuple[float, float] = (1.0, 4.0)
    rt60: Tuple[float, float] = (0.2, 0.5)
    num_mics: int = 3
    spacing: float = 0.04
    min_wall_distance: float = 0.3
    min_array_distance: float = 0.3
    min_doa_separation: float = 20.0
    # Switch ranges refer to `reference_duration` and scale with `duration`
    switch_1: Tuple[float, float] = (1.0, 3.0)
    switch_2: Tuple[float, float] = (5.0, 6.0)
    reference_duration: float = 7.0
    duration: float = 7.0
    sample_rate: int = 16000
    speed_of_sound: float = 343.0
    max_attempts: int = 1000
    train_snr_grid: Tuple[float, ...] = tuple(float(s) for s in range(-10, 55, 5))
    test_snr_grid: Tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0, 20.0, 30.0, 50.0)
    pause_threshold_db: float = -40.0

    def validate(self):
        for name in ("room_x", "room_y", "room_z", "rt60", "switch_1", "switch_2"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ConfigError(f"sampler range {name}={lo, hi} is degenerate")
        if self.room_x[0] <= 0 or self.room_y[0] <= 0 or self.room_z[0] <= 0:
            raise ConfigError("room dimensions must be positive")
        if self.rt60[0] <= 0:
            raise ConfigError("rt60 must be positive")
        if self.num_mics < 2 or self.spacing <= 0:
            raise ConfigError("array needs at least 2 microphones and positive spacing")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise ConfigError("duration and sample_rate must be positive")
        if self.scaled_switch_2[1] >= self.duration or self.scaled_switch_1[1] >= self.scaled_switch_2[0]:
            raise ConfigError("switch-time ranges must be ordered and inside the sequence")
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")

    @property
    def time_scale(self) -> float:
        return self.duration / self.reference_duration

    @property
    def scaled_switch_1(self) -> Tuple[float, float]:
        return (self.switch_1[0] * self.time_scale, self.switch_1[1] * self.time_scale)

    @property
    def scaled_switch_2(self) -> Tuple[float, float]:
        return (self.switch_2[0] * self.time_scale, self.switch_2[1] * self.time_scale)


@dataclass(frozen=True)
class ModelConfig:
    """Masking network layout (see spatialtap.network.MaskNet)"""

    num_mics: int = 3
    num_bins: int = 513
    u_in: int = 128
    u_out: int = 128
    encoder_widths: Tuple[int, int] = (256, 128)
    decoder_widths: Tuple[int, int] = (128, 256)
    compression: float = 0.3
    mask_cap: float = 10.0
    seed: int = 0

    @property
    def frame_len(self) -> int:
        return 2 * (self.num_bins - 1)

    @property
    def hop(self) -> int:
        return self.frame_len // 2

    def validate(self):
        if self.num_bins < 2:
            raise ConfigError("num_bins must be >= 2")
        if min(self.u_in, self.u_out, self.num_mics, *self.encoder_widths, *self.decoder_widths) < 1:
            raise ConfigError("all layer widths must be positive")
        if len(self.encoder_widths) != 2 or len(self.decoder_widths) != 2:
            raise ConfigError("encoder and decoder have exactly two layers each")
        if self.mask_cap <= 0:
            raise ConfigError("mask_cap must be positive")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    betas: Tuple[float, float] = (0.9, 0.999)
    clip_norm: float = 5.0
    epochs: int = 10
    max_steps: Optional[int] = None
    checkpoint_every: int = 500
    val_fraction: float = 0.1
    threads: int = 1
    seed: int = 0

    def validate(self):
        if self.lr < 0:
            raise ConfigError("learning rate must be >= 0")
        if self.clip_norm <= 0:
            raise ConfigError("clip_norm must be positive")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in [0, 1)")
        if self.threads < 1 or self.epochs < 0 or self.checkpoint_every < 1:
            raise ConfigError("threads, epochs and checkpoint_every must be positive")


@dataclass(frozen=True)
class ProbeConfig:
    taps: Tuple[str, ...] = ("input", "output")
    trials: int = 5
    attempts: int = 5
    max_iter: int = 100
    center_update: str = "median"      # "median" | "mean"
    weighting: str = "unweighted"      # "unweighted" | "weighted"
    normalization: str = "joint"       # "joint" | "separate"
    seed: int = 0

    def validate(self):
        if not self.taps or any(t not in ("input", "output") for t in self.taps):
            raise ConfigError(f"taps must be a subset of ('input', 'output'), got {self.taps}")
        if self.center_update not in ("median", "mean"):
            raise ConfigError(f"unknown center update: {self.center_update}")
        if self.weighting not in ("unweighted", "weighted"):
            raise ConfigError(f"unknown grouping weighting: {self.weighting}")
        if self.normalization not in ("joint", "separate"):
            raise ConfigError(f"unknown normalization: {self.normalization}")
        if self.trials < 1 or self.attempts < 1 or self.max_iter < 1:
            raise ConfigError("trials, attempts and max_iter must be >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    workspace: str = "workspace"
    corpus: Optional[str] = None        # None -> synthetic speech-like corpus
    preset: str = "paper"
    seed: int = 0
    train_count: int = 1000
    test_count: int = 50
    workers: int = 1
    formats: Tuple[str, ...] = ("csv", "json")
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    probe: ProbeConfig = field(default_factory=ProbeConfig)

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def from_preset(cls, name: str = "paper") -> "ExperimentConfig":
        if name == "paper":
            config = cls(preset="paper")
        elif name == "desk":
            config = cls(
                preset="desk",
                train_count=200,
                test_count=25,
                sampler=SamplerConfig(duration=4.0),
                model=ModelConfig(num_bins=129, u_in=32, u_out=32,
                                  encoder_widths=(64, 32), decoder_widths=(32, 64)),
                train=TrainConfig(epochs=6, checkpoint_every=200),
            )
        else:
            raise ConfigError(f"unknown preset '{name}' (expected one of {PRESETS})")

        workspace = os.environ.get(WORKSPACE_ENV, "")
        if workspace:
            config = config.replace(workspace=workspace)
        return config

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Global seed: datasets, model init, training order and probing all follow it"""
        return self.replace(seed=seed, model=dataclasses.replace(self.model, seed=seed),
                            train=dataclasses.replace(self.train, seed=seed),
                            probe=dataclasses.replace(self.probe, seed=seed))

    def validate(self) -> "ExperimentConfig":
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset '{self.preset}'")
        if self.train_count < 0 or self.test_count < 0 or self.workers < 1:
            raise ConfigError("counts must be >= 0 and workers >= 1")
        if any(f not in ("csv", "json") for f in self.formats):
            raise ConfigError(f"unknown output format in {self.formats}")
        if self.model.num_mics != self.sampler.num_mics:
            raise ConfigError("model.num_mics must match sampler.num_mics")
        self.sampler.validate()
        self.model.validate()
        self.train.validate()
        self.probe.validate()
        return self

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict[str, Any]:
        data = dataclasses.asdict(self)
        data["version"] = CONFIG_VERSION
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        data = dict(data)
        version = data.pop("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise ConfigError(f"unsupported config version {version}")

        nested = {"sampler": SamplerConfig, "model": ModelConfig,
                  "train": TrainConfig, "probe": ProbeConfig}
        kwargs = {}
        for key, value in data.items():
            if key in nested:
                kwargs[key] = _build(nested[key], value, key)
            else:
                kwargs[key] = value
        return _build(cls, kwargs, "config")

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}")
        return cls.from_dict(data)

    def merged(self, overrides: Dict[str, Any]) -> "ExperimentConfig":
        """Apply a (possibly nested) dict of overrides on top of this config"""
        data = self.to_dict()
        for key, value in overrides.items():
            if isinstance(value, dict) and isinstance(data.get(key), dict):
                data[key] = {**data[key], **value}
            else:
                data[key] = value
        return ExperimentConfig.from_dict(data)


def _build(cls, values, where: str):
    if isinstance(values, cls):
        return values
    if not isinstance(values, dict):
        raise ConfigError(f"{where}: expected an object, got {type(values).__name__}")
    known = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    kwargs = {k: _tuplify(v) for k, v in values.items()}
    try:
        return cls(**kwargs)
    except TypeError as e:
        raise ConfigError(f"{where}: {e}")


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value
