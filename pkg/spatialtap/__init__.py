"""
spatialtap - spatial feature probing workbench

Simulates switching-talker scenes for a small microphone array, trains a
complex-valued masking network on them and measures how well its
bottleneck features group frames by source position.
"""

__version__ = "0.1.0"
__author__ = "spatialtap contributors"
__license__ = "MIT"

from .config import ExperimentConfig, ModelConfig, ProbeConfig, SamplerConfig, TrainConfig
from .errors import SpatialTapError
from .spectral import SpectralTensor, istft, stft
from .beamform import dsb, make_target
from .scene import DatasetKind, ScenarioSpec, render_scene, sample_scenario
from .dataset import DatasetManifest, build_dataset, load_manifest
from .network import MaskNet, apply_mask, forward, tap_features
from .checkpoint import Checkpoint
from .training import train
from .probe import (
    ClusterReport,
    avg_center_distance,
    grouping_success,
    kcluster,
    label_clusters,
    normalize,
    pause_fraction,
    run_protocol,
)

__all__ = [
    "ExperimentConfig",
    "ModelConfig",
    "ProbeConfig",
    "SamplerConfig",
    "TrainConfig",
    "SpatialTapError",
    "SpectralTensor",
    "stft",
    "istft",
    "dsb",
    "make_target",
    "DatasetKind",
    "ScenarioSpec",
    "render_scene",
    "sample_scenario",
    "DatasetManifest",
    "build_dataset",
    "load_manifest",
    "MaskNet",
    "apply_mask",
    "forward",
    "tap_features",
    "Checkpoint",
    "train",
    "ClusterReport",
    "avg_center_distance",
    "grouping_success",
    "kcluster",
    "label_clusters",
    "normalize",
    "pause_fraction",
    "run_protocol",
]
