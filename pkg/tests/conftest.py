"""
Shared fixtures: tiny rooms, tiny networks, one small rendered workspace
"""

import numpy as np
import pytest

from spatialtap.config import ExperimentConfig, ModelConfig, ProbeConfig, SamplerConfig, TrainConfig
from spatialtap.corpus import SyntheticCorpus
from spatialtap.dataset import build_dataset
from spatialtap.geometry import ArraySpec, RoomSpec
from spatialtap.scene import DatasetKind
from spatialtap.workspace import Workspace

# 8 kHz, one second, small lively rooms: fast to render, same code paths
TINY_SAMPLER = SamplerConfig(
    room_x=(3.0, 4.0),
    room_y=(3.0, 4.0),
    room_z=(2.5, 3.0),
    rt60=(0.1, 0.2),
    duration=1.0,
    sample_rate=8000,
    test_snr_grid=(0.0, 10.0),
)

TINY_MODEL = ModelConfig(num_bins=33, u_in=4, u_out=4, encoder_widths=(8, 4), decoder_widths=(4, 8))

# even smaller network for gradient checks
MICRO_MODEL = ModelConfig(num_mics=2, num_bins=5, u_in=3, u_out=3, encoder_widths=(4, 3), decoder_widths=(3, 4))


def tiny_config(workspace: str = "workspace") -> ExperimentConfig:
    return ExperimentConfig(
        workspace=workspace,
        preset="desk",
        train_count=4,
        test_count=2,
        sampler=TINY_SAMPLER,
        model=TINY_MODEL,
        train=TrainConfig(epochs=1, checkpoint_every=2, val_fraction=0.25),
        probe=ProbeConfig(trials=2, attempts=2),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def room():
    return RoomSpec((5.0, 4.0, 3.0), rt60=0.3)


@pytest.fixture
def array():
    return ArraySpec(3, 0.04, (2.5, 2.0, 1.5), (1.0, 0.0, 0.0))


@pytest.fixture(autouse=True)
def _no_workspace_env(monkeypatch):
    monkeypatch.delenv("SPATIALTAP_WORKSPACE", raising=False)


@pytest.fixture(scope="session")
def tiny_workspace(tmp_path_factory):
    """DS-clean (4), DST-clean (2) and DST-WGN (2 x 2 SNRs) rendered once per session"""
    root = tmp_path_factory.mktemp("workspace")
    ws = Workspace(root)
    corpus = SyntheticCorpus()
    manifests = {}
    for kind, count in ((DatasetKind.DS_CLEAN, 4), (DatasetKind.DST_CLEAN, 2), (DatasetKind.DST_WGN, 2)):
        manifests[kind] = build_dataset(kind, count, 0, corpus, ws.dataset_dir(kind), sampler=TINY_SAMPLER,
                                        frame_len=TINY_MODEL.frame_len, hop=TINY_MODEL.hop, progress=False)
    return ws, manifests
