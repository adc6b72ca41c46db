import json
import logging

import numpy as np
import pytest

from spatialtap.corpus import SyntheticCorpus
from spatialtap.dataset import (
    MANIFEST_NAME, build_dataset, load_manifest, rerender_entry, sequence_seed, snr_tag,
)
from spatialtap.errors import ManifestError
from spatialtap.scene import CLEAN, DatasetKind

from conftest import TINY_MODEL, TINY_SAMPLER


def _build(kind, count, root, seed=0, **kwargs):
    return build_dataset(kind, count, seed, SyntheticCorpus(), root, sampler=TINY_SAMPLER,
                         frame_len=TINY_MODEL.frame_len, hop=TINY_MODEL.hop, progress=False, **kwargs)


def test_noisy_test_set_iterates_snr_grid(tiny_workspace):
    _, manifests = tiny_workspace
    manifest = manifests[DatasetKind.DST_WGN]
    assert len(manifest.entries) == 2 * len(TINY_SAMPLER.test_snr_grid)
    assert sorted({e.snr_db for e in manifest.entries}) == [0.0, 10.0]
    assert manifest.snr_grid == (0.0, 10.0)
    # one rendering per sequence, one noise realization per SNR
    first = [e for e in manifest.entries if e.id.startswith("seq_0000")]
    assert len({e.target for e in first}) == 1
    assert [e.noise_stream for e in first] == [0, 1]


def test_clean_sets_are_clean(tiny_workspace):
    _, manifests = tiny_workspace
    for kind in (DatasetKind.DS_CLEAN, DatasetKind.DST_CLEAN):
        assert all(e.snr_db == CLEAN for e in manifests[kind].entries)


def test_entries_match_their_files(tiny_workspace):
    _, manifests = tiny_workspace
    manifest = manifests[DatasetKind.DST_CLEAN]
    entry = manifest.entries[0]
    mixture = manifest.mixture(entry)
    spec = manifest.scenario(entry)
    assert mixture.num_channels == 3 and mixture.sample_rate == TINY_SAMPLER.sample_rate
    assert mixture.num_samples == spec.num_samples
    assert manifest.target(entry).num_channels == 1
    assert len(entry.activity) == -(-mixture.num_samples // TINY_MODEL.hop) + 1
    assert spec.seed == entry.seed


def test_manifest_reload(tiny_workspace):
    ws, manifests = tiny_workspace
    loaded = load_manifest(ws.dataset_dir(DatasetKind.DST_WGN))
    original = manifests[DatasetKind.DST_WGN]
    assert loaded.kind is DatasetKind.DST_WGN
    assert loaded.entries == original.entries
    assert loaded.frame_len == TINY_MODEL.frame_len and loaded.hop == TINY_MODEL.hop
    assert loaded.sampler["num_mics"] == 3


def test_rebuild_is_bit_identical(tmp_path):
    a = _build(DatasetKind.DST_1SPK, 2, tmp_path / "a", seed=3)
    b = _build(DatasetKind.DST_1SPK, 2, tmp_path / "b", seed=3)
    for ea, eb in zip(a.entries, b.entries):
        assert a.path_of(ea.mixture).read_bytes() == b.path_of(eb.mixture).read_bytes()
        assert a.path_of(ea.target).read_bytes() == b.path_of(eb.target).read_bytes()
    assert (tmp_path / "a" / MANIFEST_NAME).read_bytes() == (tmp_path / "b" / MANIFEST_NAME).read_bytes()


def test_single_speaker_set(tmp_path):
    manifest = _build(DatasetKind.DST_1SPK, 2, tmp_path)
    for entry in manifest.entries:
        spec = manifest.scenario(entry)
        assert spec.sources[0].speaker_id == spec.sources[1].speaker_id
        assert spec.sources[0].position != spec.sources[1].position


@pytest.mark.slow
def test_worker_count_does_not_matter(tmp_path):
    serial = _build(DatasetKind.DST_CLEAN, 3, tmp_path / "serial")
    parallel = _build(DatasetKind.DST_CLEAN, 3, tmp_path / "parallel", workers=2)
    for ea, eb in zip(serial.entries, parallel.entries):
        assert serial.path_of(ea.mixture).read_bytes() == parallel.path_of(eb.mixture).read_bytes()


def test_rerender_reproduces_mixture(tiny_workspace):
    _, manifests = tiny_workspace
    manifest = manifests[DatasetKind.DST_WGN]
    entry = manifest.entries[1]
    stored = manifest.mixture(entry)
    rendered = rerender_entry(manifest, entry, SyntheticCorpus(), TINY_SAMPLER)
    # files hold 32-bit floats
    np.testing.assert_allclose(rendered.samples, stored.samples, rtol=1e-6, atol=1e-6)


def test_empty_dataset(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        manifest = _build(DatasetKind.DST_CLEAN, 0, tmp_path)
    assert manifest.entries == []
    assert load_manifest(tmp_path).entries == []
    assert "count is 0" in caplog.text


def test_manifest_errors(tmp_path):
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "nothing")
    path = tmp_path / MANIFEST_NAME
    path.write_text(json.dumps({"version": 99}))
    with pytest.raises(ManifestError):
        load_manifest(path)
    path.write_text("{")
    with pytest.raises(ManifestError):
        load_manifest(path)
    path.write_text(json.dumps({"version": 1, "kind": "DST-clean"}))
    with pytest.raises(ManifestError):
        load_manifest(path)


def test_sequence_seeds():
    assert sequence_seed(0, DatasetKind.DST_CLEAN, 1) == sequence_seed(0, DatasetKind.DST_CLEAN, 1)
    seeds = {sequence_seed(0, kind, i) for kind in DatasetKind for i in range(10)}
    assert len(seeds) == 10 * len(DatasetKind)
    assert sequence_seed(0, DatasetKind.DST_CLEAN, 1) != sequence_seed(1, DatasetKind.DST_CLEAN, 1)


def test_snr_tags():
    assert snr_tag(CLEAN) == "clean"
    assert snr_tag(5.0) == "snr+05"
    assert snr_tag(-10.0) == "snr-10"
    assert snr_tag(50.0) == "snr+50"
