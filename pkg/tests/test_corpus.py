import logging

import numpy as np
import pytest

from spatialtap.audio import MultichannelWave, read_wave, write_wave
from spatialtap.corpus import SyntheticCorpus, WavCorpus, open_corpus
from spatialtap.errors import CorpusExhaustedError, SampleRateError, ShapeError

FS = 16000


@pytest.fixture
def wav_root(tmp_path, rng):
    for split, speakers in (("train", ("alice", "bob")), ("test", ("carol",))):
        for speaker in speakers:
            for i in range(2):
                write_wave(tmp_path / split / speaker / f"utt{i}.wav",
                           MultichannelWave(0.1 * rng.standard_normal(FS // 2), FS))
    return tmp_path


def test_synthetic_splits_are_disjoint():
    corpus = SyntheticCorpus(speakers_per_split=8)
    train, test = corpus.speakers("train"), corpus.speakers("test")
    assert len(train) == len(test) == 8
    assert not set(train) & set(test)
    x = corpus.utterance(train[0], 1.5, FS, np.random.default_rng(0))
    assert len(x) == int(1.5 * FS)


def test_wav_corpus_speakers(wav_root):
    corpus = WavCorpus(wav_root)
    assert corpus.speakers("train") == ["alice", "bob"]
    assert corpus.speakers("test") == ["carol"]
    assert corpus.describe()["type"] == "wav"


def test_wav_corpus_concatenates(wav_root):
    x = WavCorpus(wav_root).utterance("alice", 0.8, FS, np.random.default_rng(0))
    assert len(x) == int(0.8 * FS)


def test_wav_corpus_repeats_short_speakers(wav_root, caplog):
    with caplog.at_level(logging.WARNING):
        x = WavCorpus(wav_root).utterance("carol", 5.0, FS, np.random.default_rng(0))
    assert len(x) == 5 * FS
    assert "repeating" in caplog.text


def test_wav_corpus_errors(tmp_path, wav_root, rng):
    with pytest.raises(CorpusExhaustedError):
        WavCorpus(tmp_path / "missing")
    with pytest.raises(CorpusExhaustedError):
        WavCorpus(wav_root).utterance("nobody", 1.0, FS, rng)
    with pytest.raises(SampleRateError):
        WavCorpus(wav_root).utterance("alice", 1.0, 8000, rng)
    write_wave(wav_root / "train" / "stereo" / "a.wav", MultichannelWave(np.zeros((2, FS)), FS))
    with pytest.raises(ShapeError):
        WavCorpus(wav_root).utterance("stereo", 0.5, FS, rng)


def test_open_corpus(wav_root):
    assert isinstance(open_corpus(None), SyntheticCorpus)
    assert isinstance(open_corpus(str(wav_root)), WavCorpus)


@pytest.mark.parametrize("fmt", ["float", "pcm16"])
def test_wave_file_round_trip(tmp_path, rng, fmt):
    wave = MultichannelWave(0.1 * rng.standard_normal((3, 2000)), 8000)
    restored = read_wave(write_wave(tmp_path / "x.wav", wave, fmt))
    assert restored.num_channels == 3 and restored.sample_rate == 8000
    tolerance = 1e-7 if fmt == "float" else 1e-4
    np.testing.assert_allclose(restored.samples, wave.samples, atol=tolerance)
