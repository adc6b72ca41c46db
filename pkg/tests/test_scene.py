import json

import numpy as np
import pytest

from spatialtap.audio import MultichannelWave
from spatialtap.config import SamplerConfig
from spatialtap.corpus import SyntheticCorpus
from spatialtap.errors import (
    ConstraintInfeasibleError, CorpusExhaustedError, SampleRateError, SignalLengthError, UndefinedSNRError,
)
from spatialtap.rir import synth_rirs
from spatialtap.scene import (
    CLEAN, PAUSE, DatasetKind, ScenarioSpec, dry_signals, frame_activity, mix_noise, render_scene,
    sample_scenario,
)

from conftest import TINY_SAMPLER

FRAME, HOP = 64, 32


def _spec(kind=DatasetKind.DST_CLEAN, seed=0):
    return sample_scenario(kind, np.random.default_rng(seed), TINY_SAMPLER)


def test_two_position_scenario():
    spec = sample_scenario(DatasetKind.DST_CLEAN, np.random.default_rng(7))
    assert spec.num_sources == 2
    assert abs(spec.sources[0].doa_deg - spec.sources[1].doa_deg) >= 20.0
    assert [seg.source for seg in spec.schedule] == [0, 1, 0]
    assert spec.schedule[0].start == 0.0 and spec.schedule[-1].end == spec.duration
    assert spec.schedule[0].end == spec.switch_times[0] == spec.schedule[1].start
    assert spec.sources[0].speaker_id != spec.sources[1].speaker_id


@pytest.mark.parametrize("kind", list(DatasetKind))
def test_every_kind_samples_from_member_and_name(kind):
    assert DatasetKind.parse(kind) is kind
    assert DatasetKind.parse(kind.value.upper()) is kind
    by_member = sample_scenario(kind, np.random.default_rng(3), TINY_SAMPLER)
    by_name = sample_scenario(kind.value, np.random.default_rng(3), TINY_SAMPLER)
    assert by_member.kind is kind
    assert by_member.to_dict() == by_name.to_dict()


def test_shared_position():
    for seed in range(5):
        spec = sample_scenario(DatasetKind.DST_1POS, np.random.default_rng(seed))
        assert spec.sources[0].position == spec.sources[1].position
        assert spec.sources[0].doa_deg == spec.sources[1].doa_deg
        assert spec.sources[0].speaker_id != spec.sources[1].speaker_id


def test_single_speaker_moves():
    for seed in range(5):
        spec = sample_scenario(DatasetKind.DST_1SPK, np.random.default_rng(seed), speakers=["a", "b", "c"])
        assert spec.sources[0].speaker_id == spec.sources[1].speaker_id
        assert abs(spec.sources[0].doa_deg - spec.sources[1].doa_deg) >= 20.0


def test_sampler_bounds():
    config = SamplerConfig()
    rng = np.random.default_rng(0)
    for _ in range(1000):
        spec = sample_scenario(DatasetKind.DS_CLEAN, rng, config)
        for value, (lo, hi) in zip(spec.room.dimensions, (config.room_x, config.room_y, config.room_z)):
            assert lo <= value <= hi
        assert config.rt60[0] <= spec.room.rt60 <= config.rt60[1]
        assert 1.0 <= spec.switch_times[0] <= 3.0
        assert 5.0 <= spec.switch_times[1] <= 6.0
        for source in spec.sources:
            assert spec.room.wall_distance(source.position) >= config.min_wall_distance
            assert spec.array.distance_to(source.position) >= config.min_array_distance
        for mic in spec.array.mic_positions:
            assert spec.room.contains(mic)
        assert abs(spec.sources[0].doa_deg - spec.sources[1].doa_deg) >= config.min_doa_separation


def test_infeasible_constraint():
    config = SamplerConfig(room_z=(1.0, 1.5), min_wall_distance=0.9, max_attempts=10)
    with pytest.raises(ConstraintInfeasibleError) as info:
        sample_scenario(DatasetKind.DST_CLEAN, np.random.default_rng(0), config)
    assert "wall distance" in info.value.constraint
    assert info.value.attempts == 10


def test_too_few_speakers():
    with pytest.raises(CorpusExhaustedError):
        sample_scenario(DatasetKind.DST_CLEAN, np.random.default_rng(0), speakers=["only"])


def test_spec_json_round_trip():
    spec = _spec().with_snr(5.0)
    assert ScenarioSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    assert spec.to_dict()["schedule"][0]["source"] == 1


def test_silent_sources():
    spec = _spec()
    n = spec.num_samples
    mixture, images, activity = render_scene(spec, [np.zeros(n), np.zeros(n)], FRAME, HOP)
    assert not np.any(mixture.samples)
    assert np.all(activity == PAUSE)
    assert len(images) == 2 and images[0].num_channels == 3


def test_impulse_reproduces_rir():
    spec = _spec()
    n = spec.num_samples
    impulse = np.zeros(n)
    impulse[0] = 1.0
    mixture, _, _ = render_scene(spec, [impulse, np.zeros(n)], FRAME, HOP)
    rirs = synth_rirs(spec.room, spec.sources[0].position, spec.array.mic_positions, spec.sample_rate)
    span = min(rirs.shape[1], int(spec.switch_times[0] * spec.sample_rate))
    np.testing.assert_allclose(mixture.samples[:, :span], rirs[:, :span], atol=1e-10)


def test_render_linearity(rng):
    spec = _spec()
    n = spec.num_samples
    a = [rng.standard_normal(n), rng.standard_normal(n)]
    b = [rng.standard_normal(n), rng.standard_normal(n)]
    both, _, _ = render_scene(spec, [a[0] + b[0], a[1] + b[1]], FRAME, HOP)
    first, _, _ = render_scene(spec, a, FRAME, HOP)
    second, _, _ = render_scene(spec, b, FRAME, HOP)
    expected = first.samples + second.samples
    assert np.max(np.abs(both.samples - expected)) <= 1e-10 * np.max(np.abs(expected))


def test_segments_are_disjoint():
    spec = _spec()
    n = spec.num_samples
    gated = np.stack([spec.gate(0), spec.gate(1)])
    assert np.all(gated.sum(axis=0) == 1.0)
    _, images, activity = render_scene(spec, [np.ones(n), np.ones(n)], FRAME, HOP)
    start = int(spec.switch_times[0] * spec.sample_rate)
    assert np.max(np.abs(images[1].samples[:, :start])) < 1e-9 * np.max(np.abs(images[1].samples))
    assert set(np.unique(activity)) <= {PAUSE, 1, 2}
    assert activity[len(activity) // 2] == 2


def test_activity_labels_follow_schedule():
    spec = _spec()
    n = spec.num_samples
    gated = np.stack([spec.gate(0), spec.gate(1)])
    labels = frame_activity(gated, spec, FRAME, HOP)
    for tau, label in enumerate(labels[1:-1], start=1):
        source = spec.source_at(tau * HOP / spec.sample_rate)
        assert label == source + 1
    quiet = gated.copy()
    quiet[:, : n // 4] *= 1e-3
    labels = frame_activity(quiet, spec, FRAME, HOP, threshold_db=-40.0)
    assert np.all(labels[1: n // 4 // HOP - 1] == PAUSE)


def test_dry_signal_checks():
    spec = _spec()
    n = spec.num_samples
    with pytest.raises(SignalLengthError):
        render_scene(spec, [np.ones(n)], FRAME, HOP)
    with pytest.raises(SignalLengthError):
        render_scene(spec, [np.ones(10), np.ones(n)], FRAME, HOP)
    with pytest.raises(SampleRateError):
        render_scene(spec, [MultichannelWave(np.ones(n), 16000), np.ones(n)], FRAME, HOP)


def test_single_speaker_shares_utterance():
    spec = sample_scenario(DatasetKind.DST_1SPK, np.random.default_rng(3), TINY_SAMPLER, speakers=["a", "b"])
    dry = dry_signals(spec, SyntheticCorpus(), np.random.default_rng(0))
    assert dry[0] is dry[1]


def test_noise_clean_is_identity(rng):
    wave = MultichannelWave(rng.standard_normal((3, 1000)))
    assert mix_noise(wave, CLEAN, rng) is wave


def test_noise_at_zero_db(rng):
    wave = MultichannelWave(rng.standard_normal((3, 7 * 16000)) * [[1.0], [0.5], [2.0]])
    noisy = mix_noise(wave, 0.0, np.random.default_rng(5))
    noise = noisy.samples - wave.samples
    per_channel = np.mean(noise ** 2, axis=1)
    np.testing.assert_allclose(per_channel, wave.power(), rtol=0.01)


def test_noise_at_ten_db(rng):
    wave = MultichannelWave(np.ones((2, 16000)))
    noise = mix_noise(wave, 10.0, rng).samples - wave.samples
    np.testing.assert_allclose(np.var(noise, axis=1), 0.1, rtol=0.05)
    assert abs(np.corrcoef(noise)[0, 1]) < 0.05


def test_noise_is_reproducible(rng):
    wave = MultichannelWave(rng.standard_normal((3, 4000)))
    a = mix_noise(wave, -5.0, np.random.default_rng(9))
    b = mix_noise(wave, -5.0, np.random.default_rng(9))
    assert np.array_equal(a.samples, b.samples)


def test_noise_on_silence():
    with pytest.raises(UndefinedSNRError):
        mix_noise(MultichannelWave.zeros(2, 100), 10.0, np.random.default_rng(0))
