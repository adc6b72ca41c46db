import numpy as np
import pytest
from scipy.signal import correlate, welch

from spatialtap.speech import Voice, speechlike_components, synth_speechlike


def _flatness(x: np.ndarray, fs: int = 16000) -> float:
    _, psd = welch(x, fs, nperseg=512)
    psd = psd[1:] + 1e-30
    return float(np.exp(np.mean(np.log(psd))) / np.mean(psd))


def test_peak_normalized_and_deterministic():
    a = synth_speechlike(7.0, np.random.default_rng(1))
    b = synth_speechlike(7.0, np.random.default_rng(1))
    assert len(a) == 7 * 16000
    assert np.max(np.abs(a)) == pytest.approx(0.5)
    assert np.array_equal(a, b)


def test_different_seeds_are_decorrelated():
    a = synth_speechlike(2.0, np.random.default_rng(1))
    b = synth_speechlike(2.0, np.random.default_rng(2))
    xcorr = correlate(a, b, mode="full", method="fft")
    assert np.max(np.abs(xcorr)) / np.sqrt(np.sum(a ** 2) * np.sum(b ** 2)) < 0.5


def test_noise_flatter_than_harmonics():
    harmonic, noise, _, _ = speechlike_components(2.0, np.random.default_rng(3))
    assert _flatness(noise) > _flatness(harmonic)


def test_contains_pauses():
    _, _, envelope, _ = speechlike_components(3.0, np.random.default_rng(4))
    silent = envelope == 0.0
    assert 0.0 < silent.mean() < 0.8


@pytest.mark.parametrize("duration", [0.5, 1.3, 7.0])
def test_components_are_finite(duration):
    for seed in range(30):
        harmonic, noise, envelope, _ = speechlike_components(duration, np.random.default_rng(seed))
        assert np.all(np.isfinite(envelope))
        assert np.all(envelope >= 0.0)
        assert np.all(np.isfinite(harmonic)) and np.all(np.isfinite(noise))
        assert np.all(np.isfinite(synth_speechlike(duration, np.random.default_rng(seed))))


def test_voice_is_stable_per_speaker():
    assert Voice.for_speaker("spk-17") == Voice.for_speaker("spk-17")
    assert Voice.for_speaker("spk-17") != Voice.for_speaker("spk-18")
    assert 85.0 <= Voice.for_speaker("spk-17").f0 <= 240.0


def test_rejects_non_positive_duration():
    with pytest.raises(ValueError):
        synth_speechlike(0.0, np.random.default_rng(0))
