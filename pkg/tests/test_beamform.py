import numpy as np
import pytest

from spatialtap.audio import MultichannelWave
from spatialtap.beamform import dsb, make_target, steering_vector, white_noise_gain
from spatialtap.errors import DataError, GeometryError
from spatialtap.geometry import ArraySpec
from spatialtap.scene import DatasetKind, sample_scenario
from spatialtap.spectral import SpectralTensor

from conftest import TINY_SAMPLER

FRAME, HOP, FS = 256, 128, 16000


def _plane_wave(array: ArraySpec, theta: float, source: np.ndarray) -> SpectralTensor:
    """STFT of a far-field plane wave from `theta`, source spectrum (T, F) at microphone 1"""
    freqs = np.arange(FRAME // 2 + 1) * FS / FRAME
    steer = steering_vector(array.num_mics, array.spacing, theta, freqs)
    return SpectralTensor(steer.phasors[:, None, :] * source[None], FRAME, HOP, FS)


def _complex_noise(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def test_broadside_is_channel_mean(array, rng):
    data = _complex_noise(rng, (3, 10, FRAME // 2 + 1))
    tensor = SpectralTensor(data, FRAME, HOP, FS)
    out = dsb(tensor, 90.0, array)
    assert out.num_channels == 1
    np.testing.assert_allclose(out.data[0], data.mean(axis=0), atol=1e-12)


@pytest.mark.parametrize("theta", [0.0, 35.0, 90.0, 140.0, 180.0])
def test_plane_wave_passes_with_unit_gain(array, rng, theta):
    source = _complex_noise(rng, (8, FRAME // 2 + 1))
    out = dsb(_plane_wave(array, theta, source), theta, array)
    np.testing.assert_allclose(out.data[0], source, atol=1e-12)
    np.testing.assert_allclose(np.abs(out.data[0]), np.abs(source), rtol=1e-6)


def test_white_noise_snr_gain(array):
    rng = np.random.default_rng(0)
    gains = []
    for _ in range(100):
        theta = rng.uniform(0.0, 180.0)
        source = _complex_noise(rng, (20, FRAME // 2 + 1))
        noise = _complex_noise(rng, (3, 20, FRAME // 2 + 1))
        clean = _plane_wave(array, theta, source)
        out = dsb(clean.like(clean.data + noise), theta, array)
        snr_in = np.mean(np.abs(source) ** 2) / np.mean(np.abs(noise[0]) ** 2)
        snr_out = np.mean(np.abs(source) ** 2) / np.mean(np.abs(out.data[0] - source) ** 2)
        gains.append(10 * np.log10(snr_out / snr_in))
    assert np.mean(gains) == pytest.approx(10 * np.log10(3), abs=0.5)


def test_steering_vector():
    freqs = np.linspace(0, 8000, 65)
    steer = steering_vector(3, 0.04, 60.0, freqs)
    np.testing.assert_allclose(np.abs(steer.phasors), 1.0)
    expected = -2 * np.pi * freqs[None, :] * np.arange(3)[:, None] * 0.04 * np.cos(np.radians(60.0)) / 343.0
    np.testing.assert_allclose(steer.phasors, np.exp(1j * expected), atol=1e-12)
    mirrored = steering_vector(3, 0.04, 60.0, -freqs)
    np.testing.assert_allclose(mirrored.phasors, np.conj(steer.phasors), atol=1e-12)
    np.testing.assert_allclose(white_noise_gain(steer), 3.0, rtol=0.05)


def test_geometry_checks(array, rng):
    tensor = SpectralTensor(_complex_noise(rng, (2, 4, FRAME // 2 + 1)), FRAME, HOP, FS)
    with pytest.raises(GeometryError):
        dsb(tensor, 45.0, array)
    with pytest.raises(GeometryError):
        steering_vector(3, 0.04, 200.0, np.zeros(3))


def test_target_of_silent_images():
    spec = sample_scenario(DatasetKind.DST_CLEAN, np.random.default_rng(0), TINY_SAMPLER)
    silent = [MultichannelWave.zeros(3, spec.num_samples, spec.sample_rate)] * 2
    target = make_target(spec, silent, 64, 32)
    assert target.num_channels == 1 and target.num_samples == spec.num_samples
    assert not np.any(target.samples)
    with pytest.raises(DataError):
        make_target(spec, silent[:1], 64, 32)


def test_target_steers_each_source(rng):
    spec = sample_scenario(DatasetKind.DST_CLEAN, np.random.default_rng(2), TINY_SAMPLER)
    n = spec.num_samples
    only_second = [MultichannelWave.zeros(3, n, spec.sample_rate),
                   MultichannelWave(rng.standard_normal((3, n)), spec.sample_rate)]
    doubled = [only_second[1], only_second[1]]
    a = make_target(spec, only_second, 64, 32)
    b = make_target(spec, doubled, 64, 32)
    assert np.any(a.samples)
    assert not np.allclose(a.samples, b.samples - a.samples)
