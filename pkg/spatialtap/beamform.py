"""
Delay-and-sum beamforming for uniform linear arrays

Far-field steering in the STFT domain, referenced to microphone 1:
    steer_m(f) = exp(-j 2 pi f (m - 1) d cos(theta) / c)
    Y(tau, f)  = (1 / M) sum_m conj(steer_m(f)) X_m(tau, f)
A plane wave from theta passes with unit gain.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .audio import MultichannelWave
from .errors import DataError, GeometryError
from .geometry import SPEED_OF_SOUND, ArraySpec
from .spectral import SpectralTensor, istft, stft


@dataclass(frozen=True, eq=False)
class SteeringVector:
    phasors: np.ndarray       # (M, F) unit-magnitude complex
    doa_deg: float
    frequencies: np.ndarray   # (F,) Hz
    spacing: float
    speed_of_sound: float = SPEED_OF_SOUND

    @property
    def num_mics(self) -> int:
        return self.phasors.shape[0]


def steering_vector(num_mics: int, spacing: float, doa_deg: float, frequencies: np.ndarray,
                    speed_of_sound: float = SPEED_OF_SOUND) -> SteeringVector:
    if not 0.0 <= doa_deg <= 180.0:
        raise GeometryError(f"DoA must be within [0, 180] deg, got {doa_deg}")
    freqs = np.asarray(frequencies, dtype=float)
    delays = np.arange(num_mics) * spacing * np.cos(np.radians(doa_deg)) / speed_of_sound
    phasors = np.exp(-2j * np.pi * np.outer(delays, freqs))
    return SteeringVector(phasors, float(doa_deg), freqs, spacing, speed_of_sound)


def white_noise_gain(steer: SteeringVector) -> np.ndarray:
    """Per-bin array gain against spatially white noise for DSB weights"""
    weights = steer.phasors / steer.num_mics
    response = np.abs(np.sum(np.conj(weights) * steer.phasors, axis=0)) ** 2
    return response / np.sum(np.abs(weights) ** 2, axis=0)


def dsb(tensor: SpectralTensor, theta: float, array: ArraySpec,
        speed_of_sound: float = SPEED_OF_SOUND) -> SpectralTensor:
    """Steer the array towards `theta` degrees; returns a single-channel tensor"""
    if tensor.num_channels != array.num_mics:
        raise GeometryError(f"tensor has {tensor.num_channels} channels, array has {array.num_mics} microphones")
    steer = steering_vector(array.num_mics, array.spacing, theta, tensor.frequencies, speed_of_sound)
    out = np.einsum("mf,mtf->tf", np.conj(steer.phasors), tensor.data) / array.num_mics
    return tensor.like(out[np.newaxis])


def make_target(spec, images: Sequence[Optional[MultichannelWave]],
                frame_len: int = 1024, hop: int = 512) -> MultichannelWave:
    """
    Training target: every source image beamformed towards its own DoA, summed

    Args:
        spec: ScenarioSpec the images were rendered for
        images: one MultichannelWave per source
    """
    if len(images) != spec.num_sources or any(im is None for im in images):
        raise DataError(f"need one image per source ({spec.num_sources}), got {len(images)}")

    target = None
    for source, image in zip(spec.sources, images):
        steered = dsb(stft(image, frame_len, hop), source.doa_deg, spec.array, spec.room.speed_of_sound)
        wave = istft(steered, image.num_samples)
        target = wave if target is None else target + wave
    return target
