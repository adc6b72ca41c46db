"""
Multichannel waveforms and WAV file I/O

Files are RIFF WAV, 32-bit float by default (16-bit PCM on request),
channels interleaved. soundfile handles the container.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import soundfile as sf

from .errors import SampleRateError, ShapeError, DataError

logger = logging.getLogger(__name__)

SUBTYPES = {"float": "FLOAT", "pcm16": "PCM_16"}


@dataclass(frozen=True, eq=False)
class MultichannelWave:
    """
    Real time-domain signal, shape (M, T)

    A mono wave is simply M = 1.
    """

    samples: np.ndarray
    sample_rate: int = 16000

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2:
            raise ShapeError(f"wave must be (channels, samples), got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise DataError("wave contains non-finite samples")
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    @property
    def num_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    def power(self) -> float:
        """Mean power over channels and samples"""
        return float(np.mean(self.samples ** 2))

    def __add__(self, other: "MultichannelWave") -> "MultichannelWave":
        if other.sample_rate != self.sample_rate:
            raise SampleRateError(f"{self.sample_rate} Hz + {other.sample_rate} Hz")
        if other.samples.shape != self.samples.shape:
            raise ShapeError(f"shape {self.samples.shape} + {other.samples.shape}")
        return MultichannelWave(self.samples + other.samples, self.sample_rate)

    @classmethod
    def zeros(cls, num_channels: int, num_samples: int, sample_rate: int = 16000):
        return cls(np.zeros((num_channels, num_samples)), sample_rate)


def write_wave(path: Union[str, Path], wave: MultichannelWave, fmt: str = "float") -> Path:
    """Write a wave to disk (interleaved channels)"""
    if fmt not in SUBTYPES:
        raise ValueError(f"unknown WAV format '{fmt}' (expected one of {sorted(SUBTYPES)})")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sf.write(str(path), wave.samples.T, wave.sample_rate, subtype=SUBTYPES[fmt], format="WAV")
    return path


def read_wave(path: Union[str, Path], expected_rate: int = None) -> MultichannelWave:
    """Read a WAV file as float64, shape (M, T)"""
    data, rate = sf.read(str(path), dtype="float64", always_2d=True)
    if expected_rate is not None and rate != expected_rate:
        raise SampleRateError(f"{path}: {rate} Hz, expected {expected_rate} Hz")
    return MultichannelWave(data.T, rate)
