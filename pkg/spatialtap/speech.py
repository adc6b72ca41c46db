"""
Synthetic speech-like signals

Stand-in for a speech corpus: a harmonic pulse train with drifting f0
plus shaped noise, cut into syllable-like bursts separated by pauses.
"""

import zlib
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.signal import lfilter

PEAK = 0.5


@dataclass(frozen=True)
class Voice:
    """Speaker identity of the generator"""

    f0: float = 140.0          # Hz
    tilt: float = 1.2          # harmonic amplitude ~ k^-tilt
    breathiness: float = 0.15  # noise share in voiced bursts

    @classmethod
    def for_speaker(cls, speaker_id: str) -> "Voice":
        rng = np.random.default_rng(zlib.crc32(speaker_id.encode()))
        return cls(f0=float(rng.uniform(85.0, 240.0)),
                   tilt=float(rng.uniform(0.8, 1.8)),
                   breathiness=float(rng.uniform(0.05, 0.3)))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Voice":
        return cls(f0=float(rng.uniform(85.0, 240.0)),
                   tilt=float(rng.uniform(0.8, 1.8)),
                   breathiness=float(rng.uniform(0.05, 0.3)))


def _envelope(n: int, fs: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Burst envelope and a per-sample voiced flag"""
    env = np.zeros(n)
    voiced = np.zeros(n, dtype=bool)
    pos = int(rng.uniform(0.0, 0.1) * fs)
    while pos < n:
        burst = int(rng.uniform(0.08, 0.4) * fs)
        stop = min(pos + burst, n)
        length = stop - pos
        if length > 1:
            # sin(pi) rounds to a tiny negative value
            ramp = np.sqrt(np.maximum(np.sin(np.pi * np.arange(length) / (length - 1)), 0.0))
            env[pos:stop] = rng.uniform(0.4, 1.0) * ramp
            voiced[pos:stop] = rng.random() < 0.8
        # Short gaps between syllables, occasionally a longer pause
        gap = rng.uniform(0.03, 0.12) if rng.random() < 0.85 else rng.uniform(0.2, 0.5)
        pos = stop + int(gap * fs)
    return env, voiced


def speechlike_components(duration: float, rng: np.random.Generator, fs: int = 16000,
                          voice: Optional[Voice] = None):
    """
    Raw parts of a speech-like signal

    Returns:
        (harmonic, noise, envelope, voiced) each of length round(duration * fs)
    """
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    voice = voice or Voice.random(rng)
    n = int(round(duration * fs))

    # f0 drifts as a smoothed random walk around the speaker's mean
    walk = np.cumsum(rng.normal(0.0, 1.0, n)) / np.sqrt(fs)
    walk = lfilter([0.002], [1.0, -0.998], walk)
    f0 = voice.f0 * np.exp(0.25 * np.tanh(walk) + 0.05 * np.sin(2 * np.pi * rng.uniform(2, 5) * np.arange(n) / fs))
    phase = 2.0 * np.pi * np.cumsum(f0) / fs

    harmonic = np.zeros(n)
    num_harmonics = int(0.45 * fs / voice.f0)
    for k in range(1, num_harmonics + 1):
        audible = k * f0 < 0.45 * fs
        harmonic += np.where(audible, k ** -voice.tilt * np.sin(k * phase + rng.uniform(0, 2 * np.pi)), 0.0)

    # Noise with a gentle high-frequency emphasis (fricative-like)
    noise = lfilter([1.0, -0.6], [1.0], rng.normal(0.0, 1.0, n))

    env, voiced = _envelope(n, fs, rng)
    return harmonic, noise, env, voiced


def synth_speechlike(duration: float, rng: np.random.Generator, fs: int = 16000,
                     voice: Optional[Voice] = None) -> np.ndarray:
    """Non-stationary wideband mono signal, peak-normalized to 0.5"""
    voice = voice or Voice.random(rng)
    harmonic, noise, env, voiced = speechlike_components(duration, rng, fs, voice)

    h = harmonic / (np.std(harmonic) + 1e-12)
    w = noise / (np.std(noise) + 1e-12)
    voiced_part = (1.0 - voice.breathiness) * h + voice.breathiness * w
    unvoiced_part = 0.5 * w
    x = env * np.where(voiced, voiced_part, unvoiced_part)

    peak = np.max(np.abs(x))
    if peak > 0:
        x = x * (PEAK / peak)
    return x
