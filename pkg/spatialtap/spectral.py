"""
STFT analysis and synthesis

Half-overlapping frames with a square-root periodic Hann window on both
analysis and synthesis. The squared window sums to exactly one at 50%
overlap, so stft -> istft reconstructs every sample. The signal is padded
by one hop at the front and up to a whole hop at the back, which makes
every input sample fall into exactly two frames. The transforms themselves
are scipy.signal.ShortTimeFFT.

Frame tau covers input samples [(tau - 1) * hop, (tau + 1) * hop).
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.signal import ShortTimeFFT, get_window

from .audio import MultichannelWave
from .errors import ConfigError, ShapeError


@dataclass(frozen=True, eq=False)
class SpectralTensor:
    """Complex one-sided spectra, shape (channels, frames, bins)"""

    data: np.ndarray
    frame_len: int = 1024
    hop: int = 512
    sample_rate: int = 16000
    num_samples: Optional[int] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=np.complex128, copy=True)
        if data.ndim == 2:
            data = data[np.newaxis]
        if data.ndim != 3:
            raise ShapeError(f"spectral data must be (M, T, F), got shape {data.shape}")
        _check_framing(self.frame_len, self.hop)
        if data.shape[2] != self.frame_len // 2 + 1:
            raise ShapeError(f"{data.shape[2]} bins do not match frame length {self.frame_len}")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def num_channels(self) -> int:
        return self.data.shape[0]

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]

    @property
    def num_bins(self) -> int:
        return self.data.shape[2]

    @property
    def frequencies(self) -> np.ndarray:
        """Bin center frequencies in Hz"""
        return np.arange(self.num_bins) * self.sample_rate / self.frame_len

    @property
    def frame_times(self) -> np.ndarray:
        """Frame centers in seconds"""
        return np.arange(self.num_frames) * self.hop / self.sample_rate

    def like(self, data: np.ndarray) -> "SpectralTensor":
        """New tensor with the same framing and different data"""
        return SpectralTensor(data, self.frame_len, self.hop, self.sample_rate, self.num_samples)


def _check_framing(frame_len: int, hop: int):
    if frame_len < 2 or frame_len % 2:
        raise ConfigError(f"frame length must be even and >= 2, got {frame_len}")
    if hop * 2 != frame_len:
        raise ConfigError(f"frames must be half-overlapping: hop={hop}, frame_len={frame_len}")


def analysis_window(frame_len: int) -> np.ndarray:
    return np.sqrt(get_window("hann", frame_len, fftbins=True))


@lru_cache(maxsize=32)
def _transform(frame_len: int, hop: int, sample_rate: int) -> ShortTimeFFT:
    # midpoint frame_len // 2 == hop puts slice p over [(p - 1) * hop, (p + 1) * hop);
    # phase_shift=None keeps the phase referenced to the slice start
    return ShortTimeFFT(analysis_window(frame_len), hop, sample_rate, fft_mode="onesided", phase_shift=None)


def num_frames_for(num_samples: int, hop: int) -> int:
    return -(-num_samples // hop) + 1


def stft(wave: MultichannelWave, frame_len: int = 1024, hop: int = 512) -> SpectralTensor:
    """Short-time Fourier transform of every channel"""
    _check_framing(frame_len, hop)
    if wave.num_samples < frame_len:
        raise ConfigError(f"wave has {wave.num_samples} samples, shorter than one frame ({frame_len})")

    num_frames = num_frames_for(wave.num_samples, hop)
    transform = _transform(frame_len, hop, wave.sample_rate)
    # when num_samples % hop == 1 the last frame sees only the window's zero sample
    stop = min(num_frames, transform.p_max(wave.num_samples))
    spectra = np.stack([transform.stft(channel, p0=0, p1=stop) for channel in wave.samples])
    spectra = np.pad(spectra, ((0, 0), (0, 0), (0, num_frames - stop)))

    return SpectralTensor(spectra.transpose(0, 2, 1), frame_len, hop, wave.sample_rate, wave.num_samples)


def istft(tensor: SpectralTensor, num_samples: Optional[int] = None) -> MultichannelWave:
    """Inverse STFT by weighted overlap-add"""
    frame_len, hop = tensor.frame_len, tensor.hop
    if num_samples is None:
        num_samples = tensor.num_samples
    if num_samples is None:
        num_samples = (tensor.num_frames - 1) * hop
    if num_frames_for(num_samples, hop) != tensor.num_frames:
        raise ShapeError(f"{tensor.num_frames} frames cannot hold {num_samples} samples")

    transform = _transform(frame_len, hop, tensor.sample_rate)
    out = np.stack([transform.istft(channel.T, k0=0, k1=num_samples) for channel in tensor.data])

    return MultichannelWave(out, tensor.sample_rate)


def _bin_weights(tensor: SpectralTensor) -> np.ndarray:
    # One-sided spectrum: interior bins stand for two conjugate bins
    weights = np.full(tensor.num_bins, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    return weights / tensor.frame_len


def frame_energy(tensor: SpectralTensor) -> np.ndarray:
    """Windowed time-domain energy per frame, summed over channels"""
    return np.einsum("mtf,f->t", np.abs(tensor.data) ** 2, _bin_weights(tensor))


def spectral_energy(tensor: SpectralTensor) -> float:
    """
    Window-compensated spectral energy

    Equals the time-domain energy of the analysed signal because the
    squared analysis windows sum to one.
    """
    return float(frame_energy(tensor).sum())
