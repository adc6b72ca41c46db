"""
Room impulse responses by the image-source method

Shoebox rooms with one frequency-independent reflection coefficient for
all six walls. Every image contributes an 81-tap Hann-windowed sinc at its
fractional delay with amplitude beta^reflections / distance.

The reflection coefficient is calibrated per room shape: the number of
reflections an image has undergone grows at a rate that depends on its
direction, so the decay of the image set is a mixture of exponentials that
neither Sabine's nor Eyring's formula describes. `decay_curve` averages that
mixture over directions, and beta is chosen so the Schroeder fit between -5
and -25 dB reaches 60 dB at the requested RT60.

Images are enumerated up to the distance beyond which the remaining
reverberant energy is below ENERGY_FLOOR_DB.
"""

import logging
import math
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

from .errors import GeometryError, ConfigError
from .geometry import RoomSpec

logger = logging.getLogger(__name__)

FILTER_TAPS = 81
ENERGY_FLOOR_DB = 45.0
RT60_FIT_RANGE = (-5.0, -25.0)
_GRID = 64
_CURVE_POINTS = 4000
_CURVE_DEPTH_DB = 100.0
_CHUNK = 16384


def _octant_directions(n: int = _GRID) -> np.ndarray:
    """Equal-area midpoint grid on the positive octant of the unit sphere, shape (n*n, 3)"""
    z = (np.arange(n) + 0.5) / n
    phi = (np.arange(n) + 0.5) / n * (np.pi / 2.0)
    z, phi = np.meshgrid(z, phi, indexing="ij")
    r = np.sqrt(1.0 - z ** 2)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1).reshape(-1, 3)


@lru_cache(maxsize=512)
def decay_curve(dimensions: Tuple[float, float, float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Direction-averaged Schroeder curve of a shoebox image set

    An image at distance r in direction u has undergone about r * g(u)
    reflections, g(u) = sum_i |u_i| / L_i. With an energy factor exp(-kappa)
    per reflection and an image energy density that does not depend on r,
    the energy arriving from beyond r is proportional to
    mean_u exp(-kappa r g(u)) / g(u).

    Returns:
        (x, level_db): x = kappa * r on a uniform grid, level in dB relative
        to the total, reaching at least -100 dB
    """
    g = _octant_directions() @ (1.0 / np.asarray(dimensions, dtype=float))
    x = np.linspace(0.0, _CURVE_DEPTH_DB * math.log(10.0) / 10.0 / g.min(), _CURVE_POINTS)
    remaining = np.concatenate([np.mean(np.exp(-np.outer(chunk, g)) / g, axis=1)
                                for chunk in np.array_split(x, 8)])
    return x, 10.0 * np.log10(remaining / np.mean(1.0 / g))


def _decay_slope(axis: np.ndarray, level_db: np.ndarray, fit_range) -> float:
    """Slope of a line fitted to a decay curve between two levels (dB per axis unit)"""
    upper, lower = fit_range
    start = int(np.argmax(level_db <= upper))
    stop = int(np.argmax(level_db <= lower))
    if stop <= start + 1:
        raise ValueError(f"decay curve does not span {fit_range} dB")
    slope, _ = np.polyfit(axis[start:stop], level_db[start:stop], 1)
    return float(slope)


def _decay_constant(room: RoomSpec) -> float:
    """Energy loss exponent per reflection giving the room's RT60"""
    if room.rt60 <= 0:
        raise ConfigError(f"rt60 must be positive, got {room.rt60}")
    x, level = decay_curve(tuple(float(v) for v in room.dimensions))
    slope = _decay_slope(x, level, RT60_FIT_RANGE)
    return -60.0 / (slope * room.speed_of_sound * room.rt60)


def reflection_coefficient(room: RoomSpec) -> float:
    """Wall reflection coefficient (pressure) for the room's RT60"""
    return math.exp(-0.5 * _decay_constant(room))


def image_distance_cap(room: RoomSpec, floor_db: float = ENERGY_FLOOR_DB) -> float:
    """Distance in meters beyond which images carry less than -floor_db of the reverberant energy"""
    if not 0.0 < floor_db < _CURVE_DEPTH_DB:
        raise ConfigError(f"floor_db must lie in (0, {_CURVE_DEPTH_DB:g}), got {floor_db}")
    x, level = decay_curve(tuple(float(v) for v in room.dimensions))
    return float(x[int(np.argmax(level <= -floor_db))]) / _decay_constant(room)


def _axis_images(length: float, src: float, mic: float, max_dist: float):
    """Image offsets along one axis and their reflection counts"""
    order = int(math.ceil(max_dist / (2.0 * length))) + 1
    n = np.arange(-order, order + 1)
    offsets, counts = [], []
    for p in (0, 1):
        offsets.append((1 - 2 * p) * src + 2.0 * n * length - mic)
        counts.append(np.abs(n - p) + np.abs(n))
    return np.concatenate(offsets), np.concatenate(counts)


def synth_rirs(room: RoomSpec, src: Sequence[float], mics: np.ndarray, fs: int,
               floor_db: float = ENERGY_FLOOR_DB) -> np.ndarray:
    """
    Impulse responses from one source to several microphones

    Args:
        floor_db: images are kept until the remaining reverberant energy
            falls below this level

    Returns:
        array of shape (M, L) with L >= ceil(rt60 * fs)
    """
    src = np.asarray(src, dtype=float)
    mics = np.atleast_2d(np.asarray(mics, dtype=float))
    if not room.contains(src):
        raise GeometryError(f"source {src.tolist()} is outside the room {room.dimensions}")
    for mic in mics:
        if not room.contains(mic):
            raise GeometryError(f"microphone {mic.tolist()} is outside the room {room.dimensions}")

    c = room.speed_of_sound
    beta = reflection_coefficient(room)
    direct = np.linalg.norm(mics - src, axis=1)
    max_dist = max(image_distance_cap(room, floor_db), float(direct.max()))

    half = FILTER_TAPS // 2
    length = max(int(math.ceil(room.rt60 * fs)), int(math.ceil(max_dist / c * fs)) + half + 1)
    if length > math.ceil(room.rt60 * fs):
        logger.debug("image cap %.1f m extends the response past rt60 (%d samples)", max_dist, length)

    rirs = np.zeros((len(mics), length))
    for m, mic in enumerate(mics):
        rirs[m] = _render_images(room, src, mic, beta, max_dist, fs, length)
    return rirs


def _render_images(room, src, mic, beta, max_dist, fs, length):
    c = room.speed_of_sound
    axes = [_axis_images(room.dimensions[i], src[i], mic[i], max_dist) for i in range(3)]
    (dx, cx), (dy, cy), (dz, cz) = axes

    dist = np.sqrt(dx[:, None, None] ** 2 + dy[None, :, None] ** 2 + dz[None, None, :] ** 2)
    count = cx[:, None, None] + cy[None, :, None] + cz[None, None, :]
    keep = dist <= max_dist + 1e-9
    dist, count = dist[keep], count[keep]

    with np.errstate(divide="ignore"):
        amp = np.power(beta, count) / dist
    nonzero = amp > 0
    amp, delay = amp[nonzero], dist[nonzero] / c * fs

    half = FILTER_TAPS // 2
    width = FILTER_TAPS + 1
    taps = np.arange(-half, half + 1)
    h = np.zeros(length)
    for start in range(0, len(amp), _CHUNK):
        d = delay[start:start + _CHUNK]
        a = amp[start:start + _CHUNK]
        idx = np.round(d).astype(np.int64)[:, None] + taps
        t = idx - d[:, None]
        pulse = a[:, None] * 0.5 * (1.0 + np.cos(2.0 * np.pi * t / width)) * np.sinc(t)
        valid = (idx >= 0) & (idx < length)
        h += np.bincount(idx[valid], weights=pulse[valid], minlength=length)
    return h


def synth_rir(room: RoomSpec, src: Sequence[float], mic: Sequence[float], fs: int) -> np.ndarray:
    """Impulse response from `src` to a single microphone at `mic`"""
    return synth_rirs(room, src, np.asarray(mic, dtype=float)[None, :], fs)[0]


def estimate_rt60(rir: np.ndarray, fs: int, fit_range=RT60_FIT_RANGE) -> float:
    """
    Reverberation time from the Schroeder backward integral

    A line is fitted to the energy decay curve between the two levels of
    `fit_range` (dB) and extrapolated to a 60 dB decay.
    """
    energy = np.asarray(rir, dtype=float) ** 2
    edc = np.cumsum(energy[::-1])[::-1]
    if edc[0] <= 0:
        raise ValueError("impulse response is silent")
    with np.errstate(divide="ignore"):
        edc_db = 10.0 * np.log10(edc / edc[0])
    slope = _decay_slope(np.arange(len(edc_db)) / fs, edc_db, fit_range)
    return float(-60.0 / slope)
