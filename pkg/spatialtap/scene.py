"""
Acoustic scene simulation

Draws scenarios with switching talkers, renders per-source signal images
through image-source room impulse responses and adds white Gaussian noise.

Dataset kinds:
    DS-clean / DS-WGN      training, two speakers at two positions
    DST-clean / DST-WGN    test, same layout
    DST-1Pos               test, two speakers sharing one position
    DST-1Spk               test, one speaker changing position once

Every scenario has three segments: source 1, source 2, source 1.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import fftconvolve

from .audio import MultichannelWave
from .config import SamplerConfig
from .errors import (
    ConfigError, ConstraintInfeasibleError, CorpusExhaustedError,
    SampleRateError, SignalLengthError, UndefinedSNRError,
)
from .geometry import ArraySpec, RoomSpec
from .rir import synth_rirs
from .spectral import num_frames_for

logger = logging.getLogger(__name__)

PAUSE = 0
CLEAN = "clean"

Snr = Union[float, str]


class DatasetKind(str, Enum):
    DS_CLEAN = "DS-clean"
    DS_WGN = "DS-WGN"
    DST_CLEAN = "DST-clean"
    DST_WGN = "DST-WGN"
    DST_1POS = "DST-1Pos"
    DST_1SPK = "DST-1Spk"

    @classmethod
    def parse(cls, name: str) -> "DatasetKind":
        if isinstance(name, cls):
            return name
        for kind in cls:
            if kind.value.lower() == str(name).lower():
                return kind
        raise ConfigError(f"unknown dataset kind '{name}' (expected one of {[k.value for k in cls]})")

    @property
    def code(self) -> int:
        return list(DatasetKind).index(self)

    @property
    def is_training(self) -> bool:
        return self in (DatasetKind.DS_CLEAN, DatasetKind.DS_WGN)

    @property
    def is_noisy(self) -> bool:
        return self in (DatasetKind.DS_WGN, DatasetKind.DST_WGN)

    @property
    def split(self) -> str:
        return "train" if self.is_training else "test"

    @property
    def shared_position(self) -> bool:
        return self is DatasetKind.DST_1POS

    @property
    def single_speaker(self) -> bool:
        return self is DatasetKind.DST_1SPK


@dataclass(frozen=True)
class SourceRecord:
    position: Tuple[float, float, float]
    doa_deg: float
    speaker_id: str

    def to_dict(self):
        return {"position": list(self.position), "doa_deg": self.doa_deg, "speaker_id": self.speaker_id}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["position"]), data["doa_deg"], data["speaker_id"])


@dataclass(frozen=True)
class Segment:
    """Activity of source `source` (0-based index) during [start, end) seconds"""

    source: int
    start: float
    end: float

    def to_dict(self):
        return {"source": self.source + 1, "start": self.start, "end": self.end}

    @classmethod
    def from_dict(cls, data):
        return cls(data["source"] - 1, data["start"], data["end"])


@dataclass(frozen=True)
class ScenarioSpec:
    kind: DatasetKind
    room: RoomSpec
    array: ArraySpec
    sources: Tuple[SourceRecord, ...]
    schedule: Tuple[Segment, ...]
    switch_times: Tuple[float, ...]
    snr_db: Snr = CLEAN
    seed: int = 0
    duration: float = 7.0
    sample_rate: int = 16000

    @property
    def num_sources(self) -> int:
        return len(self.sources)

    @property
    def num_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    @property
    def is_clean(self) -> bool:
        return self.snr_db == CLEAN

    def with_snr(self, snr_db: Snr) -> "ScenarioSpec":
        return ScenarioSpec(self.kind, self.room, self.array, self.sources, self.schedule,
                            self.switch_times, snr_db, self.seed, self.duration, self.sample_rate)

    def source_at(self, t: float) -> Optional[int]:
        for seg in self.schedule:
            if seg.start <= t < seg.end:
                return seg.source
        return None

    def gate(self, source: int) -> np.ndarray:
        """0/1 mask over samples where `source` is scheduled"""
        g = np.zeros(self.num_samples)
        for seg in self.schedule:
            if seg.source == source:
                a = int(round(seg.start * self.sample_rate))
                b = int(round(seg.end * self.sample_rate))
                g[a:b] = 1.0
        return g

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind.value,
            "room": self.room.to_dict(),
            "array": self.array.to_dict(),
            "sources": [s.to_dict() for s in self.sources],
            "schedule": [s.to_dict() for s in self.schedule],
            "switch_times": list(self.switch_times),
            "snr_db": self.snr_db,
            "seed": self.seed,
            "duration": self.duration,
            "sample_rate": self.sample_rate,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "ScenarioSpec":
        snr = data["snr_db"]
        return cls(
            kind=DatasetKind.parse(data["kind"]),
            room=RoomSpec.from_dict(data["room"]),
            array=ArraySpec.from_dict(data["array"]),
            sources=tuple(SourceRecord.from_dict(s) for s in data["sources"]),
            schedule=tuple(Segment.from_dict(s) for s in data["schedule"]),
            switch_times=tuple(data["switch_times"]),
            snr_db=snr if snr == CLEAN else float(snr),
            seed=int(data["seed"]),
            duration=float(data["duration"]),
            sample_rate=int(data["sample_rate"]),
        )


# ============================================================================
# Scenario sampling
# ============================================================================

def _draw_array(room: RoomSpec, config: SamplerConfig, rng: np.random.Generator) -> ArraySpec:
    phi = rng.uniform(0.0, 2.0 * np.pi)
    orientation = (float(np.cos(phi)), float(np.sin(phi)), 0.0)
    margin = config.spacing * (config.num_mics - 1) / 2.0 + 1e-3
    dims = np.asarray(room.dimensions)
    center = rng.uniform([margin, margin, 1e-3], dims - [margin, margin, 1e-3])
    return ArraySpec(config.num_mics, config.spacing, tuple(float(v) for v in center), orientation)


def _draw_position(room: RoomSpec, config: SamplerConfig, rng: np.random.Generator):
    dims = np.asarray(room.dimensions)
    m = config.min_wall_distance
    if np.any(dims <= 2 * m):
        return None
    return tuple(float(v) for v in rng.uniform(m, dims - m))


def sample_scenario(kind: Union[DatasetKind, str], rng: np.random.Generator,
                    config: SamplerConfig = SamplerConfig(), snr_db: Snr = CLEAN,
                    speakers: Optional[Sequence[str]] = None, seed: int = 0) -> ScenarioSpec:
    """
    Draw one scenario of the given kind

    Args:
        kind: dataset kind (decides shared position / single speaker)
        rng: generator all random draws come from
        config: sampling ranges
        snr_db: SNR to record in the spec ("clean" or dB)
        speakers: pool of speaker ids to pick from (placeholders if None)
        seed: integer recorded in the spec for re-rendering

    Raises:
        ConstraintInfeasibleError: no valid geometry within config.max_attempts
    """
    kind = DatasetKind.parse(kind) if isinstance(kind, str) else kind
    config.validate()

    # Speakers
    needed = 1 if kind.single_speaker else 2
    pool = list(speakers) if speakers is not None else ["speaker-1", "speaker-2"]
    if len(pool) < needed:
        raise CorpusExhaustedError(f"{kind.value} needs {needed} distinct speakers, corpus has {len(pool)}")
    chosen = [pool[i] for i in rng.choice(len(pool), size=needed, replace=False)]
    speaker_ids = [chosen[0], chosen[0]] if kind.single_speaker else chosen

    room = RoomSpec(
        dimensions=tuple(float(rng.uniform(*r)) for r in (config.room_x, config.room_y, config.room_z)),
        rt60=float(rng.uniform(*config.rt60)),
        speed_of_sound=config.speed_of_sound,
    )

    # Geometry by rejection sampling
    failures: Dict[str, int] = {}
    geometry = None
    for _ in range(config.max_attempts):
        array = _draw_array(room, config, rng)
        positions = []
        violated = None
        for _q in range(1 if kind.shared_position else 2):
            pos = _draw_position(room, config, rng)
            if pos is None:
                violated = f"wall distance >= {config.min_wall_distance} m"
                break
            if array.distance_to(pos) < config.min_array_distance:
                violated = f"array distance >= {config.min_array_distance} m"
                break
            positions.append(pos)
        if violated is None and len(positions) == 2:
            separation = abs(array.doa_of(positions[0]) - array.doa_of(positions[1]))
            if separation < config.min_doa_separation:
                violated = f"DoA separation >= {config.min_doa_separation} deg"
        if violated is None:
            geometry = (array, positions)
            break
        failures[violated] = failures.get(violated, 0) + 1

    if geometry is None:
        worst = max(failures, key=failures.get)
        raise ConstraintInfeasibleError(worst, config.max_attempts)

    array, positions = geometry
    if kind.shared_position:
        positions = [positions[0], positions[0]]
    sources = tuple(
        SourceRecord(pos, array.doa_of(pos), spk) for pos, spk in zip(positions, speaker_ids)
    )

    s1 = float(rng.uniform(*config.scaled_switch_1))
    s2 = float(rng.uniform(*config.scaled_switch_2))
    schedule = (Segment(0, 0.0, s1), Segment(1, s1, s2), Segment(0, s2, config.duration))

    return ScenarioSpec(kind, room, array, sources, schedule, (s1, s2), snr_db,
                        seed, config.duration, config.sample_rate)


# ============================================================================
# Rendering
# ============================================================================

def frame_activity(gated: np.ndarray, spec: ScenarioSpec, frame_len: int, hop: int,
                   threshold_db: float = -40.0) -> np.ndarray:
    """
    Ground-truth label per STFT frame: PAUSE (0) or source index + 1

    A frame is a pause when the energy of the gated dry signals in it is
    more than |threshold_db| below the loudest frame of the sequence.
    Otherwise it takes the source scheduled at the frame center.
    """
    gated = np.atleast_2d(gated)
    n = gated.shape[1]
    num_frames = num_frames_for(n, hop)

    # Same framing as spectral.stft: frame tau spans hop-blocks tau and tau + 1
    padded = np.zeros((num_frames + 1) * hop)
    padded[hop:hop + n] = np.sum(gated ** 2, axis=0)
    blocks = padded.reshape(num_frames + 1, hop).sum(axis=1)
    energy = blocks[:-1] + blocks[1:]

    labels = np.full(num_frames, PAUSE, dtype=np.int64)
    peak = energy.max()
    if peak <= 0:
        return labels
    floor = peak * 10.0 ** (threshold_db / 10.0)
    for tau in range(num_frames):
        if energy[tau] < floor:
            continue
        center = min(tau * hop, n - 1) / spec.sample_rate
        source = spec.source_at(center)
        if source is not None:
            labels[tau] = source + 1
    return labels


def render_scene(spec: ScenarioSpec, dry: Sequence[Union[MultichannelWave, np.ndarray]],
                 frame_len: int = 1024, hop: int = 512, threshold_db: float = -40.0):
    """
    Render the multichannel images of every source

    Returns:
        (mixture, images, activity): mixture is the noise-free sum of the
        per-source images; activity holds one label per STFT frame.
    """
    if len(dry) != spec.num_sources:
        raise SignalLengthError(f"{len(dry)} dry signals for {spec.num_sources} sources")

    n = spec.num_samples
    fs = spec.sample_rate
    mics = spec.array.mic_positions
    gated = np.zeros((spec.num_sources, n))
    images = []
    for q, (source, signal) in enumerate(zip(spec.sources, dry)):
        if isinstance(signal, MultichannelWave):
            if signal.sample_rate != fs:
                raise SampleRateError(f"dry signal {q + 1} at {signal.sample_rate} Hz, scenario at {fs} Hz")
            signal = signal.samples[0]
        signal = np.asarray(signal, dtype=float)

        gate = spec.gate(q)
        covered = int(np.nonzero(gate)[0].max()) + 1 if gate.any() else 0
        if len(signal) < covered:
            raise SignalLengthError(f"dry signal {q + 1} has {len(signal)} samples, schedule needs {covered}")
        gated[q, :min(n, len(signal))] = signal[:n] * gate[:len(signal[:n])]

        rirs = synth_rirs(spec.room, source.position, mics, fs)
        image = fftconvolve(gated[q][np.newaxis, :], rirs, axes=-1)[:, :n]
        images.append(MultichannelWave(image, fs))

    mixture = MultichannelWave(np.sum([im.samples for im in images], axis=0), fs)
    activity = frame_activity(gated, spec, frame_len, hop, threshold_db)
    return mixture, images, activity


def mix_noise(wave: MultichannelWave, snr_db: Snr, rng: np.random.Generator) -> MultichannelWave:
    """
    Add spatially and spectrally white Gaussian noise

    The noise of every channel is scaled to exactly mean_signal_power / 10^(snr/10),
    where the signal power is averaged over channels.
    """
    if snr_db == CLEAN or snr_db is None or (isinstance(snr_db, float) and math.isinf(snr_db)):
        return wave

    signal_power = wave.power()
    if signal_power <= 0:
        raise UndefinedSNRError(f"cannot add noise at {snr_db} dB to a silent signal")

    noise_power = signal_power * 10.0 ** (-float(snr_db) / 10.0)
    noise = rng.standard_normal(wave.samples.shape)
    noise *= np.sqrt(noise_power / np.mean(noise ** 2, axis=1, keepdims=True))
    return MultichannelWave(wave.samples + noise, wave.sample_rate)


def dry_signals(spec: ScenarioSpec, corpus, rng: np.random.Generator) -> List[np.ndarray]:
    """
    One dry utterance per source; sources sharing a speaker share the utterance
    """
    cache: Dict[str, np.ndarray] = {}
    out = []
    for source in spec.sources:
        if source.speaker_id not in cache:
            cache[source.speaker_id] = corpus.utterance(source.speaker_id, spec.duration, spec.sample_rate, rng)
        out.append(cache[source.speaker_id])
    return out
