"""
Speaker corpora

A corpus hands out mono utterances keyed by speaker id, split into
"train" and "test" speakers.

    WavCorpus("/data/speech")   # <root>/<split>/<speaker_id>/*.wav
    SyntheticCorpus()           # speech-like generator, no files needed
"""

import logging
from pathlib import Path
from typing import Dict, List

import numpy as np

from .audio import read_wave
from .errors import CorpusExhaustedError, ShapeError
from .speech import Voice, synth_speechlike

logger = logging.getLogger(__name__)

SPLITS = ("train", "test")


class SyntheticCorpus:
    """Speech-like generator posing as a corpus"""

    def __init__(self, speakers_per_split: int = 64):
        self.speakers_per_split = speakers_per_split

    def describe(self) -> Dict:
        return {"type": "synthetic", "speakers_per_split": self.speakers_per_split}

    def speakers(self, split: str) -> List[str]:
        if split not in SPLITS:
            raise ValueError(f"unknown split '{split}'")
        return [f"syn-{split}-{i:03d}" for i in range(self.speakers_per_split)]

    def utterance(self, speaker_id: str, duration: float, fs: int,
                  rng: np.random.Generator) -> np.ndarray:
        return synth_speechlike(duration, rng, fs, voice=Voice.for_speaker(speaker_id))


class WavCorpus:
    """
    Directory of mono WAV files grouped by speaker

    Layout:
        <root>/train/<speaker_id>/*.wav
        <root>/test/<speaker_id>/*.wav
    Without split directories every speaker is used for both splits.
    """

    def __init__(self, root):
        self.root = Path(root)
        if not self.root.is_dir():
            raise CorpusExhaustedError(f"corpus directory not found: {self.root}")

    def describe(self) -> Dict:
        return {"type": "wav", "root": str(self.root)}

    def _split_dir(self, split: str) -> Path:
        candidate = self.root / split
        return candidate if candidate.is_dir() else self.root

    def speakers(self, split: str) -> List[str]:
        if split not in SPLITS:
            raise ValueError(f"unknown split '{split}'")
        base = self._split_dir(split)
        return sorted(p.name for p in base.iterdir()
                      if p.is_dir() and p.name not in SPLITS and any(p.glob("*.wav")))

    def _files(self, speaker_id: str) -> List[Path]:
        for split in SPLITS:
            files = sorted((self._split_dir(split) / speaker_id).glob("*.wav"))
            if files:
                return files
        raise CorpusExhaustedError(f"no WAV files for speaker '{speaker_id}'")

    def utterance(self, speaker_id: str, duration: float, fs: int,
                  rng: np.random.Generator) -> np.ndarray:
        """Concatenate the speaker's files from a random start until `duration` is covered"""
        files = self._files(speaker_id)
        needed = int(round(duration * fs))
        start = int(rng.integers(len(files)))
        pieces, have = [], 0
        for i in range(len(files) * 4):
            wave = read_wave(files[(start + i) % len(files)], expected_rate=fs)
            if wave.num_channels != 1:
                raise ShapeError(f"{files[(start + i) % len(files)]}: corpus files must be mono")
            pieces.append(wave.samples[0])
            have += wave.num_samples
            if have >= needed:
                break
        if have == 0:
            raise CorpusExhaustedError(f"speaker '{speaker_id}' has only empty files")
        x = np.concatenate(pieces)
        if have < needed:
            logger.warning("speaker %s: %.2f s of audio, repeating to %.2f s", speaker_id, have / fs, duration)
            x = np.tile(x, -(-needed // have))
        return x[:needed]


def open_corpus(path=None):
    """WavCorpus for a directory, SyntheticCorpus when no path is given"""
    if path:
        return WavCorpus(path)
    return SyntheticCorpus()
