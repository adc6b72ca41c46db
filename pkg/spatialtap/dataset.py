"""
Dataset building and manifests

Layout on disk:

    <root>/<kind>/manifest.json
    <root>/<kind>/seq_0000/scenario_clean.json
    <root>/<kind>/seq_0000/mixture_clean.wav
    <root>/<kind>/seq_0000/image_1.wav
    <root>/<kind>/seq_0000/image_2.wav
    <root>/<kind>/seq_0000/target.wav

Noisy kinds write one scenario/mixture pair per SNR (tag "snr+05" etc.).
Each sequence draws from its own generator derived from
(global seed, kind, sequence index), so the files do not depend on the
number of workers.
"""

import dataclasses
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from .audio import MultichannelWave, read_wave, write_wave
from .beamform import make_target
from .config import SamplerConfig
from .errors import ManifestError
from .scene import (
    CLEAN, DatasetKind, ScenarioSpec, Snr, dry_signals, mix_noise, render_scene, sample_scenario,
)

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    scenario: str
    mixture: str
    images: Tuple[str, ...]
    target: str
    activity: Tuple[int, ...]
    snr_db: Snr
    seed: int
    noise_stream: int = 0

    def to_dict(self) -> Dict:
        return {"id": self.id, "scenario": self.scenario, "mixture": self.mixture,
                "images": list(self.images), "target": self.target,
                "activity": list(self.activity), "snr_db": self.snr_db,
                "seed": self.seed, "noise_stream": self.noise_stream}

    @classmethod
    def from_dict(cls, data: Dict) -> "ManifestEntry":
        snr = data["snr_db"]
        return cls(data["id"], data["scenario"], data["mixture"], tuple(data["images"]),
                   data["target"], tuple(int(a) for a in data["activity"]),
                   snr if snr == CLEAN else float(snr), int(data["seed"]),
                   int(data.get("noise_stream", 0)))


@dataclass
class DatasetManifest:
    kind: DatasetKind
    seed: int
    entries: List[ManifestEntry] = field(default_factory=list)
    sample_rate: int = 16000
    duration: float = 7.0
    frame_len: int = 1024
    hop: int = 512
    snr_grid: Tuple[Snr, ...] = (CLEAN,)
    sampler: Dict = field(default_factory=dict)
    corpus: Dict = field(default_factory=dict)
    root: Optional[Path] = None

    def path_of(self, relative: str) -> Path:
        if self.root is None:
            raise ManifestError("manifest has no root directory")
        return self.root / relative

    def scenario(self, entry: ManifestEntry) -> ScenarioSpec:
        return ScenarioSpec.from_dict(json.loads(self.path_of(entry.scenario).read_text()))

    def mixture(self, entry: ManifestEntry) -> MultichannelWave:
        return read_wave(self.path_of(entry.mixture), expected_rate=self.sample_rate)

    def target(self, entry: ManifestEntry) -> MultichannelWave:
        return read_wave(self.path_of(entry.target), expected_rate=self.sample_rate)

    def to_dict(self) -> Dict:
        return {
            "version": MANIFEST_VERSION,
            "kind": self.kind.value,
            "seed": self.seed,
            "sample_rate": self.sample_rate,
            "duration": self.duration,
            "frame_len": self.frame_len,
            "hop": self.hop,
            "snr_grid": list(self.snr_grid),
            "sampler": self.sampler,
            "corpus": self.corpus,
            "entries": [e.to_dict() for e in self.entries],
        }

    def save(self) -> Path:
        path = self.path_of(MANIFEST_NAME)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")
        return path


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """Load a manifest file (or the manifest inside a dataset directory)"""
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {path}")
    except json.JSONDecodeError as e:
        raise ManifestError(f"manifest {path} is not valid JSON: {e}")

    if data.get("version") != MANIFEST_VERSION:
        raise ManifestError(f"{path}: unsupported manifest version {data.get('version')}")
    try:
        return DatasetManifest(
            kind=DatasetKind.parse(data["kind"]),
            seed=int(data["seed"]),
            entries=[ManifestEntry.from_dict(e) for e in data["entries"]],
            sample_rate=int(data["sample_rate"]),
            duration=float(data["duration"]),
            frame_len=int(data["frame_len"]),
            hop=int(data["hop"]),
            snr_grid=tuple(s if s == CLEAN else float(s) for s in data["snr_grid"]),
            sampler=data.get("sampler", {}),
            corpus=data.get("corpus", {}),
            root=path.parent,
        )
    except KeyError as e:
        raise ManifestError(f"{path}: missing field {e}")


# ============================================================================
# Building
# ============================================================================

def sequence_seed(seed: int, kind: DatasetKind, index: int) -> int:
    """Independent child seed for one sequence"""
    state = np.random.SeedSequence([seed, kind.code, index]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


def snr_conditions(kind: DatasetKind, index: int, sampler: SamplerConfig) -> List[Snr]:
    if kind is DatasetKind.DS_WGN:
        grid = sampler.train_snr_grid
        return [float(grid[index % len(grid)])]
    if kind is DatasetKind.DST_WGN:
        return [float(s) for s in sampler.test_snr_grid]
    return [CLEAN]


def snr_tag(snr: Snr) -> str:
    return "clean" if snr == CLEAN else f"snr{int(round(snr)):+03d}"


def _render_sequence(job) -> List[Dict]:
    kind, index, seed, sampler, corpus, root, frame_len, hop, wav_format = job
    seq_seed = sequence_seed(seed, kind, index)
    seq_dir = Path(root) / f"seq_{index:04d}"

    spec = sample_scenario(kind, np.random.default_rng([seq_seed, 0]), sampler,
                           speakers=corpus.speakers(kind.split), seed=seq_seed)
    dry = dry_signals(spec, corpus, np.random.default_rng([seq_seed, 1]))
    mixture, images, activity = render_scene(spec, dry, frame_len, hop, sampler.pause_threshold_db)
    target = make_target(spec, images, frame_len, hop)

    image_files = []
    for q, image in enumerate(images):
        write_wave(seq_dir / f"image_{q + 1}.wav", image, wav_format)
        image_files.append(f"{seq_dir.name}/image_{q + 1}.wav")
    write_wave(seq_dir / "target.wav", target, wav_format)

    entries = []
    for stream, snr in enumerate(snr_conditions(kind, index, sampler)):
        tag = snr_tag(snr)
        noisy = mix_noise(mixture, snr, np.random.default_rng([seq_seed, 2, stream]))
        write_wave(seq_dir / f"mixture_{tag}.wav", noisy, wav_format)
        (seq_dir / f"scenario_{tag}.json").write_text(
            json.dumps(spec.with_snr(snr).to_dict(), indent=1, sort_keys=True) + "\n")
        entries.append(ManifestEntry(
            id=f"{seq_dir.name}_{tag}",
            scenario=f"{seq_dir.name}/scenario_{tag}.json",
            mixture=f"{seq_dir.name}/mixture_{tag}.wav",
            images=tuple(image_files),
            target=f"{seq_dir.name}/target.wav",
            activity=tuple(int(a) for a in activity),
            snr_db=snr,
            seed=seq_seed,
            noise_stream=stream,
        ).to_dict())
    return entries


def build_dataset(kind: Union[DatasetKind, str], count: int, seed: int, corpus, root: Union[str, Path],
                  sampler: SamplerConfig = SamplerConfig(), frame_len: int = 1024, hop: int = 512,
                  workers: int = 1, wav_format: str = "float", progress: bool = True) -> DatasetManifest:
    """
    Render `count` sequences of `kind` into `root` and write the manifest

    Args:
        kind: dataset kind
        count: number of sequences (noisy test sets render each at every test SNR)
        seed: global seed; sequence i uses sequence_seed(seed, kind, i)
        corpus: speaker provider (SyntheticCorpus or WavCorpus)
        root: output directory of this dataset
        workers: parallel processes
    """
    kind = DatasetKind.parse(kind) if isinstance(kind, str) else kind
    sampler.validate()
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)

    if kind is DatasetKind.DST_WGN:
        grid: Tuple[Snr, ...] = tuple(float(s) for s in sampler.test_snr_grid)
    elif kind is DatasetKind.DS_WGN:
        grid = tuple(float(s) for s in sampler.train_snr_grid)
    else:
        grid = (CLEAN,)

    manifest = DatasetManifest(
        kind=kind, seed=seed, sample_rate=sampler.sample_rate, duration=sampler.duration,
        frame_len=frame_len, hop=hop, snr_grid=grid,
        sampler=json.loads(json.dumps(dataclasses.asdict(sampler))), corpus=corpus.describe(), root=root,
    )
    if count == 0:
        logger.warning("%s: count is 0, writing an empty manifest", kind.value)
        manifest.save()
        return manifest

    jobs = [(kind, i, seed, sampler, corpus, str(root), frame_len, hop, wav_format) for i in range(count)]
    bar = dict(total=count, desc=kind.value, unit="seq", disable=not progress)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(tqdm(pool.map(_render_sequence, jobs), **bar))
    else:
        results = [_render_sequence(job) for job in tqdm(jobs, **bar)]

    manifest.entries = [ManifestEntry.from_dict(e) for seq in results for e in seq]
    path = manifest.save()
    logger.info("%s: %d sequences, %d entries -> %s", kind.value, count, len(manifest.entries), path)
    return manifest


def rerender_entry(manifest: DatasetManifest, entry: ManifestEntry, corpus,
                   sampler: Optional[SamplerConfig] = None) -> MultichannelWave:
    """Recompute an entry's mixture from its scenario file and seeds"""
    spec = manifest.scenario(entry)
    threshold = (sampler or SamplerConfig()).pause_threshold_db
    dry = dry_signals(spec, corpus, np.random.default_rng([entry.seed, 1]))
    mixture, _, _ = render_scene(spec, dry, manifest.frame_len, manifest.hop, threshold)
    return mix_noise(mixture, entry.snr_db, np.random.default_rng([entry.seed, 2, entry.noise_stream]))
