"""
End-to-end training of the masking network

One sequence per optimizer step, Adam with gradient-norm clipping. The
training target is the beamformed image sum stored with each manifest
entry; the loss compares compressed complex spectra.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import torch
from tqdm import tqdm

from .audio import MultichannelWave
from .checkpoint import Checkpoint
from .config import TrainConfig
from .dataset import DatasetManifest, ManifestEntry
from .errors import ConfigError, DivergenceError, GeometryError
from .network import MaskNet, compress, masked_sum, model_checksum, to_torch
from .spectral import SpectralTensor, stft

logger = logging.getLogger(__name__)

METRICS_COLUMNS = ("step", "epoch", "train_loss", "val_loss", "grad_norm")
CHECKPOINT_NAME = "checkpoint.ckpt"
METRICS_NAME = "metrics.csv"


def compressed_loss(estimate: torch.Tensor, target: torch.Tensor, power: float = 0.3) -> torch.Tensor:
    """Mean squared error between |z|^power e^{j angle z} of both spectra"""
    diff = compress(estimate, power) - compress(target, power)
    return (diff.real ** 2 + diff.imag ** 2).mean()


def loss(estimate: SpectralTensor, target: MultichannelWave, power: float = 0.3) -> float:
    """Compressed spectral error of a single-channel estimate against a mono target wave"""
    if estimate.num_channels != 1 or target.num_channels != 1:
        raise GeometryError("loss compares a single-channel estimate with a mono target")
    reference = stft(target, estimate.frame_len, estimate.hop)
    if reference.data.shape != estimate.data.shape:
        raise GeometryError(f"estimate {estimate.data.shape} and target {reference.data.shape} are not aligned")
    with torch.no_grad():
        return float(compressed_loss(to_torch(estimate), to_torch(reference), power))


@dataclass
class TrainResult:
    checkpoint: Checkpoint
    checkpoint_path: Path
    metrics_path: Path
    final_train_loss: float
    final_val_loss: Optional[float]


def split_validation(manifest: DatasetManifest, val_fraction: float) -> Tuple[List[ManifestEntry], List[ManifestEntry]]:
    """The last `val_fraction` of entries become the validation set"""
    entries = list(manifest.entries)
    n_val = int(round(len(entries) * val_fraction))
    if n_val >= len(entries):
        n_val = len(entries) - 1
    if n_val <= 0:
        return entries, []
    return entries[:-n_val], entries[-n_val:]


class _Sequences:
    """Loads (mixture STFT, target STFT) pairs for manifest entries"""

    def __init__(self, manifest: DatasetManifest, model: MaskNet):
        cfg = model.config
        if manifest.frame_len != cfg.frame_len or manifest.hop != cfg.hop:
            raise GeometryError(f"dataset framing {manifest.frame_len}/{manifest.hop} does not match "
                                f"model framing {cfg.frame_len}/{cfg.hop}")
        self.manifest = manifest
        self.frame_len = cfg.frame_len
        self.hop = cfg.hop
        self.num_mics = cfg.num_mics

    def load(self, entry: ManifestEntry) -> Tuple[torch.Tensor, torch.Tensor]:
        mixture = self.manifest.mixture(entry)
        if mixture.num_channels != self.num_mics:
            raise GeometryError(f"{entry.id}: {mixture.num_channels} channels, model expects {self.num_mics}")
        x = to_torch(stft(mixture, self.frame_len, self.hop))
        s = to_torch(stft(self.manifest.target(entry), self.frame_len, self.hop))
        return x, s


def _evaluate(model: MaskNet, data: _Sequences, entries: List[ManifestEntry], power: float) -> Optional[float]:
    if not entries:
        return None
    total = 0.0
    with torch.no_grad():
        for entry in entries:
            x, s = data.load(entry)
            total += float(compressed_loss(masked_sum(model(x), x), s, power))
    return total / len(entries)


def _read_metrics(path: Path) -> List[dict]:
    if not path.exists():
        return []
    with path.open(newline="") as f:
        return list(csv.DictReader(f))


def train(model: MaskNet, manifest: DatasetManifest, hyper: TrainConfig, out_dir: Union[str, Path],
          val_manifest: Optional[DatasetManifest] = None, resume: Optional[Checkpoint] = None,
          progress: bool = True, **extra) -> TrainResult:
    """
    Train `model` in place on every entry of `manifest`

    Writes <out_dir>/checkpoint.ckpt at every `checkpoint_every` steps and
    at the end, plus <out_dir>/metrics.csv (one row per step, validation
    loss filled in on the last step of each epoch).

    Raises:
        DivergenceError: the loss or gradient became non-finite; the model
            state before that step is saved first
    """
    hyper.validate()
    data = _Sequences(manifest, model)
    if val_manifest is not None:
        train_entries, val_entries = list(manifest.entries), list(val_manifest.entries)
        val_data = _Sequences(val_manifest, model)
    else:
        train_entries, val_entries = split_validation(manifest, hyper.val_fraction)
        val_data = data
    if not train_entries:
        raise ConfigError("training manifest has no entries")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ckpt_path = out_dir / CHECKPOINT_NAME
    metrics_path = out_dir / METRICS_NAME
    power = model.config.compression

    torch.manual_seed(hyper.seed)
    torch.set_num_threads(hyper.threads)

    optimizer = torch.optim.Adam(model.parameters(), lr=hyper.lr, betas=hyper.betas)
    step, start_epoch = 0, 0
    if resume is not None:
        model.load_state_dict(resume.build_model().state_dict())
        resume.load_optimizer(optimizer)
        step = resume.step
        start_epoch = step // len(train_entries)
        logger.info("resuming at step %d (epoch %d)", step, start_epoch)
    elif metrics_path.exists():
        metrics_path.unlink()

    total_steps = hyper.epochs * len(train_entries)
    if hyper.max_steps is not None:
        total_steps = min(total_steps, hyper.max_steps)

    def snapshot(epoch: int) -> Checkpoint:
        return Checkpoint.capture(model, optimizer, step=step, epoch=epoch, threads=hyper.threads, **extra)

    logger.info("training %d steps on %d sequences (%d for validation), %d threads",
                total_steps, len(train_entries), len(val_entries), hyper.threads)

    new_file = not metrics_path.exists()
    train_loss, val_loss = float("nan"), None
    with metrics_path.open("a", newline="") as f:
        writer = csv.writer(f)
        if new_file:
            writer.writerow(METRICS_COLUMNS)
        bar = tqdm(total=total_steps, initial=step, desc="train", unit="step", disable=not progress)

        epoch = start_epoch
        while step < total_steps:
            order = np.random.default_rng([hyper.seed, epoch]).permutation(len(train_entries))
            first = step - epoch * len(train_entries)
            for position in order[first:]:
                if step >= total_steps:
                    break
                x, s = data.load(train_entries[position])

                optimizer.zero_grad()
                value = compressed_loss(masked_sum(model(x), x), s, power)
                if not torch.isfinite(value):
                    path = snapshot(epoch).save(ckpt_path)
                    raise DivergenceError(step, str(path))
                value.backward()
                grad_norm = float(torch.nn.utils.clip_grad_norm_(model.parameters(), hyper.clip_norm))
                if not np.isfinite(grad_norm):
                    path = snapshot(epoch).save(ckpt_path)
                    raise DivergenceError(step, str(path))
                optimizer.step()

                step += 1
                train_loss = float(value)
                end_of_epoch = step % len(train_entries) == 0 or step == total_steps
                val_loss = _evaluate(model, val_data, val_entries, power) if end_of_epoch else None
                writer.writerow([step, epoch, f"{train_loss:.8g}",
                                 "" if val_loss is None else f"{val_loss:.8g}", f"{grad_norm:.8g}"])
                logger.debug("step %d loss %.5f grad %.3f", step, train_loss, grad_norm)
                bar.update(1)
                bar.set_postfix(loss=f"{train_loss:.4f}")

                if step % hyper.checkpoint_every == 0:
                    f.flush()
                    snapshot(epoch).save(ckpt_path)
                if val_loss is not None:
                    logger.info("epoch %d: train %.5f, validation %.5f", epoch, train_loss, val_loss)
            epoch += 1
        bar.close()

    final = snapshot(epoch)
    final.save(ckpt_path)
    logger.info("saved %s (step %d, checksum %s)", ckpt_path, step, model_checksum(model)[:12])
    return TrainResult(final, ckpt_path, metrics_path, train_loss, val_loss)


def last_logged_loss(metrics_path: Union[str, Path]) -> Optional[float]:
    rows = _read_metrics(Path(metrics_path))
    return float(rows[-1]["train_loss"]) if rows else None
