"""
Probing bottleneck features by clustering

Per sequence:
    features -> normalize -> L1 k-medians (best of N attempts)
             -> label clusters (pause + one per source) -> score

Three scores per tap:
    grouping success   share of a source's non-pause frames in "its" cluster
    d_bar              mean L1 distance of frames to their cluster center
    pause fraction     share of frames in the pause cluster
"""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from tqdm import tqdm

from .config import ProbeConfig
from .dataset import DatasetManifest, ManifestEntry
from .errors import DataError, GeometryError, ShapeError
from .network import FeatureTrace, MaskNet, model_checksum, tap_features
from .scene import CLEAN, PAUSE
from .spectral import frame_energy, stft

logger = logging.getLogger(__name__)

TAPS = ("input", "output")
TABLE_COLUMNS = ("dataset", "SNR", "grouping_in", "grouping_out", "dbar_in", "dbar_out", "pause_in", "pause_out")
_TAP_SUFFIX = {"input": "in", "output": "out"}


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True, eq=False)
class NormalizedTrace:
    vectors: np.ndarray   # (T, 2U): real parts of all units, then imaginary parts
    tap: str = "output"

    @property
    def num_frames(self) -> int:
        return self.vectors.shape[0]

    @property
    def num_units(self) -> int:
        return self.vectors.shape[1] // 2


@dataclass(frozen=True, eq=False)
class ClusterModel:
    centers: np.ndarray       # (k, D)
    assignments: np.ndarray   # (T,)
    frame_costs: np.ndarray   # (T,) L1 distance of each frame to its center
    attempts: Tuple[Dict, ...] = ()
    cost_history: Tuple[float, ...] = ()

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def total_cost(self) -> float:
        return float(self.frame_costs.sum())

    @property
    def num_frames(self) -> int:
        return self.assignments.shape[0]

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)

    @classmethod
    def from_centers(cls, frames: np.ndarray, centers: np.ndarray) -> "ClusterModel":
        """Assign `frames` to the nearest of the given centers"""
        frames = _as_frames(frames)
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        assignments, costs = _assign(frames, centers)
        return cls(centers, assignments, costs)


@dataclass(frozen=True, eq=False)
class LabeledClusters:
    model: ClusterModel
    labels: np.ndarray            # (k,) 0 = pause, q = source q
    pause_cluster: int
    mean_energy: np.ndarray       # (k,) mean target energy per cluster (nan if empty)
    histogram: np.ndarray         # (k, Q + 1) ground-truth label counts per cluster
    flags: Tuple[str, ...] = ()

    @property
    def assignments(self) -> np.ndarray:
        return self.model.assignments

    @property
    def num_sources(self) -> int:
        return self.model.k - 1

    def frame_labels(self) -> np.ndarray:
        """Label of every frame's cluster"""
        return self.labels[self.model.assignments]


@dataclass
class TapMetrics:
    grouping_success: float
    d_bar: float
    pause_fraction: float
    trials: Dict[str, List[float]] = field(default_factory=dict)
    per_sequence: List[Dict] = field(default_factory=list)

    def to_dict(self, per_sequence: bool = True) -> Dict:
        data = {"grouping_success": self.grouping_success, "d_bar": self.d_bar,
                "pause_fraction": self.pause_fraction, "trials": self.trials}
        if per_sequence:
            data["per_sequence"] = self.per_sequence
        return data


@dataclass
class ClusterReport:
    dataset: str
    snr: Union[float, str]
    taps: Dict[str, TapMetrics]
    settings: Dict
    flags: List[str] = field(default_factory=list)
    complete: bool = True

    def metric(self, tap: str, name: str) -> float:
        return getattr(self.taps[tap], name) if tap in self.taps else float("nan")

    @property
    def grouping_success(self) -> Dict[str, float]:
        return {tap: m.grouping_success for tap, m in self.taps.items()}

    @property
    def d_bar(self) -> Dict[str, float]:
        return {tap: m.d_bar for tap, m in self.taps.items()}

    @property
    def pause_fraction(self) -> Dict[str, float]:
        return {tap: m.pause_fraction for tap, m in self.taps.items()}

    def table_row(self) -> Dict[str, str]:
        row = {"dataset": self.dataset, "SNR": snr_label(self.snr)}
        for tap in TAPS:
            suffix = _TAP_SUFFIX[tap]
            row[f"grouping_{suffix}"] = _fmt(self.metric(tap, "grouping_success"))
            row[f"dbar_{suffix}"] = _fmt(self.metric(tap, "d_bar"))
            row[f"pause_{suffix}"] = _fmt(self.metric(tap, "pause_fraction"))
        return row

    def to_dict(self, per_sequence: bool = True) -> Dict:
        return {"dataset": self.dataset, "snr": self.snr, "complete": self.complete,
                "flags": self.flags, "settings": self.settings,
                "taps": {tap: m.to_dict(per_sequence) for tap, m in self.taps.items()}}


def snr_label(snr) -> str:
    if snr == CLEAN:
        return "inf"
    return snr if isinstance(snr, str) else f"{float(snr):g}"


def _fmt(value: float) -> str:
    return "" if value is None or not np.isfinite(value) else f"{value:.4f}"


# ============================================================================
# Normalization
# ============================================================================

def _complex_units(trace) -> np.ndarray:
    if isinstance(trace, NormalizedTrace):
        u = trace.num_units
        return trace.vectors[:, :u] + 1j * trace.vectors[:, u:]
    return np.asarray(trace)


def normalize(trace: Union[FeatureTrace, NormalizedTrace, np.ndarray], tap: str = "output",
              mode: str = "joint") -> NormalizedTrace:
    """
    Scale every unit into [-1, 1] over the sequence and stack re/im parts

    Args:
        trace: raw FeatureTrace, an already normalized trace, or a (T, U) complex array
        tap: which FeatureTrace tap to use
        mode: "joint" divides re and im of a unit by one common maximum,
            "separate" scales them independently
    """
    if isinstance(trace, FeatureTrace):
        raw = trace.raw(tap)
    else:
        tap = trace.tap if isinstance(trace, NormalizedTrace) else tap
        raw = _complex_units(trace)
    if raw.ndim != 2 or raw.shape[0] == 0:
        raise ShapeError(f"expected a non-empty (frames, units) trace, got shape {raw.shape}")

    re, im = raw.real.astype(float), raw.imag.astype(float)
    if mode == "joint":
        scale = np.maximum(np.abs(re).max(axis=0), np.abs(im).max(axis=0))
        scale_re = scale_im = np.where(scale > 0, scale, 1.0)
    elif mode == "separate":
        scale_re = np.abs(re).max(axis=0)
        scale_im = np.abs(im).max(axis=0)
        scale_re = np.where(scale_re > 0, scale_re, 1.0)
        scale_im = np.where(scale_im > 0, scale_im, 1.0)
    else:
        raise ValueError(f"unknown normalization mode '{mode}'")
    return NormalizedTrace(np.concatenate([re / scale_re, im / scale_im], axis=1), tap)


# ============================================================================
# L1 clustering
# ============================================================================

def _as_frames(frames) -> np.ndarray:
    x = frames.vectors if isinstance(frames, NormalizedTrace) else np.asarray(frames, dtype=float)
    if x.ndim == 1:
        x = x[:, np.newaxis]
    return x


def _assign(x: np.ndarray, centers: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    dist = cdist(x, centers, metric="cityblock")
    assignments = np.argmin(dist, axis=1)   # first minimum = lowest index on ties
    return assignments, dist[np.arange(x.shape[0]), assignments]


def _seed_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding with L1 distances as sampling weights"""
    chosen = [int(rng.integers(x.shape[0]))]
    nearest = cdist(x, x[chosen], metric="cityblock")[:, 0]
    for _ in range(1, k):
        total = nearest.sum()
        if total > 0:
            index = int(rng.choice(x.shape[0], p=nearest / total))
        else:
            index = int(rng.integers(x.shape[0]))
        chosen.append(index)
        nearest = np.minimum(nearest, cdist(x, x[[index]], metric="cityblock")[:, 0])
    return x[chosen].copy()


def _update_centers(x: np.ndarray, assignments: np.ndarray, costs: np.ndarray,
                    centers: np.ndarray, update: str) -> Tuple[np.ndarray, List[int]]:
    reduce = np.median if update == "median" else np.mean
    new = centers.copy()
    empty = []
    for n in range(centers.shape[0]):
        members = assignments == n
        if members.any():
            new[n] = reduce(x[members], axis=0)
        else:
            empty.append(n)
    if empty:
        # farthest frames from their own centers become the new centers
        order = np.argsort(-costs, kind="stable")
        for n, index in zip(empty, order):
            new[n] = x[index]
    return new, empty


def _single_attempt(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int,
                    update: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray, List[float], int, int]:
    centers = _seed_centers(x, k, rng)
    assignments, costs = _assign(x, centers)
    history = [float(costs.sum())]
    reseeded = 0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        centers, empty = _update_centers(x, assignments, costs, centers, update)
        reseeded += len(empty)
        new_assignments, costs = _assign(x, centers)
        history.append(float(costs.sum()))
        if np.array_equal(new_assignments, assignments) and not empty:
            break
        assignments = new_assignments
    return centers, assignments, costs, history, iterations, reseeded


def kcluster(frames: Union[NormalizedTrace, np.ndarray], k: int, attempts: int = 5,
             rng: Optional[np.random.Generator] = None, max_iter: int = 100,
             update: str = "median") -> ClusterModel:
    """
    L1 clustering with restarts

    Each attempt seeds k centers k-means++ style, then alternates nearest-center
    assignment and per-coordinate median (or mean) updates until assignments
    stop changing or `max_iter` is reached. The attempt with the lowest total
    L1 cost wins; earlier attempts win ties.
    """
    x = _as_frames(frames)
    if k < 1:
        raise ValueError("k must be >= 1")
    if x.shape[0] < k:
        raise ShapeError(f"cannot form {k} clusters from {x.shape[0]} frames")
    if update not in ("median", "mean"):
        raise ValueError(f"unknown center update '{update}'")
    rng = rng if rng is not None else np.random.default_rng()

    best = None
    meta = []
    for attempt in range(attempts):
        seed = int(rng.integers(2 ** 63))
        centers, assignments, costs, history, iterations, reseeded = _single_attempt(
            x, k, np.random.default_rng(seed), max_iter, update)
        cost = float(costs.sum())
        meta.append({"seed": seed, "iterations": iterations, "cost": cost, "reseeded": reseeded})
        if reseeded:
            logger.debug("attempt %d re-seeded %d empty clusters", attempt, reseeded)
        if best is None or cost < best[0]:
            best = (cost, centers, assignments, costs, history)

    _, centers, assignments, costs, history = best
    return ClusterModel(centers, assignments, costs, tuple(meta), tuple(history))


# ============================================================================
# Labelling and scores
# ============================================================================

def label_clusters(model: ClusterModel, activity: Sequence[int], target_energy: Sequence[float],
                   num_sources: Optional[int] = None) -> LabeledClusters:
    """
    Name clusters after what they hold

    The cluster with the lowest mean target energy is the pause cluster.
    The others take the majority ground-truth source of their frames; when
    two clusters claim the same source, the assignment maximizing the total
    overlap decides.
    """
    activity = np.asarray(activity, dtype=int)
    energy = np.asarray(target_energy, dtype=float)
    if activity.shape[0] != model.num_frames or energy.shape[0] != model.num_frames:
        raise ShapeError(f"{model.num_frames} assignments, {activity.shape[0]} activity labels, "
                         f"{energy.shape[0]} energies")
    k = model.k
    q_count = num_sources if num_sources is not None else k - 1
    if q_count != k - 1:
        raise ValueError(f"k = {k} clusters cannot label {q_count} sources plus pause")

    sizes = model.cluster_sizes()
    empty = [n for n in range(k) if sizes[n] == 0]
    histogram = np.zeros((k, q_count + 1), dtype=int)
    np.add.at(histogram, (model.assignments, np.clip(activity, 0, q_count)), 1)

    mean_energy = np.full(k, np.nan)
    for n in range(k):
        if sizes[n]:
            mean_energy[n] = energy[model.assignments == n].mean()
    filled = np.where(sizes > 0)[0]
    pause = int(filled[np.argmin(mean_energy[filled])])

    labels = np.full(k, PAUSE, dtype=int)
    rest = [n for n in range(k) if n != pause]
    if rest:
        counts = histogram[rest][:, 1:]
        majority = np.argmax(counts, axis=1)
        if len(set(majority.tolist())) == len(rest):
            choice = majority
        else:
            rows, choice = linear_sum_assignment(counts, maximize=True)
            choice = choice[np.argsort(rows)]
        for n, q in zip(rest, choice):
            labels[n] = int(q) + 1

    flags = []
    for n in empty:
        flags.append(f"empty cluster {n} labelled {labels[n]} by assignment")
        logger.warning(flags[-1])
    return LabeledClusters(model, labels, pause, mean_energy, histogram, tuple(flags))


def _source_counts(labeled: LabeledClusters, activity) -> Tuple[np.ndarray, np.ndarray]:
    activity = np.asarray(activity, dtype=int)
    frame_labels = labeled.frame_labels()
    kept = labeled.assignments != labeled.pause_cluster
    q_count = labeled.num_sources
    totals = np.array([np.sum(kept & (activity == q)) for q in range(1, q_count + 1)])
    hits = np.array([np.sum(kept & (activity == q) & (frame_labels == q)) for q in range(1, q_count + 1)])
    return hits, totals


def excluded_sources(labeled: LabeledClusters, activity) -> List[int]:
    """Sources without any non-pause frame"""
    _, totals = _source_counts(labeled, activity)
    return [q + 1 for q in np.where(totals == 0)[0]]


def grouping_success(labeled: LabeledClusters, activity: Sequence[int], weighting: str = "unweighted") -> float:
    """
    Percentage of each source's non-pause frames found in the cluster labelled
    with that source; averaged over sources (unweighted) or pooled over frames
    (weighted). Sources without non-pause frames are left out; nan if none remain.
    """
    hits, totals = _source_counts(labeled, activity)
    valid = totals > 0
    if not valid.any():
        return float("nan")
    if weighting == "unweighted":
        return float(100.0 * np.mean(hits[valid] / totals[valid]))
    if weighting == "weighted":
        return float(100.0 * hits[valid].sum() / totals[valid].sum())
    raise ValueError(f"unknown weighting '{weighting}'")


def avg_center_distance(models: Sequence[ClusterModel]) -> float:
    """Mean over sequences and clusters of the mean L1 frame-to-center distance"""
    if not models:
        raise ValueError("need at least one clustered sequence")
    per_sequence = []
    for model in models:
        sizes = model.cluster_sizes()
        sums = np.bincount(model.assignments, weights=model.frame_costs, minlength=model.k)
        if np.any(sizes == 0):
            logger.warning("empty cluster counted as 0 in d_bar")
        means = np.divide(sums, sizes, out=np.zeros(model.k), where=sizes > 0)
        per_sequence.append(means.mean())
    return float(np.mean(per_sequence))


def pause_fraction(labeled: Union[LabeledClusters, Sequence[LabeledClusters]]) -> float:
    """Percentage of frames in the pause cluster, pooled over all given sequences"""
    items = [labeled] if isinstance(labeled, LabeledClusters) else list(labeled)
    frames = sum(item.model.num_frames for item in items)
    paused = sum(int(np.sum(item.assignments == item.pause_cluster)) for item in items)
    return 100.0 * paused / frames if frames else float("nan")


# ============================================================================
# Protocol
# ============================================================================

@dataclass
class ProbeSequence:
    """Everything the protocol needs from one test sequence"""
    id: str
    trace: FeatureTrace
    activity: np.ndarray
    target_energy: np.ndarray


def check_compatible(model: MaskNet, manifest: DatasetManifest):
    cfg = model.config
    if manifest.frame_len != cfg.frame_len or manifest.hop != cfg.hop:
        raise GeometryError(f"dataset framing {manifest.frame_len}/{manifest.hop} does not match "
                            f"model framing {cfg.frame_len}/{cfg.hop}")
    mics = manifest.sampler.get("num_mics")
    if mics is not None and int(mics) != cfg.num_mics:
        raise GeometryError(f"dataset has {mics} microphones, model expects {cfg.num_mics}")


def prepare_sequences(model: MaskNet, manifest: DatasetManifest, snr=None,
                      progress: bool = False) -> List[ProbeSequence]:
    """Run the network over the manifest entries of one SNR condition"""
    check_compatible(model, manifest)
    entries = [e for e in manifest.entries if snr is None or e.snr_db == snr]
    return [prepare_sequence(model, manifest, entry)
            for entry in tqdm(entries, desc=f"features {manifest.kind.value}", unit="seq", disable=not progress)]


def prepare_sequence(model: MaskNet, manifest: DatasetManifest, entry: ManifestEntry) -> ProbeSequence:
    cfg = model.config
    mixture = manifest.mixture(entry)
    if mixture.num_channels != cfg.num_mics:
        raise GeometryError(f"{entry.id}: {mixture.num_channels} channels, model expects {cfg.num_mics}")
    tensor = stft(mixture, cfg.frame_len, cfg.hop)
    activity = np.asarray(entry.activity, dtype=int)
    if activity.shape[0] != tensor.num_frames:
        raise ShapeError(f"{entry.id}: {activity.shape[0]} activity labels for {tensor.num_frames} frames")
    energy = frame_energy(stft(manifest.target(entry), cfg.frame_len, cfg.hop))
    return ProbeSequence(entry.id, tap_features(model, tensor, entry.id), activity, energy)


def _num_sources(seq: ProbeSequence) -> int:
    return max(2, int(seq.activity.max()))


def evaluate_tap(sequences: Sequence[ProbeSequence], tap: str, config: ProbeConfig,
                 flags: List[str]) -> Tuple[TapMetrics, bool]:
    """Cluster and score every sequence in every trial for one tap"""
    normalized = [normalize(seq.trace, tap, config.normalization) for seq in sequences]
    grouping, d_bar, pause = [], [], []
    per_sequence: Dict[str, Dict[str, List[float]]] = {
        seq.id: {"grouping_success": [], "d_bar": [], "pause_fraction": []} for seq in sequences}
    complete = True

    for trial in range(config.trials):
        models, labeled_all, scores = [], [], []
        for index, (seq, frames) in enumerate(zip(sequences, normalized)):
            rng = np.random.default_rng([config.seed, trial, index])
            try:
                model = kcluster(frames, _num_sources(seq) + 1, config.attempts, rng,
                                 config.max_iter, config.center_update)
            except DataError as e:
                flags.append(f"{tap}/{seq.id}: {e}")
                complete = False
                continue
            labeled = label_clusters(model, seq.activity, seq.target_energy)
            score = grouping_success(labeled, seq.activity, config.weighting)
            if trial == 0:
                flags.extend(f"{tap}/{seq.id}: {flag}" for flag in labeled.flags)
                flags.extend(f"{tap}/{seq.id}: source {q} has no non-pause frames"
                             for q in excluded_sources(labeled, seq.activity))
            models.append(model)
            labeled_all.append(labeled)
            if np.isfinite(score):
                scores.append(score)
            record = per_sequence[seq.id]
            record["grouping_success"].append(score)
            record["d_bar"].append(avg_center_distance([model]))
            record["pause_fraction"].append(pause_fraction(labeled))

        if not models:
            continue
        grouping.append(float(np.mean(scores)) if scores else float("nan"))
        d_bar.append(avg_center_distance(models))
        pause.append(pause_fraction(labeled_all))

    metrics = TapMetrics(
        grouping_success=_nanmean(grouping), d_bar=_nanmean(d_bar), pause_fraction=_nanmean(pause),
        trials={"grouping_success": grouping, "d_bar": d_bar, "pause_fraction": pause},
        per_sequence=[{"id": sid, **values} for sid, values in per_sequence.items()],
    )
    return metrics, complete


def _nanmean(values: List[float]) -> float:
    finite = [v for v in values if np.isfinite(v)]
    return float(np.mean(finite)) if finite else float("nan")


def run_protocol(manifest: DatasetManifest, model: MaskNet, config: ProbeConfig = ProbeConfig(),
                 snr=None, progress: bool = False,
                 sequences: Optional[List[ProbeSequence]] = None) -> ClusterReport:
    """
    Probe one dataset condition (one SNR of a noisy test set)

    Sequence and trial generators derive from (config.seed, trial, sequence
    index), so reports do not depend on evaluation order.
    """
    config.validate()
    if snr is None and len(manifest.snr_grid) == 1:
        snr = manifest.snr_grid[0]
    if sequences is None:
        sequences = prepare_sequences(model, manifest, snr, progress)

    flags: List[str] = []
    complete = bool(sequences)
    if not sequences:
        flags.append("no sequences")
    taps = {}
    for tap in config.taps:
        if not sequences:
            break
        metrics, tap_complete = evaluate_tap(sequences, tap, config, flags)
        taps[tap] = metrics
        complete = complete and tap_complete

    settings = {"weighting": config.weighting, "normalization": config.normalization,
                "center_update": config.center_update, "trials": config.trials,
                "attempts": config.attempts, "max_iter": config.max_iter, "seed": config.seed,
                "model_checksum": model_checksum(model), "sequences": len(sequences)}
    report = ClusterReport(manifest.kind.value, snr if snr is not None else "all", taps, settings, flags, complete)
    for tap, metrics in taps.items():
        logger.info("%s %s %s: grouping %.1f%%, d_bar %.3f, pause %.1f%%", report.dataset, snr_label(report.snr),
                    tap, metrics.grouping_success, metrics.d_bar, metrics.pause_fraction)
    if not complete:
        logger.warning("%s %s: report incomplete (%d flags)", report.dataset, snr_label(report.snr), len(flags))
    return report


def probe_manifest(manifest: DatasetManifest, model: MaskNet, config: ProbeConfig = ProbeConfig(),
                   progress: bool = False) -> List[ClusterReport]:
    """One report per SNR condition present in the manifest"""
    conditions = []
    for entry in manifest.entries:
        if entry.snr_db not in conditions:
            conditions.append(entry.snr_db)
    return [run_protocol(manifest, model, config, snr, progress) for snr in conditions or [None]]


# ============================================================================
# Output
# ============================================================================

def write_table(reports: Sequence[ClusterReport], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=TABLE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for report in reports:
            writer.writerow(report.table_row())
    return path


def write_json(reports: Sequence[ClusterReport], path: Union[str, Path], per_sequence: bool = True) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = [report.to_dict(per_sequence) for report in reports]
    path.write_text(json.dumps(data, indent=1, sort_keys=True, allow_nan=True) + "\n")
    return path


def read_table(path: Union[str, Path]) -> List[Dict[str, str]]:
    with Path(path).open(newline="") as f:
        rows = list(csv.DictReader(f))
    if rows and set(rows[0]) != set(TABLE_COLUMNS):
        raise DataError(f"{path}: not a probe table (columns {sorted(rows[0])})")
    return rows


def merge_tables(paths: Sequence[Union[str, Path]]) -> List[Dict[str, str]]:
    """Rows of several probe tables, ordered by dataset then descending SNR"""
    rows = [row for p in paths for row in read_table(p)]

    def order(row):
        try:
            snr = float(row["SNR"])
        except ValueError:
            snr = float("-inf")
        return (row["dataset"], -snr)

    return sorted(rows, key=order)


def markdown_table(rows: Sequence[Dict[str, str]]) -> str:
    header = "| dataset | SNR | grouping h_in | grouping h_out | d̄ h_in | d̄ h_out | pause h_in | pause h_out |"
    lines = [header, "|" + "---|" * 8]
    for row in rows:
        lines.append("| " + " | ".join(row[c] or "-" for c in TABLE_COLUMNS) + " |")
    return "\n".join(lines) + "\n"
