"""
spatialtap command line

    spatialtap gen   --preset desk --kind DST-clean --count 25
    spatialtap train --preset desk --dataset DS-clean
    spatialtap probe --preset desk --run masknet-clean --dataset DST-clean --dataset DST-WGN
    spatialtap plot  clusters --preset desk --run masknet-clean --sequence 0
    spatialtap report

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .checkpoint import Checkpoint
from .config import PRESETS, ExperimentConfig
from .corpus import open_corpus
from .dataset import build_dataset, load_manifest
from .errors import ConfigError, SpatialTapError
from .network import MaskNet, forward
from .probe import (
    TABLE_COLUMNS, kcluster, label_clusters, markdown_table, merge_tables, normalize, prepare_sequence,
    probe_manifest, write_json, write_table,
)
from .plots import check_artifact, plot_clusters, plot_features, plot_phase_mask, plot_target
from .scene import DatasetKind
from .spectral import stft
from .training import train
from .workspace import Workspace, run_name

logger = logging.getLogger(__name__)

TRAIN_KINDS = (DatasetKind.DS_CLEAN, DatasetKind.DS_WGN)
TEST_KINDS = (DatasetKind.DST_CLEAN, DatasetKind.DST_WGN, DatasetKind.DST_1POS, DatasetKind.DST_1SPK)


# ============================================================================
# Configuration
# ============================================================================

def resolve_config(args) -> ExperimentConfig:
    """Preset < environment < --config file < flags"""
    data = {}
    if args.config:
        data = ExperimentConfig.load(args.config).to_dict()
    preset = args.preset or data.get("preset") or "paper"
    config = ExperimentConfig.from_preset(preset)
    if data:
        data["preset"] = preset
        config = config.merged(data)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.workspace:
        config = config.replace(workspace=args.workspace)
    return config.validate()


def setup_logging(verbose: bool, quiet: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)-7s %(name)s: %(message)s", force=True)


def _progress(args) -> bool:
    return not args.quiet and sys.stderr.isatty()


def _status(args, message: str):
    if not args.quiet:
        print(message)


def _load_model(args, config: ExperimentConfig, ws: Workspace):
    path = Path(args.checkpoint) if args.checkpoint else ws.run_dir(args.run) / "checkpoint.ckpt"
    ckpt = Checkpoint.load(path)
    return ckpt.build_model(), path


# ============================================================================
# Verbs
# ============================================================================

def cmd_gen(args, config: ExperimentConfig) -> int:
    ws = Workspace(config.workspace)
    kinds = [DatasetKind.parse(k) for k in args.kind] if args.kind else list(TRAIN_KINDS + TEST_KINDS)
    corpus = open_corpus(args.corpus or config.corpus)
    with ws.lock():
        for kind in kinds:
            count = args.count
            if count is None:
                count = config.train_count if kind.is_training else config.test_count
            manifest = build_dataset(kind, count, config.seed, corpus, ws.dataset_dir(kind),
                                     sampler=config.sampler, frame_len=config.model.frame_len,
                                     hop=config.model.hop, workers=args.workers or config.workers,
                                     wav_format=args.wav_format, progress=_progress(args))
            marker = "✓" if count else "⚠️ "
            _status(args, f"{marker} {kind.value}: {count} sequences, {len(manifest.entries)} entries "
                          f"-> {ws.dataset_dir(kind)}")
    return 0


def cmd_train(args, config: ExperimentConfig) -> int:
    ws = Workspace(config.workspace)
    manifest = load_manifest(ws.resolve_dataset(args.dataset))
    val_manifest = load_manifest(ws.resolve_dataset(args.val_dataset)) if args.val_dataset else None

    hyper = config.train
    changes = {k: v for k, v in (("epochs", args.epochs), ("max_steps", args.max_steps), ("lr", args.lr),
                                 ("threads", args.threads)) if v is not None}
    if changes:
        hyper = dataclasses.replace(hyper, **changes)
        config = config.replace(train=hyper)

    run = args.run or run_name(manifest.kind)
    run_dir = ws.run_dir(run)
    resume = Checkpoint.load(run_dir / "checkpoint.ckpt") if args.resume else None
    model = resume.build_model() if resume else MaskNet(config.model, memoryless=args.memoryless)

    with ws.lock():
        result = train(model, manifest, hyper, run_dir, val_manifest=val_manifest, resume=resume,
                       progress=_progress(args), dataset=manifest.kind.value, run=run)
        config.save(run_dir / "config.json")

    _status(args, f"✓ {run}: step {result.checkpoint.step}, train loss {result.final_train_loss:.5f}"
                  + (f", validation {result.final_val_loss:.5f}" if result.final_val_loss is not None else ""))
    _status(args, f"   checkpoint {result.checkpoint_path}")
    return 0


def cmd_probe(args, config: ExperimentConfig) -> int:
    ws = Workspace(config.workspace)
    probe_config = config.probe
    changes = {k: v for k, v in (("trials", args.trials), ("attempts", args.attempts),
                                 ("weighting", args.weighting), ("normalization", args.normalization),
                                 ("center_update", args.center_update)) if v is not None}
    if args.taps:
        changes["taps"] = tuple(args.taps)
    probe_config = dataclasses.replace(probe_config, **changes)
    probe_config.validate()

    model, ckpt_path = _load_model(args, config, ws)
    run = args.run if not args.checkpoint else ckpt_path.parent.name
    datasets = args.dataset or [k.value for k in TEST_KINDS]

    with ws.lock():
        for name in datasets:
            manifest = load_manifest(ws.resolve_dataset(name))
            reports = probe_manifest(manifest, model, probe_config, progress=_progress(args))
            stem = ws.report_dir(run) / manifest.kind.value.lower()
            if "csv" in config.formats:
                write_table(reports, stem.with_suffix(".csv"))
            if "json" in config.formats:
                write_json(reports, stem.with_suffix(".json"), per_sequence=args.per_sequence)
            for report in reports:
                row = report.table_row()
                marker = "✓" if report.complete else "⚠️ "
                _status(args, f"{marker} {row['dataset']:<10} SNR {row['SNR']:>4}  "
                              f"grouping {row['grouping_in'] or '-':>8} | {row['grouping_out'] or '-':>8}  "
                              f"d_bar {row['dbar_in'] or '-':>7} | {row['dbar_out'] or '-':>7}  "
                              f"pause {row['pause_in'] or '-':>8} | {row['pause_out'] or '-':>8}")
    return 0


def cmd_plot(args, config: ExperimentConfig) -> int:
    artifact = check_artifact(args.artifact)
    ws = Workspace(config.workspace)
    manifest = load_manifest(ws.resolve_dataset(args.dataset))
    entry = _find_entry(manifest, args.sequence)
    spec = manifest.scenario(entry)
    out_dir = Path(args.out) if args.out else ws.figure_dir(args.run or "dataset")
    path = out_dir / f"{entry.id}_{artifact}.svg"

    with ws.lock():
        if artifact == "target":
            plot_target(manifest.target(entry), spec.switch_times, path)
            _status(args, f"✓ {path}")
            return 0

        model, _ = _load_model(args, config, ws)
        tensor = stft(manifest.mixture(entry), model.config.frame_len, model.config.hop)
        mask, trace = forward(model, tensor, entry.id)
        taps = config.probe.taps
        if artifact == "phase-mask":
            plot_phase_mask(mask, tensor.frame_times, tensor.frequencies, spec.switch_times, path,
                            channel=min(1, tensor.num_channels - 1))
        elif artifact == "features":
            traces = {tap: normalize(trace, tap, config.probe.normalization) for tap in taps}
            plot_features(traces, tensor.frame_times, spec.switch_times, path)
        else:
            sequence = prepare_sequence(model, manifest, entry)
            timelines = {}
            for tap in taps:
                frames = normalize(sequence.trace, tap, config.probe.normalization)
                rng = np.random.default_rng([config.probe.seed, 0, manifest.entries.index(entry)])
                clusters = kcluster(frames, spec.num_sources + 1, config.probe.attempts, rng,
                                    config.probe.max_iter, config.probe.center_update)
                labeled = label_clusters(clusters, sequence.activity, sequence.target_energy)
                timelines[f"h_{'in' if tap == 'input' else 'out'}"] = labeled.frame_labels()
            plot_clusters(timelines, tensor.frame_times, spec.switch_times, path, spec.num_sources)
    _status(args, f"✓ {path}")
    return 0


def _find_entry(manifest, sequence: str):
    if not manifest.entries:
        raise ConfigError("dataset has no sequences")
    for entry in manifest.entries:
        if entry.id == sequence or entry.id.startswith(f"{sequence}_"):
            return entry
    try:
        return manifest.entries[int(sequence)]
    except (ValueError, IndexError):
        raise ConfigError(f"no sequence '{sequence}' in {manifest.kind.value}")


def cmd_report(args, config: ExperimentConfig) -> int:
    ws = Workspace(config.workspace)
    inputs = [Path(p) for p in args.inputs] if args.inputs else sorted(
        p for p in (ws.root / "reports").glob("*/*.csv"))
    if not inputs:
        raise ConfigError(f"no probe tables found under {ws.root / 'reports'}")
    rows = merge_tables(inputs)
    out = Path(args.out) if args.out else ws.root / "reports" / "table.csv"

    with ws.lock():
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", newline="") as f:
            f.write(",".join(TABLE_COLUMNS) + "\n")
            for row in rows:
                f.write(",".join(row[c] for c in TABLE_COLUMNS) + "\n")
        table = markdown_table(rows)
        out.with_suffix(".md").write_text(table)
    if not args.quiet:
        print(table, end="")
    _status(args, f"✓ {len(rows)} rows from {len(inputs)} tables -> {out}")
    return 0


# ============================================================================
# Parser
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="FILE", help="JSON config file (see ExperimentConfig.save)")
    common.add_argument("--seed", type=int, help="global seed")
    common.add_argument("--workspace", metavar="DIR", help="workspace directory (env: SPATIALTAP_WORKSPACE)")
    common.add_argument("--preset", choices=PRESETS, help="paper (F=513, U=128) or desk (F=129, U=32)")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    noise.add_argument("-q", "--quiet", action="store_true", help="warnings only, no progress bars")

    parser = argparse.ArgumentParser(prog="spatialtap", description="Spatial feature probing workbench")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbs = parser.add_subparsers(dest="verb", metavar="VERB")
    verbs.required = True

    p = verbs.add_parser("gen", parents=[common], help="render datasets")
    p.add_argument("--kind", action="append", metavar="KIND",
                   help="dataset kind (repeatable): " + ", ".join(k.value for k in DatasetKind))
    p.add_argument("--count", type=int, help="sequences per kind (default from config)")
    p.add_argument("--workers", type=int, help="parallel processes")
    p.add_argument("--corpus", metavar="DIR", help="speech corpus directory (default: synthetic)")
    p.add_argument("--wav-format", choices=("float", "pcm16"), default="float")
    p.set_defaults(func=cmd_gen)

    p = verbs.add_parser("train", parents=[common], help="train the masking network")
    p.add_argument("--dataset", default=DatasetKind.DS_CLEAN.value, help="kind name or dataset path")
    p.add_argument("--val-dataset", help="separate validation dataset")
    p.add_argument("--run", help="run name (default masknet-clean / masknet-wgn)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--max-steps", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--threads", type=int)
    p.add_argument("--resume", action="store_true", help="continue from the run's checkpoint")
    p.add_argument("--memoryless", action="store_true", help="replace the GRU by identity")
    p.set_defaults(func=cmd_train)

    p = verbs.add_parser("probe", parents=[common], help="cluster bottleneck features")
    p.add_argument("--run", default="masknet-clean")
    p.add_argument("--checkpoint", help="checkpoint path (overrides --run)")
    p.add_argument("--dataset", action="append", help="kind name or dataset path (repeatable)")
    p.add_argument("--taps", nargs="+", choices=("input", "output"))
    p.add_argument("--trials", type=int)
    p.add_argument("--attempts", type=int)
    p.add_argument("--weighting", choices=("unweighted", "weighted"))
    p.add_argument("--normalization", choices=("joint", "separate"))
    p.add_argument("--center-update", choices=("median", "mean"))
    p.add_argument("--no-per-sequence", dest="per_sequence", action="store_false",
                   help="leave the per-sequence breakdown out of the JSON report")
    p.set_defaults(func=cmd_probe)

    p = verbs.add_parser("plot", parents=[common], help="write SVG figures")
    p.add_argument("artifact", help="phase-mask | features | clusters | target")
    p.add_argument("--run", default="masknet-clean")
    p.add_argument("--checkpoint")
    p.add_argument("--dataset", default=DatasetKind.DST_CLEAN.value)
    p.add_argument("--sequence", default="0", help="sequence id or index")
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_plot)

    p = verbs.add_parser("report", parents=[common], help="merge probe tables")
    p.add_argument("inputs", nargs="*", help="probe CSV files (default: all under <workspace>/reports)")
    p.add_argument("--out", help="merged CSV path (a .md table is written next to it)")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.quiet)
    try:
        config = resolve_config(args)
        return args.func(args, config)
    except SpatialTapError as e:
        print(f"❌ {e}", file=sys.stderr)
        logger.debug("details", exc_info=True)
        return e.exit_code
    except KeyboardInterrupt:
        print("\n⚠️  interrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
