#!/usr/bin/env python3
"""
Desk-scale trend run

Generates the desk-preset datasets, trains the masking network on DS-WGN,
probes every test set and checks the qualitative trends:

    - h_out groups frames by position clearly better than h_in
    - a single speaker moving is separable, two speakers at one position are not
    - h_out stays ahead of h_in at every SNR, degrading gracefully
    - an untrained network scores near chance
    - repeated probing gives byte-identical tables

Takes roughly half an hour on a laptop CPU.
"""

import argparse
import dataclasses
import sys
import time
from pathlib import Path
from typing import Dict, List, Tuple

from spatialtap.checkpoint import Checkpoint
from spatialtap.cli import main as cli
from spatialtap.config import ExperimentConfig
from spatialtap.network import MaskNet
from spatialtap.probe import read_table
from spatialtap.workspace import Workspace

TREND_SNRS = ("-10", "0", "10", "30")


def run(*argv: str):
    code = cli(list(argv))
    if code != 0:
        raise SystemExit(f"❌ spatialtap {' '.join(argv)} exited with {code}")


def _value(row: Dict[str, str], column: str) -> float:
    return float(row[column]) if row[column] else float("nan")


def _rows(path: Path) -> Dict[str, Dict[str, str]]:
    return {row["SNR"]: row for row in read_table(path)}


def check_trends(reports: Path, baseline: Path) -> List[Tuple[str, bool, str]]:
    results = []

    clean = _rows(reports / "dst-clean.csv")["inf"]
    g_in, g_out = _value(clean, "grouping_in"), _value(clean, "grouping_out")
    results.append(("DST-clean: grouping h_out >= h_in + 10", g_out >= g_in + 10, f"{g_in:.1f} -> {g_out:.1f}"))
    p_in, p_out = _value(clean, "pause_in"), _value(clean, "pause_out")
    results.append(("DST-clean: pause h_out < h_in", p_out < p_in, f"{p_in:.1f} -> {p_out:.1f}"))
    d_in, d_out = _value(clean, "dbar_in"), _value(clean, "dbar_out")
    results.append(("DST-clean: d_bar h_out < h_in", d_out < d_in, f"{d_in:.3f} -> {d_out:.3f}"))

    spk = _value(_rows(reports / "dst-1spk.csv")["inf"], "grouping_out")
    pos = _value(_rows(reports / "dst-1pos.csv")["inf"], "grouping_out")
    results.append(("DST-1Spk >= DST-1Pos + 10 (h_out)", spk >= pos + 10, f"{spk:.1f} vs {pos:.1f}"))
    results.append(("DST-1Pos h_out <= 75", pos <= 75, f"{pos:.1f}"))

    noisy = _rows(reports / "dst-wgn.csv")
    ahead = all(_value(noisy[s], "grouping_out") > _value(noisy[s], "grouping_in") for s in TREND_SNRS)
    detail = ", ".join(f"{s} dB: {_value(noisy[s], 'grouping_in'):.1f}/{_value(noisy[s], 'grouping_out'):.1f}"
                       for s in TREND_SNRS)
    results.append(("DST-WGN: h_out > h_in at every SNR", ahead, detail))
    outs = [_value(noisy[s], "grouping_out") for s in reversed(TREND_SNRS)]
    monotone = all(later <= earlier + 5 for earlier, later in zip(outs, outs[1:]))
    results.append(("DST-WGN: h_out non-increasing as SNR drops", monotone,
                    " -> ".join(f"{v:.1f}" for v in outs)))

    null = _rows(baseline / "dst-clean.csv")["inf"]
    n_in, n_out = _value(null, "grouping_in"), _value(null, "grouping_out")
    results.append(("untrained: both taps within 50 +- 15", abs(n_in - 50) <= 15 and abs(n_out - 50) <= 15,
                    f"{n_in:.1f} / {n_out:.1f}"))
    return results


def main():
    parser = argparse.ArgumentParser(description="spatialtap desk-scale trend run")
    parser.add_argument("--workspace", default="workspace-desk")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--skip-gen", action="store_true", help="reuse existing datasets")
    parser.add_argument("--skip-train", action="store_true", help="reuse the existing checkpoint")
    args = parser.parse_args()

    common = ["--preset", "desk", "--workspace", args.workspace, "--seed", str(args.seed)]
    ws = Workspace(args.workspace)

    print("=" * 70)
    print("spatialtap desk-scale trends")
    print("=" * 70)
    start = time.perf_counter()

    if not args.skip_gen:
        print("\n📦 Generating datasets...")
        run("gen", *common, "--workers", str(args.workers), "--kind", "DS-WGN", "--kind", "DST-clean",
            "--kind", "DST-1Pos", "--kind", "DST-1Spk")
        # the noisy test set only needs the trend SNRs
        config = ExperimentConfig.from_preset("desk").with_seed(args.seed).replace(workspace=args.workspace)
        config = config.replace(sampler=dataclasses.replace(
            config.sampler, test_snr_grid=tuple(float(s) for s in TREND_SNRS)))
        config_path = config.save(Path(args.workspace) / "trend-config.json")
        run("gen", "--config", str(config_path), "--workspace", args.workspace, "--workers", str(args.workers),
            "--kind", "DST-WGN")

    if not args.skip_train:
        print("\n🏋️  Training masknet-wgn...")
        run("train", *common, "--dataset", "DS-WGN")

    print("\n🔎 Probing...")
    run("probe", *common, "--run", "masknet-wgn")
    first = (ws.report_dir("masknet-wgn") / "dst-clean.csv").read_bytes()
    run("probe", *common, "--run", "masknet-wgn", "--dataset", "DST-clean")
    deterministic = first == (ws.report_dir("masknet-wgn") / "dst-clean.csv").read_bytes()

    print("\n🎲 Untrained baseline...")
    config = ExperimentConfig.from_preset("desk").with_seed(args.seed)
    Checkpoint.capture(MaskNet(config.model)).save(ws.run_dir("untrained") / "checkpoint.ckpt")
    run("probe", *common, "--run", "untrained", "--dataset", "DST-clean")

    results = check_trends(ws.report_dir("masknet-wgn"), ws.report_dir("untrained"))
    results.append(("repeat probe: identical CSV bytes", deterministic, ""))

    print("\n" + "=" * 70)
    print(f"{'Criterion':<46} {'Result':<8} Detail")
    print("-" * 70)
    for name, ok, detail in results:
        print(f"{name:<46} {'✓' if ok else '❌':<8} {detail}")
    print("-" * 70)
    print(f"elapsed {(time.perf_counter() - start) / 60:.1f} min")

    if all(ok for _, ok, _ in results):
        print("✅ ALL TRENDS REPRODUCED")
        return 0
    print("⚠️  SOME TRENDS NOT REPRODUCED")
    return 1


if __name__ == "__main__":
    sys.exit(main())
