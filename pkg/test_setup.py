#!/usr/bin/env python3
"""
Quick check that spatialtap is installed and working

Run this first, before generating datasets or training
"""

import sys

if sys.version_info < (3, 9):
    print("❌ Error: Python 3.9+ required")
    print(f"   You have: {sys.version}")
    sys.exit(1)


def check_imports() -> bool:
    ok = True
    for name in ("numpy", "scipy", "torch", "soundfile", "matplotlib", "tqdm"):
        try:
            module = __import__(name)
            print(f"✓ {name} {getattr(module, '__version__', '')}")
        except ImportError as e:
            print(f"❌ Error importing {name}: {e}")
            ok = False
    try:
        import spatialtap
        print(f"✓ spatialtap {spatialtap.__version__}")
    except ImportError as e:
        print(f"❌ Error importing spatialtap: {e}")
        print("   Run `pip install -e .` in the repository root")
        ok = False
    return ok


def check_pipeline():
    """Render one short scene, run a tiny network over it and cluster its features"""
    import numpy as np

    from spatialtap.config import ExperimentConfig
    from spatialtap.corpus import SyntheticCorpus
    from spatialtap.network import MaskNet, forward
    from spatialtap.probe import kcluster, label_clusters, normalize
    from spatialtap.rir import estimate_rt60, synth_rir
    from spatialtap.scene import DatasetKind, dry_signals, render_scene, sample_scenario
    from spatialtap.spectral import frame_energy, istft, stft
    from spatialtap.beamform import make_target

    config = ExperimentConfig.from_preset("desk")
    frame_len, hop = config.model.frame_len, config.model.hop
    rng = np.random.default_rng(0)

    print("\n1. Sampling a DST-clean scenario...")
    spec = sample_scenario(DatasetKind.DST_CLEAN, rng, config.sampler)
    print(f"✓ room {spec.room.dimensions[0]:.1f} x {spec.room.dimensions[1]:.1f} x "
          f"{spec.room.dimensions[2]:.1f} m, T60 {spec.room.rt60:.2f} s, "
          f"DoAs {spec.sources[0].doa_deg:.0f} / {spec.sources[1].doa_deg:.0f} deg")

    print("\n2. Checking the room impulse response...")
    rir = synth_rir(spec.room, spec.sources[0].position, spec.array.mic_positions[0], spec.sample_rate)
    measured = estimate_rt60(rir, spec.sample_rate)
    marker = "✓" if abs(measured - spec.room.rt60) <= 0.2 * spec.room.rt60 else "⚠️ "
    print(f"{marker} measured T60 {measured:.2f} s (configured {spec.room.rt60:.2f} s)")

    print("\n3. Rendering...")
    dry = dry_signals(spec, SyntheticCorpus(), rng)
    mixture, images, activity = render_scene(spec, dry, frame_len, hop)
    target = make_target(spec, images, frame_len, hop)
    tensor = stft(mixture, frame_len, hop)
    error = np.max(np.abs(istft(tensor, mixture.num_samples).samples - mixture.samples))
    print(f"✓ {tensor.num_frames} frames, STFT round-trip error {error:.1e}")

    print("\n4. Network forward pass...")
    model = MaskNet(config.model)
    mask, trace = forward(model, tensor, "check")
    print(f"✓ mask {mask.values.shape}, h_in {trace.h_in_raw.shape}, h_out {trace.h_out_raw.shape}")

    print("\n5. Clustering h_out...")
    clusters = kcluster(normalize(trace, "output"), 3, attempts=2, rng=np.random.default_rng(0))
    labeled = label_clusters(clusters, activity, frame_energy(stft(target, frame_len, hop)))
    print(f"✓ cluster sizes {clusters.cluster_sizes().tolist()}, pause cluster {labeled.pause_cluster}")


def main():
    print("\nspatialtap quick check")
    print("This will verify your setup is working\n")
    if not check_imports():
        sys.exit(1)
    try:
        check_pipeline()
    except KeyboardInterrupt:
        print("\n\n⚠️  Check interrupted")
        sys.exit(130)
    except Exception as e:
        print(f"\n\n❌ Check failed: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
    print("\n" + "=" * 60)
    print("✅ ALL CHECKS PASSED - ready to generate datasets")
    print("=" * 60)


if __name__ == "__main__":
    main()
