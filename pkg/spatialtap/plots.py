"""
SVG figures

    phase-mask   phase of one channel's mask over (time, frequency)
    features     normalized h_in / h_out heatmaps
    clusters     per-tap timeline strip: pause / source 1 / source 2 ...
    target       target waveform

Every figure marks the source switch times. Output is byte-stable for
identical inputs (fixed SVG hash salt, no date metadata, text kept as text).
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402
from matplotlib.patches import Patch  # noqa: E402

from .audio import MultichannelWave  # noqa: E402
from .errors import ConfigError, ShapeError  # noqa: E402
from .network import ComplexMask  # noqa: E402
from .probe import NormalizedTrace  # noqa: E402

logger = logging.getLogger(__name__)

ARTIFACTS = ("phase-mask", "features", "clusters", "target")

golden_mean = (np.sqrt(5) - 1.0) / 2.0
fig_width = 7.0
params = {
    "svg.hashsalt": "spatialtap",
    "svg.fonttype": "none",
    "font.family": "sans-serif",
    "font.size": 8,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "legend.fontsize": 8,
    "lines.linewidth": 0.8,
    "figure.figsize": [fig_width, fig_width * golden_mean],
    "image.interpolation": "nearest",
}

# pause, source 1, source 2, source 3
LABEL_COLORS = ["#bdbdbd", "#2b8cbe", "#e6550d", "#31a354"]


def save_svg(fig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(params):
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    logger.info("wrote %s", path)
    return path


def _mark_switches(ax, switch_times: Sequence[float]):
    for t in switch_times:
        ax.axvline(t, color="k", linestyle="--", linewidth=1.0)


def _figure(rows: int = 1, height: Optional[float] = None):
    with matplotlib.rc_context(params):
        size = (fig_width, height or fig_width * golden_mean)
        return plt.subplots(rows, 1, figsize=size, squeeze=False, sharex=True)


def plot_phase_mask(mask: ComplexMask, frame_times: np.ndarray, frequencies: np.ndarray,
                    switch_times: Sequence[float], path, channel: int = 1) -> Path:
    """Phase of the mask of microphone `channel` (0-based) in radians"""
    values = mask.values
    if not 0 <= channel < values.shape[0]:
        raise ShapeError(f"mask has {values.shape[0]} channels, cannot plot channel {channel}")
    fig, axes = _figure()
    ax = axes[0, 0]
    with matplotlib.rc_context(params):
        image = ax.imshow(np.angle(values[channel]).T, origin="lower", aspect="auto", cmap="twilight",
                          vmin=-np.pi, vmax=np.pi,
                          extent=(frame_times[0], frame_times[-1], frequencies[0] / 1e3, frequencies[-1] / 1e3))
        _mark_switches(ax, switch_times)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("frequency (kHz)")
        ax.set_title(f"mask phase, microphone {channel + 1}")
        fig.colorbar(image, ax=ax, label="phase (rad)")
    return save_svg(fig, path)


def plot_features(traces: Dict[str, NormalizedTrace], frame_times: np.ndarray,
                  switch_times: Sequence[float], path) -> Path:
    """One heatmap per tap, rows are stacked re/im coordinates"""
    fig, axes = _figure(len(traces), height=2.2 * len(traces))
    with matplotlib.rc_context(params):
        for ax, (tap, trace) in zip(axes[:, 0], traces.items()):
            if trace.num_frames != len(frame_times):
                raise ShapeError(f"{tap}: {trace.num_frames} frames vs {len(frame_times)} frame times")
            image = ax.imshow(trace.vectors.T, origin="lower", aspect="auto", cmap="RdBu_r", vmin=-1, vmax=1,
                              extent=(frame_times[0], frame_times[-1], 0, trace.vectors.shape[1]))
            ax.axhline(trace.num_units, color="k", linewidth=0.5)
            _mark_switches(ax, switch_times)
            ax.set_ylabel(f"h_{'in' if tap == 'input' else 'out'} re | im")
            fig.colorbar(image, ax=ax)
        axes[-1, 0].set_xlabel("time (s)")
    return save_svg(fig, path)


def plot_clusters(timelines: Dict[str, np.ndarray], frame_times: np.ndarray,
                  switch_times: Sequence[float], path, num_sources: int = 2) -> Path:
    """
    Args:
        timelines: tap name -> per-frame label (0 = pause, q = source q)
    """
    cmap = ListedColormap(LABEL_COLORS[:num_sources + 1])
    fig, axes = _figure(len(timelines), height=0.9 * len(timelines) + 0.6)
    with matplotlib.rc_context(params):
        for ax, (tap, labels) in zip(axes[:, 0], timelines.items()):
            strip = np.asarray(labels)[np.newaxis, :]
            ax.imshow(strip, aspect="auto", cmap=cmap, vmin=-0.5, vmax=num_sources + 0.5,
                      extent=(frame_times[0], frame_times[-1], 0, 1))
            _mark_switches(ax, switch_times)
            ax.set_yticks([])
            ax.set_ylabel(tap)
        axes[-1, 0].set_xlabel("time (s)")
        handles = [Patch(color=LABEL_COLORS[0], label="pause")]
        handles += [Patch(color=LABEL_COLORS[q], label=f"position {q}")
                    for q in range(1, num_sources + 1)]
        fig.legend(handles=handles, loc="upper right", ncol=num_sources + 1)
    return save_svg(fig, path)


def plot_target(target: MultichannelWave, switch_times: Sequence[float], path) -> Path:
    if target.num_channels != 1:
        raise ShapeError("target plot expects a mono wave")
    t = np.arange(target.num_samples) / target.sample_rate
    fig, axes = _figure(height=2.0)
    ax = axes[0, 0]
    with matplotlib.rc_context(params):
        ax.plot(t, target.samples[0], color="#08589e")
        _mark_switches(ax, switch_times)
        ax.set_xlim(0, t[-1] if len(t) else 1)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("target")
    return save_svg(fig, path)


def check_artifact(name: str) -> str:
    if name not in ARTIFACTS:
        raise ConfigError(f"unknown plot artifact '{name}' (expected one of {', '.join(ARTIFACTS)})")
    return name
