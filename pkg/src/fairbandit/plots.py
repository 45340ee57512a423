"""Report figures, rendered to files next to the delimited output.

Matplotlib runs on the Agg backend and PNGs are written without the
Software metadata chunk so reruns produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def _downsample(x: np.ndarray, y: np.ndarray, max_points: int = 2000):
    if len(x) <= max_points:
        return x, y
    idx = np.linspace(0, len(x) - 1, max_points).astype(np.int64)
    return x[idx], y[idx]


def render_convergence(steps: np.ndarray, accumulated: np.ndarray, out_png: str | Path,
                       title: str = "Accumulated reward") -> None:
    """Accumulated training reward against step count."""
    x, y = _downsample(np.asarray(steps), np.asarray(accumulated))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(x, y, lw=1.5)
    ax.set_xlabel("step")
    ax.set_ylabel("accumulated reward")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, **_SAVE_KW)
    plt.close(fig)


def render_selection_curve(steps: list[int], values: list[float], criterion: str,
                           chosen_step: int, out_png: str | Path) -> None:
    """Validation criterion across checkpoints, with the selected one marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(steps, values, marker="o", ms=2.5, lw=1.0)
    ax.axvline(chosen_step, color="crimson", lw=1.0, ls="--", label=f"selected step {chosen_step}")
    ax.set_xlabel("checkpoint step")
    ax.set_ylabel(f"validation {criterion}")
    ax.set_title(f"Checkpoint selection ({criterion})")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, **_SAVE_KW)
    plt.close(fig)


def render_submodel_bars(rows: list[tuple[str, dict]], out_png: str | Path) -> None:
    """Grouped bars of accuracy / discrimination / consistency per prediction mode."""
    modes = [name for name, _ in rows]
    met_names = ("accuracy", "discrimination", "consistency")
    width = 0.25
    xs = np.arange(len(modes))
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for i, met in enumerate(met_names):
        vals = [row[met] for _, row in rows]
        ax.bar(xs + (i - 1) * width, vals, width, label=met)
    ax.set_xticks(xs, modes)
    ax.set_ylim(0, 1.05)
    ax.set_title("Sub-model comparison (test split)")
    ax.legend(fontsize=8)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, **_SAVE_KW)
    plt.close(fig)
