"""SVG training-curve charts: loss/accuracy versus epochs and elapsed time.

One series per optimizer; series may have different lengths (each record's
x axis is sized to its own step count).
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import EPOCH_STEPS, RunRecord  # noqa: E402

CHART_FILES = (
    "loss_vs_epoch.svg",
    "loss_vs_time.svg",
    "accuracy_vs_epoch.svg",
    "accuracy_vs_time.svg",
)


def _epoch_series(record: RunRecord, col: int):
    """Per-epoch values: mean for loss, last observation for accuracy."""
    rows = record.rows
    n = len(rows)
    edges = list(range(0, n, EPOCH_STEPS)) + [n]
    epochs, values, seconds = [], [], []
    for e, (lo, hi) in enumerate(zip(edges[:-1], edges[1:]), start=1):
        chunk = rows[lo:hi, col]
        if col == 5:  # accuracy: carried-forward, take the last value
            val = chunk[-1]
        else:
            val = float(np.mean(chunk))
        epochs.append(e)
        values.append(val)
        seconds.append(rows[hi - 1, 8] / 1e9)
    return np.array(epochs), np.array(values), np.array(seconds)


def emit_plots(records: list[RunRecord], out_dir: str) -> list[str]:
    """Write the four comparison charts; returns the file paths."""
    if not records:
        raise ValueError("at least one run record is required")
    os.makedirs(out_dir, exist_ok=True)

    specs = [
        ("loss_vs_epoch.svg", 2, "epoch", "loss", False),
        ("loss_vs_time.svg", 2, "elapsed time [s]", "loss", True),
        ("accuracy_vs_epoch.svg", 5, "epoch", "accuracy", False),
        ("accuracy_vs_time.svg", 5, "elapsed time [s]", "accuracy", True),
    ]
    paths = []
    for fname, col, xlabel, ylabel, use_time in specs:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for rec in records:
            epochs, values, seconds = _epoch_series(rec, col)
            x = seconds if use_time else epochs
            label = rec.summary.get("optimizer", "run")
            ax.plot(x, values, label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, alpha=0.3)
        path = os.path.join(out_dir, fname)
        tmp = path + ".tmp"
        fig.savefig(tmp, format="svg")
        os.replace(tmp, path)
        plt.close(fig)
        paths.append(path)
    return paths
