"""Report figures. Agg backend, fixed rc settings and stripped PNG metadata so
the same data always renders to the same bytes."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (np.sqrt(5) - 1.0) / 2.0
WIDTH = 3.4  # inches, one journal column

RC = {
    "figure.figsize": (WIDTH, WIDTH * GOLDEN),
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.family": "DejaVu Sans",
    "font.size": 8,
    "axes.labelsize": 8,
    "axes.titlesize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.prop_cycle": matplotlib.cycler(color=["#2b8cbe", "#e34a33", "#31a354", "#756bb1", "#636363"]),
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
    "legend.fontsize": 7,
    "legend.frameon": False,
    "lines.linewidth": 1.0,
    "lines.markersize": 3,
    "svg.hashsalt": "screenkit",
    "figure.constrained_layout.use": True,
}


def _png(fig, description: str) -> bytes:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None, "Description": description})
    plt.close(fig)
    return buf.getvalue()


def loss_curve(trace, description: str, ylabel: str = "loss") -> bytes:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.plot(np.arange(1, len(trace) + 1), trace)
        ax.set_xlabel("epoch")
        ax.set_ylabel(ylabel)
        if len(trace) and min(trace) > 0:
            ax.set_yscale("log")
        return _png(fig, description)


def ranking_bars(ids, values, description: str, xlabel: str = "distance") -> bytes:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        pos = np.arange(len(ids))
        ax.barh(pos, values)
        ax.set_yticks(pos, labels=ids)
        ax.invert_yaxis()
        ax.set_xlabel(xlabel)
        return _png(fig, description)


def score_histogram(scores, description: str, xlabel: str = "score") -> bytes:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.hist(scores, bins=min(30, max(5, len(scores) // 5)), color="#2b8cbe")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("count")
        return _png(fig, description)


def heatmap(matrix, description: str, label: str = "similarity") -> bytes:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        im = ax.imshow(np.asarray(matrix), cmap="viridis", vmin=0.0, vmax=1.0, aspect="auto")
        fig.colorbar(im, ax=ax, label=label)
        ax.set_xlabel("column molecule")
        ax.set_ylabel("row molecule")
        return _png(fig, description)


def projection_plot(values, projection, description: str) -> bytes:
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.plot(values, projection, marker="o")
        ax.set_xlabel("grid value")
        ax.set_ylabel("projection on relation")
        return _png(fig, description)
