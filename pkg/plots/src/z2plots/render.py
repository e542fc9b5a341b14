"""Figure builders: entropy-vs-time overlays and saturation scatters.

Rendering is deterministic: fixed style, fixed canvas, Agg backend, no
timestamps, so identical inputs reproduce identical image bytes.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .schema import read_fit, read_summary, read_timeseries

FIGSIZE = (7.0, 4.5)
DPI = 150

# mirror of the producing package's documented fit-model menu
FIT_MODELS = {
    "exp_offset": lambda v, a, b, c, d: a + b * np.exp(-c * v) + d * v,
    "power_exp": lambda v, a, b, c, d: a * np.power(np.maximum(v, 1e-12), b) * np.exp(-c * v) + d,
    "rational": lambda v, a, b, c, d: (a + b * v) / (1.0 + c * v) + d * v,
}


def _style(ax, xlabel, ylabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)


def _save(fig, out_path):
    fig.savefig(out_path, dpi=DPI)
    plt.close(fig)


def plot_timeseries(csv_paths, out_path, labels=None) -> dict:
    """One entropy-vs-time curve per input file.

    ``labels`` (one per file) defaults to the file stems.  Returns a small
    summary of what was drawn, mostly for the tests.
    """
    paths = list(csv_paths)
    if not paths:
        raise ValueError("at least one time-series CSV is required")
    series = [read_timeseries(p) for p in paths]
    if labels is None:
        labels = [os.path.splitext(os.path.basename(p))[0] for p in paths]
    if len(labels) != len(paths):
        raise ValueError(f"{len(labels)} labels for {len(paths)} files")

    fig, ax = plt.subplots(figsize=FIGSIZE)
    for data, label in zip(series, labels):
        ax.plot(data.t, data.entropy, lw=1.2, label=label)
    _style(ax, "time  [1/coupling]", "entanglement entropy  [nats]")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, out_path)
    return {"curves": len(series), "out": str(out_path)}


def plot_saturation(summary_path, out_path, fit_path=None) -> dict:
    """Saturated-entropy scatter with error bars; optional fitted curve.

    Unsaturated points are drawn hollow.  The fit overlay evaluates the
    model named in the JSON payload over a dense grid.
    """
    summary = read_summary(summary_path)
    fig, ax = plt.subplots(figsize=FIGSIZE)

    filled = summary.saturated
    ax.errorbar(
        summary.values[filled],
        summary.means[filled],
        yerr=summary.stds[filled],
        fmt="o",
        color="C0",
        capsize=3,
        label="saturated",
    )
    n_hollow = int((~filled).sum())
    if n_hollow:
        ax.errorbar(
            summary.values[~filled],
            summary.means[~filled],
            yerr=summary.stds[~filled],
            fmt="o",
            markerfacecolor="none",
            color="C0",
            capsize=3,
            label="not saturated",
        )

    overlay = False
    if fit_path is not None:
        payload = read_fit(fit_path)
        model = payload["model"]
        if model not in FIT_MODELS:
            raise ValueError(f"unknown fit model {model!r}; expected one of {sorted(FIT_MODELS)}")
        grid = np.linspace(summary.values.min(), summary.values.max(), 256)
        ax.plot(grid, FIT_MODELS[model](grid, *payload["params"]), "--", color="C1",
                lw=1.0, label=f"{model} fit")
        overlay = True

    _style(ax, "swept value", "saturated entropy  [nats]")
    ax.legend(frameon=False)
    fig.tight_layout()
    _save(fig, out_path)
    return {
        "points": len(summary.values),
        "hollow": n_hollow,
        "fit_overlay": overlay,
        "out": str(out_path),
    }
