"""Matplotlib figures for region scans and simulation traces (Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_region", "plot_trace"]


def plot_region(rows, path):
    """Heatmap of the certified indicator over (tau, lambda).

    The file format follows the extension of `path` (``.png``, ``.svg``, ...).
    """
    taus = np.unique([r["tau"] for r in rows])
    lams = np.unique([r["lambda"] for r in rows])
    grid = np.full((len(lams), len(taus)), np.nan)
    ti = {t: i for i, t in enumerate(taus)}
    li = {l: i for i, l in enumerate(lams)}
    for r in rows:
        grid[li[r["lambda"]], ti[r["tau"]]] = r["certified"]

    def edges(v):
        if len(v) == 1:
            return np.array([v[0] - 0.5, v[0] + 0.5])
        mid = 0.5 * (v[1:] + v[:-1])
        return np.concatenate(([2 * v[0] - mid[0]], mid, [2 * v[-1] - mid[-1]]))

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    cmap = matplotlib.colors.ListedColormap(["#f2f2f2", "#3b6ea8"])
    ax.pcolormesh(edges(taus), edges(lams), grid, cmap=cmap, vmin=0, vmax=1, shading="flat")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel(r"$\lambda$")
    ax.set_title("certified region (dark)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_trace(trace, path):
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for i in range(trace.states.shape[1]):
        ax.plot(trace.times, trace.states[:, i], lw=1.0, label=f"$x_{i + 1}$")
    ax.set_xlabel("t")
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
