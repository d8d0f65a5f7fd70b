"""Figure rendering for CLI run directories (headless Agg backend).

Each helper draws one figure from already-computed data and writes it
next to the delimited output it illustrates.  Nothing here recomputes;
the same helpers serve both fresh runs and report re-rendering.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _finish(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_coefficients(coefficients, path, title="coefficients") -> Path:
    """Coefficient magnitudes by basis position, log scale."""
    c = np.asarray(coefficients, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    mag = np.abs(c)
    floor = max(mag.max(), 1e-300) * 1e-18
    ax.semilogy(np.arange(c.size), np.maximum(mag, floor), ".", ms=4)
    ax.set_xlabel("basis position (graded-lex)")
    ax.set_ylabel("|coefficient|")
    ax.set_title(title)
    return _finish(fig, path)


def plot_reconstruction(grid, target, reconstruction, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(grid, target, label="function")
    ax.plot(grid, reconstruction, "--", label="truncated expansion")
    ax.set_xlabel("x")
    ax.legend()
    return _finish(fig, path)


def plot_trajectory(times, states, path, title="trajectory") -> Path:
    """State components against time for one path."""
    states = np.asarray(states)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for i in range(states.shape[1]):
        ax.plot(times, states[:, i], lw=0.8, label=f"x[{i + 1}]")
    ax.set_xlabel("t")
    ax.set_title(title)
    if states.shape[1] <= 6:
        ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_residuals(reports, path) -> Path:
    """Max and mean absolute residual per checked condition, with tolerances."""
    names = [r.condition for r in reports]
    fig, ax = plt.subplots(figsize=(6, 0.6 * len(names) + 2.2))
    y = np.arange(len(names))
    eps = 1e-300
    ax.barh(y - 0.18, [max(r.max_abs, eps) for r in reports], height=0.36,
            label="max |residual|")
    ax.barh(y + 0.18, [max(r.mean_abs, eps) for r in reports], height=0.36,
            label="mean |residual|")
    for yi, r in zip(y, reports):
        ax.plot([r.tolerance, r.tolerance], [yi - 0.35, yi + 0.35], "k--", lw=0.8)
    ax.set_yticks(y)
    ax.set_yticklabels(names, fontsize=8)
    ax.set_xscale("log")
    ax.set_xlabel("residual (dashed: tolerance)")
    ax.invert_yaxis()
    ax.legend(fontsize=8)
    return _finish(fig, path)


def plot_series(times, series, path, ylabel, labels=None, logy=False) -> Path:
    """One or more time series on a shared grid."""
    series = np.atleast_2d(np.asarray(series, dtype=float))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for idx, row in enumerate(series):
        label = labels[idx] if labels else None
        ax.plot(times, row, lw=0.9, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    if labels:
        ax.legend(fontsize=8)
    return _finish(fig, path)
