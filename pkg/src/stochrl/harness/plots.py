"""Matplotlib rendering for the report paths.

Every CLI flow that writes a delimited report also renders a small figure
next to it (Agg backend, PNG).  The CSV stays the canonical output; the
figures are for eyeballing runs without a notebook.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .bench import BenchResult  # noqa: E402
from .metrics import Curve, smooth  # noqa: E402

FIG_SIZE = (7.0, 4.2)
DPI = 130


def _new_axes(xlabel: str, ylabel: str, title: str):
    fig, ax = plt.subplots(figsize=FIG_SIZE)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def save_reward_figure(curves: dict[str, list[Curve]], path, window: int = 100) -> Path:
    """Smoothed instantaneous reward per variant, seeds averaged."""
    fig, ax = _new_axes("step", f"reward (window {window})", "Reward per step")
    for label, items in curves.items():
        smoothed = np.mean([smooth(c.reward, window) for c in items], axis=0)
        ax.plot(np.arange(smoothed.size), smoothed, label=label, linewidth=1.2)
    ax.legend()
    return _save(fig, path)


def save_cumulative_figure(curves: dict[str, list[Curve]], path) -> Path:
    fig, ax = _new_axes("step", "cumulative reward", "Cumulative reward")
    for label, items in curves.items():
        mean = np.mean([c.cumulative_reward for c in items], axis=0)
        ax.plot(np.arange(mean.size), mean, label=label, linewidth=1.2)
    ax.legend()
    return _save(fig, path)


def save_omega_figure(curves: dict[str, list[Curve]], path, window: int = 100) -> Path:
    """Similarity-ratio trace; gaps where the exact max was not positive."""
    fig, ax = _new_axes("step", "similarity ratio", "Stochastic vs exact max ratio")
    for label, items in curves.items():
        for c in items:
            present = ~np.isnan(c.omega)
            if present.any():
                ax.plot(c.step[present], c.omega[present], label=label, linewidth=0.8, alpha=0.8)
                break
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    return _save(fig, path)


def save_loglog_figure(result: BenchResult, path) -> Path:
    fig, ax = _new_axes("actions", "median step time (ns)", "Selection-time scaling")
    for series in sorted({r.series for r in result.rows}):
        rows = result.series_rows(series)
        ns = [r.n for r in rows]
        med = [r.median_ns for r in rows]
        label = series
        if series in result.slopes:
            label = f"{series} (slope {result.slopes[series]:.2f})"
        ax.loglog(ns, med, marker="o", label=label)
    ax.legend()
    return _save(fig, path)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path
