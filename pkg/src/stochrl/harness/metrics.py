"""Curve-file IO, smoothing and cross-seed aggregation.

A curve file is UTF-8 CSV with LF line endings and one row per step::

    step,episode,reward,cumulative_reward,epsilon,beta,omega,wall_time_ns,candidates

Floats are written with ``repr`` (shortest round-trip form) so a run's
bytes are fully reproducible; the omega cell is empty whenever the exact
max was not positive.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..analysis import MetricsRecord

CURVE_COLUMNS = (
    "step",
    "episode",
    "reward",
    "cumulative_reward",
    "epsilon",
    "beta",
    "omega",
    "wall_time_ns",
    "candidates",
)


def _fmt(value: float) -> str:
    return repr(float(value))


def format_record(r: MetricsRecord) -> str:
    omega = "" if r.omega is None else _fmt(r.omega)
    return (
        f"{r.step},{r.episode},{_fmt(r.reward)},{_fmt(r.cumulative_reward)},"
        f"{_fmt(r.epsilon)},{_fmt(r.beta)},{omega},{r.wall_time_ns},{r.candidates}"
    )


def write_curve(path, records: list[MetricsRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CURVE_COLUMNS) + "\n")
        for r in records:
            fh.write(format_record(r) + "\n")


@dataclass
class Curve:
    """Columns of one curve file as arrays; omega is NaN where absent."""

    step: np.ndarray
    episode: np.ndarray
    reward: np.ndarray
    cumulative_reward: np.ndarray
    epsilon: np.ndarray
    beta: np.ndarray
    omega: np.ndarray
    wall_time_ns: np.ndarray
    candidates: np.ndarray

    def __len__(self) -> int:
        return self.step.size


def read_curve(path) -> Curve:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CURVE_COLUMNS:
            raise ValueError(f"{path} is not a curve file (bad header {header})")
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path} contains no records")
    cols = list(zip(*rows))
    step = np.array([int(v) for v in cols[0]])
    if (np.diff(step) < 0).any():
        raise ValueError(f"{path} has a non-monotone step column")
    return Curve(
        step=step,
        episode=np.array([int(v) for v in cols[1]]),
        reward=np.array([float(v) for v in cols[2]]),
        cumulative_reward=np.array([float(v) for v in cols[3]]),
        epsilon=np.array([float(v) for v in cols[4]]),
        beta=np.array([float(v) for v in cols[5]]),
        omega=np.array([float(v) if v else math.nan for v in cols[6]]),
        wall_time_ns=np.array([int(v) for v in cols[7]]),
        candidates=np.array([int(v) for v in cols[8]]),
    )


def smooth(series: np.ndarray, window: int) -> np.ndarray:
    """Trailing-window mean; early entries average whatever exists so far."""
    if window < 1:
        raise ValueError(f"window must be positive, got {window}")
    series = np.asarray(series, dtype=np.float64)
    csum = np.concatenate([[0.0], np.cumsum(series)])
    idx = np.arange(series.size) + 1
    lo = np.maximum(idx - window, 0)
    return (csum[idx] - csum[lo]) / (idx - lo)


@dataclass
class VariantSummary:
    label: str
    n_curves: int
    final_cumulative_mean: float
    final_cumulative_std: float
    tail_reward_mean: float
    tail_reward_std: float
    step_time_ns_mean: float
    step_time_ns_std: float


def summarize(groups: dict[str, list], window: int = 1000) -> list[VariantSummary]:
    """Aggregate curves per variant label.

    ``groups`` maps a label to curve file paths (or loaded Curves).  The
    tail reward is the last value of the window-smoothed instantaneous
    reward; step time averages the wall-time column (zero when the run had
    timing disabled).
    """
    if not groups or not any(groups.values()):
        raise ValueError("summarize needs at least one curve file")
    out = []
    for label, items in groups.items():
        curves = [c if isinstance(c, Curve) else read_curve(c) for c in items]
        if not curves:
            continue
        finals = np.array([c.cumulative_reward[-1] for c in curves])
        tails = np.array([smooth(c.reward, window)[-1] for c in curves])
        times = np.array([c.wall_time_ns.mean() for c in curves])
        out.append(
            VariantSummary(
                label=label,
                n_curves=len(curves),
                final_cumulative_mean=float(finals.mean()),
                final_cumulative_std=float(finals.std()),
                tail_reward_mean=float(tails.mean()),
                tail_reward_std=float(tails.std()),
                step_time_ns_mean=float(times.mean()),
                step_time_ns_std=float(times.std()),
            )
        )
    return out


def write_summary_csv(path, summaries: list[VariantSummary]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "label,n_curves,final_cumulative_mean,final_cumulative_std,"
            "tail_reward_mean,tail_reward_std,step_time_ns_mean,step_time_ns_std\n"
        )
        for s in summaries:
            fh.write(
                f"{s.label},{s.n_curves},{_fmt(s.final_cumulative_mean)},"
                f"{_fmt(s.final_cumulative_std)},{_fmt(s.tail_reward_mean)},"
                f"{_fmt(s.tail_reward_std)},{_fmt(s.step_time_ns_mean)},"
                f"{_fmt(s.step_time_ns_std)}\n"
            )
