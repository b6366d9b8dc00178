"""Static plot rendering from run-output CSV files.

Purely derived views, no new computation: the circle diagram (one dot per
process on the unit circle, colour-coded by instantaneous frequency, blue
fast / yellow slow), the timeline of per-edge phase differences, the
timeline of per-edge potential values, and the lagger-normalised phase
timeline.  Output is vector graphics (SVG by default).
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import ConfigError  # noqa: E402


def _read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return header, np.asarray(rows)


def _plot_timeline(times, series, labels, title, ylabel, out: Path,
                   max_labels: int = 12):
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for k in range(series.shape[1]):
        label = labels[k] if series.shape[1] <= max_labels else None
        ax.plot(times, series[:, k], lw=0.8, label=label)
    ax.set_xlabel("time [s]")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if series.shape[1] <= max_labels:
        ax.legend(fontsize="small", ncol=2)
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)


def emit_plots(out_dir, fmt: str = "svg") -> list[Path]:
    """Render all views for which CSV inputs exist in ``out_dir``.

    The trajectory CSV is mandatory; phase-difference, potential, and
    circle-snapshot plots are produced when their files are present.
    Returns the list of written plot files.
    """
    out = Path(out_dir)
    traj_csv = out / "trajectory.csv"
    if not traj_csv.exists():
        raise ConfigError(f"missing input {traj_csv}; run the scenario first")
    written: list[Path] = []

    header, data = _read_csv(traj_csv)
    times, phases = data[:, 0], data[:, 1:]
    normalized = phases - phases.min(axis=1, keepdims=True)
    p = out / f"phases_normalized.{fmt}"
    _plot_timeline(times, normalized, header[1:],
                   "phases relative to the lagger", "theta - min theta [rad]", p)
    written.append(p)

    diffs_csv = out / "phase_diffs.csv"
    if diffs_csv.exists():
        header, data = _read_csv(diffs_csv)
        p = out / f"phase_differences.{fmt}"
        _plot_timeline(data[:, 0], data[:, 1:], header[1:],
                       "pairwise phase differences", "theta_j - theta_i [rad]", p)
        written.append(p)

    pots_csv = out / "potentials.csv"
    if pots_csv.exists():
        header, data = _read_csv(pots_csv)
        p = out / f"potentials.{fmt}"
        _plot_timeline(data[:, 0], data[:, 1:], header[1:],
                       "interaction potential per edge", "V [1]", p)
        written.append(p)

    for snap in sorted(out.glob("circle_*.csv")):
        header, data = _read_csv(snap)
        angle, freq = data[:, 2], data[:, 3]
        fig, ax = plt.subplots(figsize=(4.5, 4.5), subplot_kw={"polar": True})
        # colour scale: fast = blue, slow = yellow (cividis reversed)
        sc = ax.scatter(angle, np.ones_like(angle), c=freq, cmap="cividis_r",
                        s=60, edgecolors="k", linewidths=0.4, zorder=3)
        ax.set_yticks([])
        ax.set_ylim(0, 1.15)
        t_snap = data[0, 1]
        ax.set_title(f"phase circle at t={t_snap:g}s")
        fig.colorbar(sc, ax=ax, shrink=0.7, label="dtheta/dt [rad/s]")
        fig.tight_layout()
        p = out / f"{snap.stem}.{fmt}"
        fig.savefig(p)
        plt.close(fig)
        written.append(p)
    return written
