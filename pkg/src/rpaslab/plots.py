"""Figure rendering for sweep products.

Renders matplotlib figures to image files next to the delimited outputs:
success/completion-time surfaces from an aggregated surface CSV,
success-vs-communicability curves, the latency-blockage report, and
single-run trajectories.  Rendering is presentation only; every figure
is derived from a CSV that remains the canonical artifact.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import ConfigError


def _read_csv_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ConfigError(f"{path}: empty CSV")
    header, data = rows[0], [r for r in rows[1:] if not r[0].startswith("#")]
    return header, data


def plot_surface(surface_csv: str | Path, out_dir: str | Path) -> list[Path]:
    """Heatmap + contour figures for success rate and completion time."""
    surface_csv = Path(surface_csv)
    header, data = _read_csv_rows(surface_csv)
    expected = "pa_bin_lo,pa_bin_hi,eps_bin_lo,eps_bin_hi,count,success_rate,mean_completion_time_s"
    if ",".join(header) != expected:
        raise ConfigError(f"{surface_csv}: not a surface CSV")

    pa_los = sorted({float(r[0]) for r in data})
    eps_los = sorted({float(r[2]) for r in data})
    pa_idx = {v: i for i, v in enumerate(pa_los)}
    eps_idx = {v: i for i, v in enumerate(eps_los)}
    rate = np.full((len(pa_los), len(eps_los)), np.nan)
    mtime = np.full((len(pa_los), len(eps_los)), np.nan)
    for r in data:
        i, j = pa_idx[float(r[0])], eps_idx[float(r[2])]
        rate[i, j] = float(r[5])
        if r[6]:
            mtime[i, j] = float(r[6])

    pa_edges = pa_los + [max(float(r[1]) for r in data)]
    eps_edges = eps_los + [max(float(r[3]) for r in data)]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for grid, label, fname, cmap in (
        (rate, "mission success rate", f"{surface_csv.stem}_success.png", "viridis"),
        (mtime, "mean completion time (s)", f"{surface_csv.stem}_time.png", "plasma"),
    ):
        fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
        mesh = axes[0].pcolormesh(eps_edges, pa_edges, grid, cmap=cmap, shading="flat")
        fig.colorbar(mesh, ax=axes[0], label=label)
        axes[0].set_xlabel("one-way latency (s)")
        axes[0].set_ylabel("availability")
        axes[0].set_title(label)

        finite = np.isfinite(grid)
        if finite.sum() >= 4:
            eps_c = 0.5 * (np.array(eps_edges[:-1]) + np.array(eps_edges[1:]))
            pa_c = 0.5 * (np.array(pa_edges[:-1]) + np.array(pa_edges[1:]))
            cs = axes[1].contour(eps_c, pa_c, grid, levels=8, cmap=cmap)
            axes[1].clabel(cs, inline=True, fontsize=7, fmt="%.2f")
        axes[1].set_xlabel("one-way latency (s)")
        axes[1].set_ylabel("availability")
        axes[1].set_title(f"{label}: contours")
        fig.tight_layout()
        path = out_dir / fname
        fig.savefig(path, dpi=140)
        plt.close(fig)
        written.append(path)
    return written


def plot_curves(curves_csv: str | Path, out_dir: str | Path) -> list[Path]:
    """Success rate versus communicability, one line per latency interval."""
    curves_csv = Path(curves_csv)
    header, data = _read_csv_rows(curves_csv)
    if ",".join(header) != "eps_interval_lo,eps_interval_hi,p_comm_bin,success_rate,count":
        raise ConfigError(f"{curves_csv}: not a curves CSV")
    series: dict[tuple[float, float], list[tuple[float, float]]] = {}
    for r in data:
        series.setdefault((float(r[0]), float(r[1])), []).append((float(r[2]), float(r[3])))

    fig, ax = plt.subplots(figsize=(7.5, 4.5))
    for (lo, hi), pts in sorted(series.items()):
        pts.sort()
        ax.plot(
            [p[0] for p in pts],
            [p[1] for p in pts],
            marker="o",
            markersize=3,
            label=f"latency ({lo:.3g}, {hi:.3g}] s",
        )
    ax.set_xlabel("communicability")
    ax.set_ylabel("mission success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{curves_csv.stem}.png"
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return [path]


def plot_blockage(blockage_csv: str | Path, out_dir: str | Path) -> list[Path]:
    """Success and completion time against latency, flagged bands shaded."""
    blockage_csv = Path(blockage_csv)
    eps, succ, times, bands = [], [], [], []
    with open(blockage_csv, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or ",".join(rows[0]) != "epsilon,success,completion_time_s":
        raise ConfigError(f"{blockage_csv}: not a blockage CSV")
    for r in rows[1:]:
        if not r:
            continue
        if r[0].startswith("#"):
            if r[0].strip() == "# band" and len(r) >= 3:
                bands.append((float(r[1]), float(r[2])))
            continue
        eps.append(float(r[0]))
        succ.append(r[1] == "true")
        times.append(float(r[2]) if len(r) > 2 and r[2] else math.nan)

    fig, axes = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    axes[0].step(eps, [1 if s else 0 for s in succ], where="mid")
    axes[0].set_ylabel("success")
    axes[0].set_yticks([0, 1])
    axes[1].plot(eps, times, marker=".", linestyle="none")
    axes[1].set_ylabel("completion time (s)")
    axes[1].set_xlabel("one-way latency (s)")
    for lo, hi in bands:
        for ax in axes:
            ax.axvspan(lo, hi, color="tab:red", alpha=0.25)
    axes[0].set_title(f"latency sweep, {len(bands)} non-monotonic band(s) flagged")
    fig.tight_layout()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{blockage_csv.stem}.png"
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return [path]


def plot_trajectory(traj_csv: str | Path, out_dir: str | Path) -> list[Path]:
    """Ground track plus altitude/airspeed/link traces for one run."""
    traj_csv = Path(traj_csv)
    header, data = _read_csv_rows(traj_csv)
    cols = {name: k for k, name in enumerate(header)}
    for needed in ("time_s", "x_e", "y_e", "h", "Vt", "link_state"):
        if needed not in cols:
            raise ConfigError(f"{traj_csv}: not a trajectory CSV (missing {needed})")
    arr = np.array([[float(v) for v in row] for row in data])

    t = arr[:, cols["time_s"]]
    fig = plt.figure(figsize=(10, 7))
    ax1 = fig.add_subplot(2, 2, 1)
    ax1.plot(arr[:, cols["y_e"]], arr[:, cols["x_e"]], lw=0.8)
    ax1.set_xlabel("east (ft)")
    ax1.set_ylabel("north (ft)")
    ax1.set_title("ground track")
    ax1.axis("equal")

    ax2 = fig.add_subplot(2, 2, 2)
    ax2.plot(t, arr[:, cols["h"]], lw=0.8)
    ax2.set_ylabel("altitude (ft)")
    ax2.set_xlabel("time (s)")

    ax3 = fig.add_subplot(2, 2, 3)
    ax3.plot(t, arr[:, cols["Vt"]], lw=0.8)
    ax3.set_ylabel("airspeed (ft/s)")
    ax3.set_xlabel("time (s)")

    ax4 = fig.add_subplot(2, 2, 4)
    ax4.step(t, arr[:, cols["link_state"]], where="post", lw=0.6)
    ax4.set_ylabel("link state")
    ax4.set_xlabel("time (s)")
    ax4.set_yticks([0, 1])

    fig.tight_layout()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{traj_csv.stem}.png"
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return [path]
