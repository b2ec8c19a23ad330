"""Render the standard trajectory figures from an estrack CSV.

The input schema is the experiment runner's trajectory file: columns
t, theta_1..theta_n, y, theta_star_1..theta_star_n, y_star, err_norm,
inst_freq_1..inst_freq_n, in any column order.  Three figures are
produced: input tracking (theta against theta_star), output convergence
(y against y_star) and the instantaneous dither frequencies.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

ALL_FIGURES = ("tracking", "output", "frequencies")


class SchemaError(Exception):
    """The CSV does not match the trajectory schema."""


class EmptyPlotError(Exception):
    """The CSV contains no data rows."""


@dataclass(frozen=True)
class PlotJob:
    csv_path: Path
    out_dir: Path
    which: tuple[str, ...] = ALL_FIGURES
    style: str = "linear"  # "log-y" adds a log-scale tracking-error overlay

    def __post_init__(self):
        object.__setattr__(self, "csv_path", Path(self.csv_path))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        object.__setattr__(self, "which", tuple(self.which))
        for name in self.which:
            if name not in ALL_FIGURES:
                raise ValueError(f"unknown figure {name!r}; "
                                 f"choose from {ALL_FIGURES}")
        if not self.which:
            raise ValueError("no figures selected")
        if self.style not in ("linear", "log-y"):
            raise ValueError("style must be 'linear' or 'log-y'")


@dataclass
class TrajectoryTable:
    t: np.ndarray
    theta: np.ndarray
    theta_star: np.ndarray
    y: np.ndarray
    y_star: np.ndarray
    err_norm: np.ndarray
    inst_freq: np.ndarray


def _indexed_columns(names: list[str], prefix: str) -> list[str]:
    # only names whose suffix is a bare index, so theta_ skips theta_star_*
    found = sorted((n for n in names
                    if n.startswith(prefix) and n[len(prefix):].isdigit()),
                   key=lambda n: int(n[len(prefix):]))
    for i, n in enumerate(found, start=1):
        if n != f"{prefix}{i}":
            raise SchemaError(f"missing column {prefix}{i}")
    return found


def load_trajectory(csv_path: Path) -> TrajectoryTable:
    """Read and validate a trajectory CSV; column order is irrelevant."""
    csv_path = Path(csv_path)
    with csv_path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("file has no header row") from None
        rows = [row for row in reader if row]

    names = [h.strip() for h in header]
    for required in ("t", "y", "y_star", "err_norm"):
        if required not in names:
            raise SchemaError(f"missing column {required}")
    theta_cols = _indexed_columns(names, "theta_")
    star_cols = _indexed_columns(names, "theta_star_")
    freq_cols = _indexed_columns(names, "inst_freq_")
    if not theta_cols:
        raise SchemaError("missing column theta_1")
    if len(star_cols) != len(theta_cols):
        raise SchemaError(f"missing column theta_star_{len(theta_cols)}")
    if len(freq_cols) != len(theta_cols):
        raise SchemaError(f"missing column inst_freq_{len(theta_cols)}")

    if not rows:
        raise EmptyPlotError(f"{csv_path} has a header but no data rows")

    data = np.array([[float(v) for v in row] for row in rows])
    if data.shape[1] != len(names):
        raise SchemaError("row width does not match the header")
    col = {name: data[:, i] for i, name in enumerate(names)}
    stack = lambda cols: np.column_stack([col[c] for c in cols])
    return TrajectoryTable(
        t=col["t"],
        theta=stack(theta_cols),
        theta_star=stack(star_cols),
        y=col["y"],
        y_star=col["y_star"],
        err_norm=col["err_norm"],
        inst_freq=stack(freq_cols),
    )


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def _plot_tracking(table: TrajectoryTable, out_dir: Path, style: str) -> Path:
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    n = table.theta.shape[1]
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i in range(n):
        c = colors[i % len(colors)]
        ax.plot(table.t, table.theta[:, i], color=c, lw=1.0,
                label=rf"$\theta_{{{i+1}}}$")
        ax.plot(table.t, table.theta_star[:, i], color=c, lw=1.4, ls="--",
                label=rf"$\theta^*_{{{i+1}}}$")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("input")
    ax.legend(ncol=n, fontsize=9)
    ax.set_title("input tracking")
    if style == "log-y":
        twin = ax.twinx()
        twin.semilogy(table.t, np.maximum(table.err_norm, 1e-300), color="k",
                      lw=0.8, alpha=0.6)
        twin.set_ylabel(r"$|\theta-\theta^*|$ (log)")
    fig.tight_layout()
    return _save(fig, out_dir / "tracking.png")


def _plot_output(table: TrajectoryTable, out_dir: Path, style: str) -> Path:
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(table.t, table.y, lw=1.0, label="y")
    ax.plot(table.t, table.y_star, lw=1.4, ls="--", label=r"$y^*$")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("output")
    ax.legend(fontsize=9)
    ax.set_title("output convergence")
    if style == "log-y":
        twin = ax.twinx()
        twin.semilogy(table.t, np.maximum(np.abs(table.y - table.y_star),
                                          1e-300),
                      color="k", lw=0.8, alpha=0.6)
        twin.set_ylabel(r"$|y-y^*|$ (log)")
    fig.tight_layout()
    return _save(fig, out_dir / "output.png")


def _plot_frequencies(table: TrajectoryTable, out_dir: Path) -> Path:
    # log scale by default: growing schedules span decades over a long run
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for i in range(table.inst_freq.shape[1]):
        ax.semilogy(table.t, table.inst_freq[:, i], lw=1.2,
                    label=rf"$\omega_{{{i+1}}}\,d\eta/dt$")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("instantaneous frequency [rad/s]")
    ax.legend(fontsize=9)
    ax.set_title("instantaneous frequencies")
    fig.tight_layout()
    return _save(fig, out_dir / "frequencies.png")


def render(job: PlotJob) -> list[Path]:
    """Render the requested figures; returns the written paths."""
    table = load_trajectory(job.csv_path)
    job.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "tracking" in job.which:
        written.append(_plot_tracking(table, job.out_dir, job.style))
    if "output" in job.which:
        written.append(_plot_output(table, job.out_dir, job.style))
    if "frequencies" in job.which:
        written.append(_plot_frequencies(table, job.out_dir))
    return written
