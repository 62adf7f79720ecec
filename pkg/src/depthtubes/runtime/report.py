"""Benchmark reporting: delimited tables and matplotlib figures."""

from __future__ import annotations

import os
from typing import IO, Sequence

from .bench import BenchRecord

TABLE_COLUMNS = ("workers", "time_ms", "sort_ms", "speedup", "efficiency", "mapping_mode")


def write_bench_table(records: Sequence[BenchRecord], fh: IO[str]) -> None:
    """Tab-separated benchmark table; resolution and frame count up front."""
    if not records:
        raise ValueError("no benchmark records to report")
    first = records[0]
    fh.write(f"# resolution {first.width}x{first.height}, {first.frames} frames per sample\n")
    fh.write("\t".join(TABLE_COLUMNS) + "\n")
    for r in records:
        fh.write(f"{r.workers}\t{r.frame_ms:.1f}\t{r.sort_ms:.1f}"
                 f"\t{r.speedup:.2f}\t{r.efficiency:.2f}\t{r.mapping_mode}\n")


def render_bench_figures(records: Sequence[BenchRecord], out_dir) -> list[str]:
    """Render frame-time, speedup, and efficiency curves to PNG files."""
    if not records:
        raise ValueError("no benchmark records to plot")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(out_dir, exist_ok=True)
    by_workers = sorted(records, key=lambda r: r.workers)
    workers = [r.workers for r in by_workers]
    written = []

    def save(fig, name: str) -> None:
        path = os.path.join(out_dir, name)
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(workers, [r.frame_ms for r in by_workers], "o-", label="frame")
    ax.plot(workers, [r.sort_ms for r in by_workers], "s--", label="sorting")
    ax.set_xlabel("workers")
    ax.set_ylabel("time (ms)")
    ax.set_title(f"Frame time, {by_workers[0].width}x{by_workers[0].height}")
    ax.set_xticks(workers)
    ax.grid(True, alpha=0.3)
    ax.legend()
    save(fig, "time_vs_workers.png")

    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(workers, [r.speedup for r in by_workers], "o-", label="measured")
    ax.plot(workers, workers, ":", color="gray", label="ideal")
    ax.set_xlabel("workers")
    ax.set_ylabel("speedup vs P=1")
    ax.set_title("Speedup")
    ax.set_xticks(workers)
    ax.grid(True, alpha=0.3)
    ax.legend()
    save(fig, "speedup_vs_workers.png")

    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(workers, [r.efficiency for r in by_workers], "o-")
    ax.axhline(1.0, linestyle=":", color="gray")
    ax.set_xlabel("workers")
    ax.set_ylabel("parallel efficiency")
    ax.set_title("Efficiency")
    ax.set_xticks(workers)
    ax.set_ylim(bottom=0)
    ax.grid(True, alpha=0.3)
    save(fig, "efficiency_vs_workers.png")

    return written
