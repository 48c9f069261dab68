"""Figure rendering for CLI reports. File output only, Agg backend."""

from __future__ import annotations

from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def bench_figure(report: dict, path: Union[str, Path]) -> None:
    """Bar chart of decode throughput with the speculator off vs on."""
    fig, ax = plt.subplots(figsize=(5, 4))
    labels = ["speculator off", "speculator on"]
    values = [report["tokens_per_second_off"], report["tokens_per_second_on"]]
    bars = ax.bar(labels, values, color=["#888888", "#2b7bba"])
    for bar, value in zip(bars, values):
        ax.annotate(
            f"{value:.1f}",
            (bar.get_x() + bar.get_width() / 2, value),
            ha="center",
            va="bottom",
        )
    ax.set_ylabel("tokens / s")
    ax.set_title(f"decode throughput (x{report['ratio']:.2f})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def stats_figure(stats: dict, path: Union[str, Path]) -> None:
    """Horizontal bars for the mesh-quality numbers."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    items = [
        ("faces", stats["faces"]),
        ("components", stats["components"]),
        ("non-manifold edge %", 100.0 * stats["nonmanifold_edge_fraction"]),
        ("self-intersections", stats["self_intersections"]),
    ]
    names = [name for name, _ in items]
    values = [value for _, value in items]
    bars = ax.barh(names, values, color="#2b7bba")
    for bar, value in zip(bars, values):
        ax.annotate(
            f"{value:.2f}" if isinstance(value, float) else str(value),
            (bar.get_width(), bar.get_y() + bar.get_height() / 2),
            ha="left",
            va="center",
        )
    ax.invert_yaxis()
    ax.set_xlabel("value")
    ax.set_title("mesh statistics")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
