"""Optional static SVG plots for analysis artifacts (requires matplotlib)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .analysis import ParetoPoint


def _pyplot():
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError(
            "plotting requires matplotlib; install the 'plots' extra (axcirc[plots])"
        ) from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def write_pareto_svg(points: Sequence[ParetoPoint], front: Sequence[ParetoPoint],
                     error_axis: str, path: str | Path) -> None:
    """Scatter of all circuits with the non-dominated front drawn as a line."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.scatter([p.relative_power for p in points],
               [getattr(p, error_axis) for p in points],
               s=12, alpha=0.35, label="all circuits")
    front_sorted = sorted(front, key=lambda p: (p.relative_power, getattr(p, error_axis)))
    ax.plot([p.relative_power for p in front_sorted],
            [getattr(p, error_axis) for p in front_sorted],
            "o-", color="tab:red", markersize=4, label="front")
    ax.set_xlabel("relative power")
    ax.set_ylabel(error_axis)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def write_correlation_svg(labels: Sequence[str], matrix: np.ndarray, path: str | Path) -> None:
    """Heatmap of the |Pearson| matrix with per-cell values."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    im = ax.imshow(matrix, vmin=0.0, vmax=1.0, cmap="viridis")
    ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(labels)), labels, fontsize=8)
    for i in range(len(labels)):
        for j in range(len(labels)):
            v = matrix[i, j]
            ax.text(j, i, "-" if np.isnan(v) else f"{v:.2f}",
                    ha="center", va="center", fontsize=7,
                    color="white" if not np.isnan(v) and v < 0.6 else "black")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
