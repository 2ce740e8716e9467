"""Post-hoc analysis of run matrices: fronts, correlations, significance.

Operates on the flat per-run records the runner writes out, so results can
be pooled across experiments before analysis.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

RESULTS_SCHEMA = "axcirc-results-v1"

RESULTS_COLUMNS = (
    "config", "seed", "evaluations", "relative_power",
    "wce_pct", "mae_pct", "er_pct", "mre_pct", "avg_pct",
    "acc0", "stddev", "gauss_ok",
)

#: Numeric error metrics used for fronts and the correlation matrix.
METRIC_COLUMNS = ("wce_pct", "mae_pct", "er_pct", "mre_pct", "avg_pct", "stddev")


@dataclass(frozen=True)
class ParetoPoint:
    """One circuit in trade-off space: its cost and all relative error metrics."""

    circuit_id: str
    relative_power: float
    wce_pct: float
    mae_pct: float
    er_pct: float
    mre_pct: float
    avg_pct: float
    stddev: float
    config: str = ""


def pareto_front(points: Sequence[ParetoPoint], error_axis: str) -> list[ParetoPoint]:
    """Points not dominated in (relative_power, error_axis), both minimized.

    A point dominates another when it is <= on both axes and < on at least
    one; exact duplicates are all kept. Input order is preserved.
    """
    if error_axis not in METRIC_COLUMNS:
        raise ValueError(f"error_axis must be one of {METRIC_COLUMNS}, got {error_axis!r}")
    n = len(points)
    powers = [p.relative_power for p in points]
    errors = [getattr(p, error_axis) for p in points]
    order = sorted(range(n), key=lambda i: (powers[i], errors[i]))
    keep = [False] * n
    best_err_lower_power = math.inf
    i = 0
    while i < n:
        j = i
        while j < n and powers[order[j]] == powers[order[i]]:
            j += 1
        group = order[i:j]
        group_min = min(errors[g] for g in group)
        for g in group:
            # survives iff best within its power level and strictly better
            # than everything cheaper
            if errors[g] == group_min and errors[g] < best_err_lower_power:
                keep[g] = True
        best_err_lower_power = min(best_err_lower_power, group_min)
        i = j
    return [p for k, p in enumerate(points) if keep[k]]


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient, clamped to [-1, 1]."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("series must be one-dimensional and of equal length")
    if len(x) < 2:
        raise ValueError("need at least two samples")
    dx = x - x.mean()
    dy = y - y.mean()
    ssx = float(dx @ dx)
    ssy = float(dy @ dy)
    if ssx == 0.0 or ssy == 0.0:
        raise ValueError("degenerate series: zero variance")
    r = float(dx @ dy) / math.sqrt(ssx * ssy)
    return max(-1.0, min(1.0, r))


class MannWhitneyResult(NamedTuple):
    u: float          # U statistic of the first sample; small = first sample smaller
    p_value: float    # two-sided, normal approximation with tie correction
    approximate: bool  # True when min(n_x, n_y) < 8 (approximation unreliable)


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def mann_whitney_u(xs: Sequence[float], ys: Sequence[float]) -> MannWhitneyResult:
    """Rank-sum U test between two samples (ties get midranks).

    The identity U_x + U_y = n_x * n_y holds exactly; p uses the normal
    approximation (no continuity correction) with the usual tie correction.
    Identical samples give p = 1.
    """
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if len(x) == 0 or len(y) == 0:
        raise ValueError("both samples must be non-empty")
    nx, ny = len(x), len(y)
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    rank_sum_x = float(ranks[:nx].sum())
    u_x = rank_sum_x - nx * (nx + 1) / 2.0

    n = nx + ny
    _, tie_counts = np.unique(pooled, return_counts=True)
    tie_term = float(((tie_counts**3) - tie_counts).sum())
    correction = 1.0 - tie_term / (n**3 - n) if n > 1 else 0.0
    variance = correction * nx * ny * (n + 1) / 12.0
    if variance <= 0:
        p = 1.0
    else:
        z = (u_x - nx * ny / 2.0) / math.sqrt(variance)
        p = min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))
    return MannWhitneyResult(u=u_x, p_value=p, approximate=min(nx, ny) < 8)


def load_results_csv(path: str | Path) -> list[dict]:
    """Rows of a runner results CSV, with numeric fields converted.

    Comment lines (leading '#') are skipped; a missing column is an error
    naming it.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        rows = list(reader)
        header = reader.fieldnames or []
    for col in RESULTS_COLUMNS:
        if col not in header:
            raise ValueError(f"results CSV is missing column {col!r}")
    parsed = []
    for row in rows:
        out = dict(row)
        out["seed"] = int(row["seed"])
        out["evaluations"] = int(row["evaluations"])
        out["acc0"] = int(row["acc0"])
        for col in ("relative_power", *METRIC_COLUMNS):
            out[col] = float(row[col])
        out["gauss_ok"] = None if row["gauss_ok"] == "" else int(row["gauss_ok"])
        parsed.append(out)
    return parsed


def points_from_rows(rows: Iterable[dict]) -> list[ParetoPoint]:
    return [
        ParetoPoint(
            circuit_id=f"{row['config']}#s{row['seed']}",
            relative_power=row["relative_power"],
            wce_pct=row["wce_pct"],
            mae_pct=row["mae_pct"],
            er_pct=row["er_pct"],
            mre_pct=row["mre_pct"],
            avg_pct=row["avg_pct"],
            stddev=row["stddev"],
            config=row["config"],
        )
        for row in rows
    ]


def correlation_matrix(rows: Sequence[dict]) -> tuple[tuple[str, ...], np.ndarray]:
    """|Pearson| between every pair of numeric metrics; NaN when degenerate."""
    labels = METRIC_COLUMNS
    series = {c: [row[c] for row in rows] for c in labels}
    k = len(labels)
    matrix = np.full((k, k), np.nan)
    for i in range(k):
        for j in range(k):
            try:
                matrix[i, j] = abs(pearson(series[labels[i]], series[labels[j]]))
            except ValueError:
                pass
    return labels, matrix


def significance_matrix(rows: Sequence[dict], value_column: str = "relative_power",
                        ) -> tuple[tuple[str, ...], np.ndarray]:
    """Pairwise two-sided Mann-Whitney p between named configs."""
    groups: dict[str, list[float]] = {}
    for row in rows:
        groups.setdefault(row["config"], []).append(row[value_column])
    labels = tuple(sorted(groups))
    k = len(labels)
    matrix = np.ones((k, k))
    for i in range(k):
        for j in range(k):
            if i != j:
                matrix[i, j] = mann_whitney_u(groups[labels[i]], groups[labels[j]]).p_value
    return labels, matrix


def pareto_points_to_csv(points: Sequence[ParetoPoint]) -> str:
    cols = [f.name for f in fields(ParetoPoint)]
    lines = [",".join(cols)]
    for p in points:
        lines.append(",".join(str(getattr(p, c)) for c in cols))
    return "\n".join(lines) + "\n"


def matrix_to_csv(labels: Sequence[str], matrix: np.ndarray) -> str:
    lines = ["," + ",".join(labels)]
    for label, row in zip(labels, matrix):
        lines.append(label + "," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
