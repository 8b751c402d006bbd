"""Distribution-shift statistics and the dense-region crop generator.

Wall density and mean material values quantify how far apart two sets of
building layouts are; `generate_crops` extracts the densest windows of a
layout for augmenting a training set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import BuildingGrid


@dataclass(frozen=True)
class ShiftStats:
    """Wall fraction and mean material values (walls only, air excluded).

    Means are None when the grid has no wall pixels.
    """

    wall_density: float
    mean_wall_transmittance: float | None
    mean_wall_reflectance: float | None


def stats(grid: BuildingGrid) -> ShiftStats:
    wall = grid.wall_mask
    density = float(wall.mean())
    if not wall.any():
        return ShiftStats(density, None, None)
    return ShiftStats(
        wall_density=density,
        mean_wall_transmittance=float(grid.transmittance[wall].mean()),
        mean_wall_reflectance=float(grid.reflectance[wall].mean()),
    )


def dataset_scatter(
    grids: Sequence[BuildingGrid], labels: Sequence[str] | None = None
) -> list[tuple[str, ShiftStats]]:
    """Per-grid stats plus a final aggregate row labeled "mean".

    Aggregate means average over the grids that have walls.
    """
    if len(grids) == 0:
        raise ValueError("no grids given")
    if labels is None:
        labels = [f"grid_{i}" for i in range(len(grids))]
    if len(labels) != len(grids):
        raise ValueError(f"{len(labels)} labels for {len(grids)} grids")
    rows = [(label, stats(g)) for label, g in zip(labels, grids)]

    def mean_of(values):
        present = [v for v in values if v is not None]
        return float(np.mean(present)) if present else None

    agg = ShiftStats(
        wall_density=float(np.mean([s.wall_density for _, s in rows])),
        mean_wall_transmittance=mean_of([s.mean_wall_transmittance for _, s in rows]),
        mean_wall_reflectance=mean_of([s.mean_wall_reflectance for _, s in rows]),
    )
    return rows + [("mean", agg)]


def scatter_to_csv(rows: Sequence[tuple[str, ShiftStats]], path) -> None:
    """CSV export with 6 significant digits; absent means become empty fields."""

    def fmt(v):
        return "" if v is None else f"{v:.6g}"

    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["label", "wall_density", "mean_wall_transmittance", "mean_wall_reflectance"]
        )
        for label, s in rows:
            writer.writerow(
                [label, fmt(s.wall_density), fmt(s.mean_wall_transmittance), fmt(s.mean_wall_reflectance)]
            )


def generate_crops(
    grid: BuildingGrid,
    window: int,
    stride: int = 1,
    min_density: float = 0.0,
    max_crops: int = 8,
) -> list[BuildingGrid]:
    """Greedy non-overlapping top-k windows by wall density.

    Slides a window x window box with the given stride, scores each
    position by wall density, then keeps the best-scoring pairwise
    non-overlapping positions with density >= min_density, up to
    max_crops.  Ties break toward the top-left position.
    """
    h, w = grid.height, grid.width
    if window <= 0 or window > min(h, w):
        raise ValueError(f"window {window} must be in 1..{min(h, w)}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if max_crops < 1:
        raise ValueError(f"max_crops must be >= 1, got {max_crops}")

    wall = grid.wall_mask.astype(np.int64)
    ii = np.zeros((h + 1, w + 1), dtype=np.int64)
    ii[1:, 1:] = wall.cumsum(0).cumsum(1)
    r0s = np.arange(0, h - window + 1, stride)
    c0s = np.arange(0, w - window + 1, stride)
    counts = (
        ii[r0s[:, None] + window, c0s[None, :] + window]
        - ii[r0s[:, None], c0s[None, :] + window]
        - ii[r0s[:, None] + window, c0s[None, :]]
        + ii[r0s[:, None], c0s[None, :]]
    )
    density = counts / float(window * window)

    candidates = [
        (float(density[i, j]), int(r0s[i]), int(c0s[j]))
        for i in range(len(r0s))
        for j in range(len(c0s))
        if density[i, j] >= min_density
    ]
    candidates.sort(key=lambda t: (-t[0], t[1], t[2]))

    kept: list[tuple[int, int]] = []
    for _, r0, c0 in candidates:
        if len(kept) == max_crops:
            break
        overlaps = any(
            abs(r0 - kr) < window and abs(c0 - kc) < window for kr, kc in kept
        )
        if not overlaps:
            kept.append((r0, c0))

    return [
        BuildingGrid(
            reflectance=grid.reflectance[r0 : r0 + window, c0 : c0 + window],
            transmittance=grid.transmittance[r0 : r0 + window, c0 : c0 + window],
            pixel_size_m=grid.pixel_size_m,
        )
        for r0, c0 in kept
    ]
