"""Independent reference implementations used to verify the library.

These deliberately share no code with the package: the obstruction
oracle is a brute-force dense sampler and the RMSE references are plain
Python loops.
"""

import numpy as np
from numba import njit


@njit
def _dense_counts(wall, r0, c0, step_px):
    h, w = wall.shape
    counts = np.zeros((h, w), dtype=np.int32)
    for tr in range(h):
        for tc in range(w):
            dr = float(tr - r0)
            dc = float(tc - c0)
            n = int(np.ceil(np.hypot(dr, dc) / step_px))
            if n < 1:
                n = 1
            prev = wall[r0, c0]
            cnt = 0
            for j in range(1, n + 1):
                t = j / n
                rh = (r0 + 0.5) + dr * t
                ch = (c0 + 0.5) + dc * t
                fr = np.floor(rh)
                fc = np.floor(ch)
                if rh == fr or ch == fc:
                    # exactly on a cell boundary: the point belongs to no
                    # single cell, so it cannot witness a material change
                    continue
                cur = wall[int(fr), int(fc)]
                if cur and not prev:
                    cnt += 1
                prev = cur
            counts[tr, tc] = cnt
    return counts


def dense_obstruction_map(wall: np.ndarray, tx_cell: tuple[int, int], step_px: float = 0.01):
    """Air-to-wall transition counts by sampling every segment from the tx
    cell center to each pixel center at steps of at most ``step_px``."""
    return _dense_counts(np.ascontiguousarray(wall), tx_cell[0], tx_cell[1], step_px)


def naive_rmse_micro(preds, targets, pad_value=-1.0):
    total = 0.0
    count = 0
    for p, t in zip(preds, targets):
        for i in range(t.shape[0]):
            for j in range(t.shape[1]):
                if t[i, j] != pad_value:
                    total += (p[i, j] - t[i, j]) ** 2
                    count += 1
    return (total / count) ** 0.5


def naive_rmse_macro(preds, targets, pad_value=-1.0):
    rmses = []
    for p, t in zip(preds, targets):
        total = 0.0
        count = 0
        for i in range(t.shape[0]):
            for j in range(t.shape[1]):
                if t[i, j] != pad_value:
                    total += (p[i, j] - t[i, j]) ** 2
                    count += 1
        rmses.append((total / count) ** 0.5)
    return sum(rmses) / len(rmses)
