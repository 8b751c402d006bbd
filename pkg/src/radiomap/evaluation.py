"""RMSE metrics, task splits, and grouped generalization reports.

Padding pixels (target equal to the -1 fill) are never scored.  All
reductions go through numpy sums, which use pairwise summation, so
aggregate values are bit-stable run to run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import PAD_VALUE, RadioMap, SampleMeta


def _values(m) -> np.ndarray:
    return m.values if isinstance(m, RadioMap) else np.asarray(m, dtype=np.float64)


def _scored(pred, target, mask):
    p, t = _values(pred), _values(target)
    if p.shape != t.shape:
        raise ValueError(f"prediction {p.shape} and target {t.shape} shapes differ")
    keep = t != PAD_VALUE
    if mask is not None:
        m = np.asarray(mask, dtype=bool)
        if m.shape != t.shape:
            raise ValueError(f"mask {m.shape} does not match maps {t.shape}")
        keep &= m
    return p[keep], t[keep]


def _check_lengths(preds, targets, masks):
    if len(preds) != len(targets):
        raise ValueError(f"{len(preds)} predictions for {len(targets)} targets")
    if len(preds) == 0:
        raise ValueError("no maps to evaluate")
    if masks is None:
        return [None] * len(preds)
    if len(masks) != len(preds):
        raise ValueError(f"{len(masks)} masks for {len(preds)} maps")
    return masks


def per_map_rmse(pred, target, mask=None) -> float:
    """RMSE over the scored pixels of a single map."""
    p, t = _scored(pred, target, mask)
    if p.size == 0:
        raise ValueError("no scored pixels")
    return float(np.sqrt(np.mean((p - t) ** 2)))


def rmse_micro(preds: Sequence, targets: Sequence, masks=None) -> float:
    """RMSE pooled over all scored pixels of all maps."""
    masks = _check_lengths(preds, targets, masks)
    total = 0.0
    count = 0
    for pred, target, mask in zip(preds, targets, masks):
        p, t = _scored(pred, target, mask)
        total += float(np.sum((p - t) ** 2))
        count += p.size
    if count == 0:
        raise ValueError("no scored pixels")
    return float(np.sqrt(total / count))


def rmse_macro(preds: Sequence, targets: Sequence, masks=None) -> float:
    """Unweighted mean of per-map RMSEs."""
    masks = _check_lengths(preds, targets, masks)
    return float(np.mean([per_map_rmse(p, t, m) for p, t, m in zip(preds, targets, masks)]))


# ---------------------------------------------------------------------------
# Task splits


@dataclass(frozen=True)
class SplitSpec:
    """Train/val/test partition along the building, frequency, and antenna axes."""

    task: int
    train_buildings: frozenset[int]
    val_buildings: frozenset[int]
    test_buildings: frozenset[int]
    train_freqs: frozenset[float]
    val_freqs: frozenset[float]
    test_freqs: frozenset[float]
    train_antennas: frozenset[int]
    val_antennas: frozenset[int]
    test_antennas: frozenset[int]


def make_split(task: int) -> SplitSpec:
    """Dataset partition for one of the three generalization tasks.

    Buildings split 1-19 / 20-22 / 23-25 for every task.  Tasks 2 and 3
    train on 868 and 3500 MHz and hold out 1800 MHz for validation and
    testing.  Task 3 trains on antennas 1-3, validates on 4, tests on 5;
    the other tasks fix the isotropic antenna (configuration 1).
    """
    if task not in (1, 2, 3):
        raise ValueError(f"task must be 1, 2, or 3, got {task}")
    buildings = (frozenset(range(1, 20)), frozenset(range(20, 23)), frozenset(range(23, 26)))
    if task == 1:
        freqs = (frozenset({868.0}),) * 3
    else:
        freqs = (frozenset({868.0, 3500.0}), frozenset({1800.0}), frozenset({1800.0}))
    if task == 3:
        antennas = (frozenset({1, 2, 3}), frozenset({4}), frozenset({5}))
    else:
        antennas = (frozenset({1}),) * 3
    return SplitSpec(
        task,
        *buildings,
        *freqs,
        *antennas,
    )


# ---------------------------------------------------------------------------
# Grouped reports


@dataclass(frozen=True)
class EvalReport:
    per_map: tuple[tuple[SampleMeta, float], ...]
    micro_rmse: float
    macro_rmse: float
    groups: tuple[tuple[str, float], ...]

    def to_dict(self) -> dict:
        return {
            "micro_rmse": self.micro_rmse,
            "macro_rmse": self.macro_rmse,
            "per_map": [
                {
                    "building_id": m.building_id,
                    "antenna_id": m.antenna_id,
                    "freq_mhz": m.freq_mhz,
                    "tx_index": m.tx_index,
                    "split": m.split,
                    "rmse": r,
                }
                for m, r in self.per_map
            ],
            "groups": [{"label": label, "rmse": r} for label, r in self.groups],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_table(self) -> str:
        lines = [
            f"{'micro RMSE':<42}{self.micro_rmse:>10.4f}",
            f"{'macro RMSE':<42}{self.macro_rmse:>10.4f}",
        ]
        for label, r in self.groups:
            lines.append(f"{label:<42}{r:>10.4f}")
        return "\n".join(lines)


_AXES = ("building", "freq", "antenna")


def axis_flags(meta: SampleMeta, split: SplitSpec) -> dict[str, bool]:
    """True per axis when the sample's value was seen in training."""
    return {
        "building": meta.building_id in split.train_buildings,
        "freq": meta.freq_mhz in split.train_freqs,
        "antenna": meta.antenna_id in split.train_antennas,
    }


def grouped_report(
    preds: Sequence,
    targets: Sequence,
    metas: Sequence[SampleMeta],
    split: SplitSpec,
    masks=None,
    group_by: tuple[str, ...] = _AXES,
) -> EvalReport:
    """Per-combination macro RMSE over every non-empty seen/unseen combo,
    plus overall micro and macro."""
    masks = _check_lengths(preds, targets, masks)
    if len(metas) != len(preds):
        raise ValueError(f"{len(metas)} metas for {len(preds)} maps")
    bad = [ax for ax in group_by if ax not in _AXES]
    if bad:
        raise ValueError(f"unknown axes: {bad}")

    per_map = [per_map_rmse(p, t, m) for p, t, m in zip(preds, targets, masks)]
    buckets: dict[tuple[bool, ...], list[float]] = {}
    for meta, rmse in zip(metas, per_map):
        flags = axis_flags(meta, split)
        key = tuple(flags[ax] for ax in group_by)
        buckets.setdefault(key, []).append(rmse)

    groups = []
    for key in sorted(buckets, reverse=True):  # all-seen first
        label = ",".join(
            f"{ax}:{'seen' if seen else 'unseen'}" for ax, seen in zip(group_by, key)
        )
        groups.append((label, float(np.mean(buckets[key]))))

    return EvalReport(
        per_map=tuple(zip(metas, per_map)),
        micro_rmse=rmse_micro(preds, targets, None if all(m is None for m in masks) else masks),
        macro_rmse=float(np.mean(per_map)),
        groups=tuple(groups),
    )


def task_weighted_average(per_task_rmse: dict[int, float], weights: dict[int, float]) -> float:
    """Weighted mean across tasks; weights are caller-supplied."""
    missing = set(per_task_rmse) - set(weights)
    if missing:
        raise ValueError(f"missing weights for tasks {sorted(missing)}")
    total_w = sum(weights[t] for t in per_task_rmse)
    if total_w <= 0:
        raise ValueError("weights must sum to a positive value")
    return sum(per_task_rmse[t] * weights[t] for t in per_task_rmse) / total_w
