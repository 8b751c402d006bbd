"""Training-time augmentations applied jointly to stacks and targets.

Every stochastic draw comes from a named substream derived from
(seed, sample_index, stream id) via numpy's SeedSequence, so toggling one
augmentation never shifts another's draws and a pipeline run is fully
determined by its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _resample
from .core import PAD_VALUE, RadioMap
from .features import MODEL_SIZE, FeatureStack

_STREAM_IDS = {"mixup": 0, "rotate": 1, "flip": 2, "crop": 3}


@dataclass(frozen=True)
class AugmentConfig:
    seed: int
    mixup_prob: float = 0.75
    crop_prob: float = 0.75
    arbitrary_rotation: bool = False
    db_domain_resize: bool = False

    def __post_init__(self):
        for name in ("mixup_prob", "crop_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")


@dataclass(frozen=True)
class AugmentTrace:
    """Draws taken by one pipeline run, for provenance lines."""

    seed: int
    sample_index: int
    mixup_applied: bool
    mixup_lam: float | None
    rot_k: int | None
    rot_angle: float | None
    flip_h: bool
    flip_v: bool
    crop_applied: bool
    crop_box: tuple[int, int, int] | None  # (row0, col0, side)


def substream(seed: int, sample_index: int, name: str) -> np.random.Generator:
    """Deterministic per-(sample, augmentation) random stream."""
    entropy = (seed & 0xFFFFFFFFFFFFFFFF, sample_index, _STREAM_IDS[name])
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _check_pair(stack: FeatureStack, target: RadioMap) -> None:
    if (stack.height, stack.width) != (target.height, target.width):
        raise ValueError(
            f"stack {stack.height} x {stack.width} and target "
            f"{target.height} x {target.width} must match"
        )


def flip(
    stack: FeatureStack, target: RadioMap, horizontal: bool, vertical: bool
) -> tuple[FeatureStack, RadioMap]:
    """Mirror every channel and the target identically."""
    _check_pair(stack, target)
    axes = tuple(ax for ax, on in ((-1, horizontal), (-2, vertical)) if on)
    if not axes:
        return stack, target
    return (
        replace(stack, data=np.flip(stack.data, axis=axes).copy()),
        RadioMap(np.flip(target.values, axis=axes).copy()),
    )


def rot90(stack: FeatureStack, target: RadioMap, k: int) -> tuple[FeatureStack, RadioMap]:
    """Rotate all channels and the target by k * 90 degrees, losslessly."""
    _check_pair(stack, target)
    if stack.height != stack.width:
        raise ValueError("rot90 requires square inputs")
    k = k % 4
    if k == 0:
        return stack, target
    return (
        replace(stack, data=np.rot90(stack.data, k, axes=(-2, -1)).copy()),
        RadioMap(np.rot90(target.values, k).copy()),
    )


def rotate_arbitrary(
    stack: FeatureStack, target: RadioMap, angle_deg: float
) -> tuple[FeatureStack, RadioMap]:
    """Rotate about the image center with bilinear interpolation.

    Out-of-bounds samples get the padding value -1 in both the inputs
    and the target.
    """
    _check_pair(stack, target)
    if stack.height != stack.width:
        raise ValueError("rotation requires square inputs")
    return (
        replace(stack, data=_resample.rotate(stack.data, angle_deg, PAD_VALUE)),
        RadioMap(_resample.rotate(target.values, angle_deg, PAD_VALUE)),
    )


def mixup(
    a: tuple[FeatureStack, RadioMap], b: tuple[FeatureStack, RadioMap], lam: float
) -> tuple[FeatureStack, RadioMap]:
    """Blend two samples elementwise: lam * a + (1 - lam) * b.

    Frequency channels blend to intermediate GHz values; targets blend in
    the dB domain.
    """
    (sa, ta), (sb, tb) = a, b
    if sa.names != sb.names:
        raise ValueError(f"channel sets differ: {sa.names} vs {sb.names}")
    if sa.data.shape != sb.data.shape or ta.values.shape != tb.values.shape:
        raise ValueError("mixup inputs must have identical shapes")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    if lam == 1.0:
        return sa, ta
    data = lam * sa.data + (1.0 - lam) * sb.data
    values = lam * ta.values + (1.0 - lam) * tb.values
    return replace(sa, data=data), RadioMap(values)


def resize_db_domain(radio_map: RadioMap, new_shape: tuple[int, int]) -> RadioMap:
    """Resize a dB map by interpolating in linear power scale.

    p' = 10^(p/10), bilinear resize, back through 10 log10.  Convex
    weights keep the output inside the input's dB envelope.
    """
    linear = np.power(10.0, radio_map.values / 10.0)
    out = _resample.resize(linear, new_shape)
    return RadioMap(10.0 * np.log10(out))


def _apply_crop(
    stack: FeatureStack,
    target: RadioMap,
    row0: int,
    col0: int,
    side: int,
    db_domain: bool,
) -> tuple[FeatureStack, RadioMap]:
    size = stack.height
    data = stack.data[:, row0 : row0 + side, col0 : col0 + side]
    tval = target.values[row0 : row0 + side, col0 : col0 + side]
    out_stack = replace(stack, data=_resample.resize(data, (size, size)))
    if db_domain:
        out_target = resize_db_domain(RadioMap(tval), (size, size))
    else:
        out_target = RadioMap(_resample.resize(tval, (size, size)))
    return out_stack, out_target


def _draw_crop(rng: np.random.Generator, crop_prob: float, size: int):
    if rng.random() >= crop_prob:
        return None
    side = int(rng.integers(size // 2, size + 1))
    row0 = int(rng.integers(0, size - side + 1))
    col0 = int(rng.integers(0, size - side + 1))
    return row0, col0, side


def crop_resize(
    stack: FeatureStack,
    target: RadioMap,
    rng: np.random.Generator,
    crop_prob: float = 0.75,
    db_domain: bool = False,
) -> tuple[FeatureStack, RadioMap]:
    """With probability crop_prob, crop a random square window with side in
    [259, 518] and resize back to 518 x 518; otherwise identity."""
    _check_pair(stack, target)
    if (stack.height, stack.width) != (MODEL_SIZE, MODEL_SIZE):
        raise ValueError(f"crop_resize expects {MODEL_SIZE} x {MODEL_SIZE} inputs")
    box = _draw_crop(rng, crop_prob, MODEL_SIZE)
    if box is None:
        return stack, target
    return _apply_crop(stack, target, *box, db_domain)


def apply_pipeline(
    stack: FeatureStack,
    target: RadioMap,
    cfg: AugmentConfig,
    sample_index: int = 0,
    partner: tuple[FeatureStack, RadioMap] | None = None,
) -> tuple[FeatureStack, RadioMap, AugmentTrace]:
    """Full augmentation pass: mixup, rotation, flips, crop-resize.

    The mixup partner is supplied by the caller; with no partner the
    mixup stage is skipped (its draws are still consumed).  Returns the
    augmented pair plus a trace of every draw taken.
    """
    _check_pair(stack, target)
    if (stack.height, stack.width) != (MODEL_SIZE, MODEL_SIZE):
        raise ValueError(f"pipeline expects {MODEL_SIZE} x {MODEL_SIZE} inputs")

    m_rng = substream(cfg.seed, sample_index, "mixup")
    mix_fired = m_rng.random() < cfg.mixup_prob
    lam = float(m_rng.random())
    mix_applied = mix_fired and partner is not None
    if mix_applied:
        stack, target = mixup((stack, target), partner, lam)

    r_rng = substream(cfg.seed, sample_index, "rotate")
    rot_k: int | None = None
    rot_angle: float | None = None
    if cfg.arbitrary_rotation:
        rot_fired = r_rng.random() < 0.75
        angle = float(r_rng.uniform(0.0, 360.0))
        if rot_fired:
            rot_angle = angle
            stack, target = rotate_arbitrary(stack, target, angle)
    else:
        rot_k = int(r_rng.integers(0, 4))
        stack, target = rot90(stack, target, rot_k)

    f_rng = substream(cfg.seed, sample_index, "flip")
    flip_h = bool(f_rng.random() < 0.5)
    flip_v = bool(f_rng.random() < 0.5)
    stack, target = flip(stack, target, flip_h, flip_v)

    c_rng = substream(cfg.seed, sample_index, "crop")
    box = _draw_crop(c_rng, cfg.crop_prob, MODEL_SIZE)
    if box is not None:
        stack, target = _apply_crop(stack, target, *box, cfg.db_domain_resize)

    trace = AugmentTrace(
        seed=cfg.seed,
        sample_index=sample_index,
        mixup_applied=mix_applied,
        mixup_lam=lam if mix_applied else None,
        rot_k=rot_k,
        rot_angle=rot_angle,
        flip_h=flip_h,
        flip_v=flip_v,
        crop_applied=box is not None,
        crop_box=box,
    )
    return stack, target, trace
