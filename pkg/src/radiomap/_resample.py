"""Bilinear and nearest-neighbor resampling on the trailing two axes.

Source coordinates follow the half-pixel-center convention
(src = (dst + 0.5) * in/out - 0.5) with edge clamping, and interpolation
is written in lerp form (a + t * (b - a)) so constant inputs are
reproduced bit-exactly.
"""

from __future__ import annotations

import numpy as np


def _src_coords(n_in: int, n_out: int) -> np.ndarray:
    s = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    return np.clip(s, 0.0, n_in - 1)


def _lerp(a, b, t):
    return a + t * (b - a)


def resize(img: np.ndarray, out_shape: tuple[int, int], method: str = "bilinear") -> np.ndarray:
    """Resample ``img`` (..., H, W) to (..., out_h, out_w)."""
    out_h, out_w = out_shape
    if out_h <= 0 or out_w <= 0:
        raise ValueError(f"output shape must be positive, got {out_shape}")
    in_h, in_w = img.shape[-2:]
    if method == "nearest":
        ri = np.minimum(((np.arange(out_h) + 0.5) * (in_h / out_h)).astype(np.intp), in_h - 1)
        ci = np.minimum(((np.arange(out_w) + 0.5) * (in_w / out_w)).astype(np.intp), in_w - 1)
        return img[..., ri[:, None], ci[None, :]]
    if method != "bilinear":
        raise ValueError(f"unknown method {method!r}")

    sr = _src_coords(in_h, out_h)
    sc = _src_coords(in_w, out_w)
    r0 = np.floor(sr).astype(np.intp)
    c0 = np.floor(sc).astype(np.intp)
    r1 = np.minimum(r0 + 1, in_h - 1)
    c1 = np.minimum(c0 + 1, in_w - 1)
    fr = (sr - r0)[:, None]
    fc = (sc - c0)[None, :]
    if img.dtype == np.float32:  # keep float32 inputs out of float64 temporaries
        fr = fr.astype(np.float32)
        fc = fc.astype(np.float32)

    r0 = r0[:, None]
    r1 = r1[:, None]
    c0 = c0[None, :]
    c1 = c1[None, :]
    top = _lerp(img[..., r0, c0], img[..., r0, c1], fc)
    bot = _lerp(img[..., r1, c0], img[..., r1, c1], fc)
    return _lerp(top, bot, fr)


def rotate(img: np.ndarray, angle_deg: float, fill: float) -> np.ndarray:
    """Rotate (..., H, W) counterclockwise about the image center.

    Bilinear sampling; points mapping outside the source get ``fill``.
    At multiples of 360 the map is the identity (exact at 0).
    """
    h, w = img.shape[-2:]
    cr = (h - 1) / 2.0
    cc = (w - 1) / 2.0
    a = np.deg2rad(angle_deg)
    cos, sin = np.cos(a), np.sin(a)

    dr = np.arange(h, dtype=np.float64)[:, None] - cr
    dc = np.arange(w, dtype=np.float64)[None, :] - cc
    # inverse map of a counterclockwise rotation in display orientation
    src_r = cr + cos * dr + sin * dc
    src_c = cc - sin * dr + cos * dc

    inside = (src_r >= 0) & (src_r <= h - 1) & (src_c >= 0) & (src_c <= w - 1)
    sr = np.clip(src_r, 0.0, h - 1)
    sc = np.clip(src_c, 0.0, w - 1)
    r0 = np.floor(sr).astype(np.intp)
    c0 = np.floor(sc).astype(np.intp)
    r1 = np.minimum(r0 + 1, h - 1)
    c1 = np.minimum(c0 + 1, w - 1)
    fr = sr - r0
    fc = sc - c0

    top = _lerp(img[..., r0, c0], img[..., r0, c1], fc)
    bot = _lerp(img[..., r1, c0], img[..., r1, c1], fc)
    out = _lerp(top, bot, fr)
    return np.where(inside, out, np.asarray(fill, dtype=out.dtype))
