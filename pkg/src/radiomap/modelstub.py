"""Forward-only realization of the encoder/neck/decoder contract.

The pretrained transformer encoder is replaced by a seeded stub (patch
embedding plus iterated tanh mixing) that still emits 14 layer tensors
of shape 1369 x 768, so the surrounding plumbing runs for real: shared
linear projection, per-layer neck (1x1 conv, bilinear upscale, 3x3
conv), skip concatenation of the wall channels, and the sigmoid head
scaled to 160 dB.  No training, no gradients; weights are random or
file-loaded and immutable.

Feature maps are carried channels-last (H, W, C) so every convolution
reduces to pointwise GEMMs over a zero-padded buffer plus shifted adds,
and bilinear upscaling to two separable interpolation-matrix products.
Everything runs in float32 except the final sigmoid, which is evaluated
in float64 to keep outputs strictly inside (0, 160).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._resample import _src_coords
from .core import RadioMap, read_grid_file, write_grid_file
from .features import MODEL_SIZE, FeatureStack

PATCH = 14
TOKEN_GRID = MODEL_SIZE // PATCH  # 37
N_TOKENS = TOKEN_GRID * TOKEN_GRID  # 1369
EMBED_DIM = 768
N_LAYERS = 14

SCALE_FACTORS = (14, 14, 14, 8, 8, 8, 4, 4, 4, 2, 2, 2, 1, 1)
DEPTHS_TASK1 = (16, 16, 16, 32, 32, 32, 64, 64, 64, 128, 128, 128, 256, 256)
# 13 entries as printed; one short of the 14 scale factors.  Padded with a
# repeat of the final 512 at spec construction.
DEPTHS_TASK23 = (32, 32, 32, 64, 64, 64, 128, 128, 128, 256, 256, 512, 512)

TASK_CHANNELS = {1: 3, 2: 4, 3: 5}


@dataclass(frozen=True)
class NeckSpec:
    scale_factors: tuple[int, ...]
    depths: tuple[int, ...]
    neck_in_dim: int

    def __post_init__(self):
        if len(self.scale_factors) != N_LAYERS:
            raise ValueError(f"need {N_LAYERS} scale factors, got {len(self.scale_factors)}")
        if len(self.depths) != N_LAYERS:
            raise ValueError(f"need {N_LAYERS} depths, got {len(self.depths)}")

    @classmethod
    def for_task(cls, task: int) -> "NeckSpec":
        if task == 1:
            return cls(SCALE_FACTORS, DEPTHS_TASK1, 256)
        if task in (2, 3):
            depths = DEPTHS_TASK23 + (DEPTHS_TASK23[-1],) * (N_LAYERS - len(DEPTHS_TASK23))
            return cls(SCALE_FACTORS, depths, 512)
        raise ValueError(f"task must be 1, 2, or 3, got {task}")

    @property
    def output_sides(self) -> tuple[int, ...]:
        return tuple(TOKEN_GRID * s for s in self.scale_factors)


@dataclass(frozen=True)
class StubWeights:
    """All kernels and projections of the stub, seeded or file-loaded."""

    task: int
    seed: int
    fusion_hidden: int
    input_conv_w: np.ndarray  # (3, C_task, 3, 3)
    input_conv_b: np.ndarray
    embed_w: np.ndarray  # (3 * 196, 768)
    embed_b: np.ndarray
    enc_w: np.ndarray  # (768, 768)
    enc_b: np.ndarray
    proj_w: np.ndarray  # (768, neck_in)
    proj_b: np.ndarray
    neck_conv1_w: tuple[np.ndarray, ...]  # each (neck_in, d_i)
    neck_conv1_b: tuple[np.ndarray, ...]
    neck_conv3_w: tuple[np.ndarray, ...]  # each (d_i, d_i, 3, 3)
    neck_conv3_b: tuple[np.ndarray, ...]
    head_w1: np.ndarray  # (hidden, sum(depths) + 2, 3, 3)
    head_b1: np.ndarray
    head_w2: np.ndarray  # (1, hidden, 3, 3)
    head_b2: np.ndarray

    @classmethod
    def init(cls, task: int, seed: int, fusion_hidden: int = 8) -> "StubWeights":
        spec = NeckSpec.for_task(task)
        cin = TASK_CHANNELS[task]
        rng = np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, task)))

        def dense(*shape):
            fan_in = int(np.prod(shape[1:])) if len(shape) > 1 else shape[0]
            a = rng.standard_normal(shape, dtype=np.float32)
            return a / np.float32(np.sqrt(fan_in))

        def bias(n):
            return rng.standard_normal(n, dtype=np.float32) * np.float32(0.01)

        n1w, n1b, n3w, n3b = [], [], [], []
        for d in spec.depths:
            n1w.append(dense(d, spec.neck_in_dim).T.copy())
            n1b.append(bias(d))
            n3w.append(dense(d, d, 3, 3))
            n3b.append(bias(d))
        fused_in = sum(spec.depths) + 2
        return cls(
            task=task,
            seed=seed,
            fusion_hidden=fusion_hidden,
            input_conv_w=dense(3, cin, 3, 3),
            input_conv_b=bias(3),
            embed_w=dense(EMBED_DIM, 3 * PATCH * PATCH).T.copy(),
            embed_b=bias(EMBED_DIM),
            enc_w=dense(EMBED_DIM, EMBED_DIM),
            enc_b=bias(EMBED_DIM),
            proj_w=dense(spec.neck_in_dim, EMBED_DIM).T.copy(),
            proj_b=bias(spec.neck_in_dim),
            neck_conv1_w=tuple(n1w),
            neck_conv1_b=tuple(n1b),
            neck_conv3_w=tuple(n3w),
            neck_conv3_b=tuple(n3b),
            head_w1=dense(fusion_hidden, fused_in, 3, 3),
            head_b1=bias(fusion_hidden),
            head_w2=dense(1, fusion_hidden, 3, 3),
            head_b2=bias(1),
        )


# ---------------------------------------------------------------------------
# Channels-last compute kernels


def _pad_cl(x: np.ndarray) -> np.ndarray:
    """Zero-pad (H, W, C) by one pixel on each spatial side."""
    h, w, c = x.shape
    xp = np.zeros((h + 2, w + 2, c), dtype=np.float32)
    xp[1:-1, 1:-1, :] = x
    return xp


def _conv3x3_taps(xp: np.ndarray, w: np.ndarray, out: np.ndarray) -> None:
    """Accumulate a 3x3 convolution into ``out`` (H, W, Cout).

    ``xp`` is the zero-padded (H+2, W+2, Cin) input; each tap is one
    pointwise GEMM over the padded buffer followed by a shifted add.
    """
    hp, wp, cin = xp.shape
    h, wd = hp - 2, wp - 2
    flat = xp.reshape(-1, cin)
    # contiguous (3, 3, cin, cout) taps; strided views would miss BLAS
    taps = np.ascontiguousarray(w.transpose(2, 3, 1, 0))
    for di in range(3):
        for dj in range(3):
            p = (flat @ taps[di, dj]).reshape(hp, wp, -1)
            out += p[di : di + h, dj : dj + wd]


def _conv3x3_cl(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-size 3x3 convolution on a channels-last map."""
    h, wd, _ = x.shape
    out = np.empty((h, wd, w.shape[0]), dtype=np.float32)
    out[:] = b
    _conv3x3_taps(_pad_cl(x), w, out)
    return out


def _resize_matrix(n_in: int, n_out: int) -> np.ndarray:
    """Dense bilinear interpolation matrix (n_out, n_in), half-pixel centers."""
    s = _src_coords(n_in, n_out)
    i0 = np.floor(s).astype(np.intp)
    i1 = np.minimum(i0 + 1, n_in - 1)
    f = (s - i0).astype(np.float32)
    m = np.zeros((n_out, n_in), dtype=np.float32)
    m[np.arange(n_out), i0] += 1.0 - f
    m[np.arange(n_out), i1] += f
    return m


def _upsample_cl(x: np.ndarray, mr: np.ndarray, mc: np.ndarray) -> np.ndarray:
    """Separable bilinear upscale of (h, w, c) to (mr rows, mc cols)."""
    h, w, c = x.shape
    oh, ow = mr.shape[0], mc.shape[0]
    u = (mr @ x.reshape(h, w * c)).reshape(oh, w, c)
    u = np.ascontiguousarray(u.transpose(0, 2, 1)).reshape(oh * c, w)
    u = (u @ mc.T).reshape(oh, c, ow)
    return np.ascontiguousarray(u.transpose(0, 2, 1))


# ---------------------------------------------------------------------------
# Forward stages


def patchify(image: np.ndarray) -> np.ndarray:
    """Split a C x 518 x 518 image into 37 x 37 non-overlapping 14 x 14
    patches; returns the (1369, C * 196) row-major token matrix."""
    c, h, w = image.shape
    if h != MODEL_SIZE or w != MODEL_SIZE:
        raise ValueError(f"spatial side must be {MODEL_SIZE}, got {h} x {w}")
    t = image.reshape(c, TOKEN_GRID, PATCH, TOKEN_GRID, PATCH)
    return np.ascontiguousarray(t.transpose(1, 3, 0, 2, 4)).reshape(N_TOKENS, c * PATCH * PATCH)


def encoder_states(tokens: np.ndarray, weights: StubWeights) -> np.ndarray:
    """Stub encoder: embedding plus 13 iterated tanh layers.

    Returns the 14 layer tensors (first layer, 12 hidden, output),
    shape (14, 1369, 768).
    """
    e = tokens.astype(np.float32) @ weights.embed_w + weights.embed_b
    states = [e]
    for _ in range(N_LAYERS - 1):
        e = np.tanh(e @ weights.enc_w + weights.enc_b)
        states.append(e)
    return np.stack(states)


def project_embeddings(layers: np.ndarray, weights: StubWeights) -> np.ndarray:
    """Shared linear map 768 -> neck_in_dim, reshaped to token-grid maps.

    Input (14, 1369, 768); output (14, neck_in_dim, 37, 37).
    """
    layers = np.asarray(layers)
    if layers.shape != (N_LAYERS, N_TOKENS, EMBED_DIM):
        raise ValueError(
            f"expected {(N_LAYERS, N_TOKENS, EMBED_DIM)} layer tensors, got {layers.shape}"
        )
    flat = layers.astype(np.float32) @ weights.proj_w + weights.proj_b
    neck_in = weights.proj_w.shape[1]
    return np.ascontiguousarray(flat.transpose(0, 2, 1)).reshape(
        N_LAYERS, neck_in, TOKEN_GRID, TOKEN_GRID
    )


def neck_forward(
    layer_maps: np.ndarray, spec: NeckSpec, weights: StubWeights
) -> list[np.ndarray]:
    """Per layer: 1x1 conv to the layer depth, bilinear upscale by the
    layer's factor, then a depth-preserving 3x3 conv.

    Returns one channels-last (side, side, depth) array per layer, with
    sides 518 / 296 / 148 / 74 / 37 as forced by the scale factors.
    """
    layer_maps = np.asarray(layer_maps)
    if layer_maps.shape != (N_LAYERS, spec.neck_in_dim, TOKEN_GRID, TOKEN_GRID):
        raise ValueError(
            f"expected {(N_LAYERS, spec.neck_in_dim, TOKEN_GRID, TOKEN_GRID)}, "
            f"got {layer_maps.shape}"
        )
    outs = []
    for m, s, d, w1, b1, w3, b3 in zip(
        layer_maps,
        spec.scale_factors,
        spec.depths,
        weights.neck_conv1_w,
        weights.neck_conv1_b,
        weights.neck_conv3_w,
        weights.neck_conv3_b,
    ):
        z = m.reshape(spec.neck_in_dim, -1).T.astype(np.float32) @ w1 + b1
        z = z.reshape(TOKEN_GRID, TOKEN_GRID, d)
        if s > 1:
            mat = _resize_matrix(TOKEN_GRID, TOKEN_GRID * s)
            z = _upsample_cl(z, mat, mat)
        outs.append(_conv3x3_cl(z, w3, b3))
    return outs


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


_BLOCK = 64  # feature channels per upsample/conv chunk, bounds peak memory


def decode_head(
    features: list[np.ndarray],
    reflectance: np.ndarray,
    transmittance: np.ndarray,
    weights: StubWeights,
) -> RadioMap:
    """Fusion head: upsample every feature map to full resolution,
    concatenate the two wall channels, 3x3 conv, rectifier, 3x3 conv to
    one channel, sigmoid, times 160.

    ``features`` are channels-last maps as produced by `neck_forward`.
    """
    size = MODEL_SIZE
    for name, chan in (("reflectance", reflectance), ("transmittance", transmittance)):
        if np.shape(chan) != (size, size):
            raise ValueError(f"{name} must be {size} x {size}, got {np.shape(chan)}")
    fused_in = weights.head_w1.shape[1]
    total_depth = sum(f.shape[-1] for f in features)
    if total_depth + 2 != fused_in:
        raise ValueError(f"feature depths sum to {total_depth}, head expects {fused_in - 2}")

    hidden = weights.head_w1.shape[0]
    acc = np.empty((size, size, hidden), dtype=np.float32)
    acc[:] = weights.head_b1
    walls = np.stack(
        [np.asarray(reflectance, dtype=np.float32), np.asarray(transmittance, dtype=np.float32)],
        axis=-1,
    )
    ch = 0
    for f in list(features) + [walls]:
        side, d = f.shape[0], f.shape[-1]
        mat = _resize_matrix(side, size) if side != size else None
        for b0 in range(0, d, _BLOCK):
            blk = np.ascontiguousarray(f[:, :, b0 : b0 + _BLOCK], dtype=np.float32)
            if mat is not None:
                blk = _upsample_cl(blk, mat, mat)
            _conv3x3_taps(_pad_cl(blk), weights.head_w1[:, ch + b0 : ch + b0 + blk.shape[-1]], acc)
        ch += d

    body = np.maximum(acc, np.float32(0.0))
    logits = _conv3x3_cl(body, weights.head_w2, weights.head_b2)[:, :, 0].astype(np.float64)
    return RadioMap(160.0 * _sigmoid(logits))


def forward(stack: FeatureStack, weights: StubWeights, task: int) -> RadioMap:
    """Full forward pass on a normalized, padded 518 x 518 stack.

    The stack's channel count must match the task (3, 4, or 5); the
    output is deterministic given (input, seed).
    """
    if task not in TASK_CHANNELS:
        raise ValueError(f"task must be 1, 2, or 3, got {task}")
    if weights.task != task:
        raise ValueError(f"weights were built for task {weights.task}, not {task}")
    expected = TASK_CHANNELS[task]
    if stack.data.shape[0] != expected:
        raise ValueError(f"task {task} expects {expected} channels, got {stack.data.shape[0]}")
    if (stack.height, stack.width) != (MODEL_SIZE, MODEL_SIZE):
        raise ValueError(f"stack must be {MODEL_SIZE} x {MODEL_SIZE}")
    if not stack.normalized:
        raise ValueError("stack must be normalized")

    img_cl = np.ascontiguousarray(stack.data.transpose(1, 2, 0), dtype=np.float32)
    img3 = _conv3x3_cl(img_cl, weights.input_conv_w, weights.input_conv_b)
    tokens = patchify(np.ascontiguousarray(img3.transpose(2, 0, 1)))
    states = encoder_states(tokens, weights)
    maps = project_embeddings(states, weights)
    spec = NeckSpec.for_task(task)
    feats = neck_forward(maps, spec, weights)
    return decode_head(feats, stack.channel("reflectance"), stack.channel("transmittance"), weights)


# ---------------------------------------------------------------------------
# Weight files: one flattened RMG1 raster per tensor plus a JSON manifest.


def _tensor_items(weights: StubWeights):
    for name in (
        "input_conv_w",
        "input_conv_b",
        "embed_w",
        "embed_b",
        "enc_w",
        "enc_b",
        "proj_w",
        "proj_b",
        "head_w1",
        "head_b1",
        "head_w2",
        "head_b2",
    ):
        yield name, getattr(weights, name)
    for i in range(N_LAYERS):
        yield f"neck_conv1_w_{i:02d}", weights.neck_conv1_w[i]
        yield f"neck_conv1_b_{i:02d}", weights.neck_conv1_b[i]
        yield f"neck_conv3_w_{i:02d}", weights.neck_conv3_w[i]
        yield f"neck_conv3_b_{i:02d}", weights.neck_conv3_b[i]


def save_weights(weights: StubWeights, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tensors = {}
    for name, arr in _tensor_items(weights):
        fname = f"{name}.rmg"
        write_grid_file(np.asarray(arr, dtype=np.float32).reshape(1, 1, -1), directory / fname)
        tensors[name] = {"file": fname, "shape": list(np.shape(arr))}
    manifest = {
        "task": weights.task,
        "seed": weights.seed,
        "fusion_hidden": weights.fusion_hidden,
        "tensors": tensors,
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def load_weights(directory) -> StubWeights:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))

    def tensor(name):
        entry = manifest["tensors"][name]
        flat = read_grid_file(directory / entry["file"])
        return flat.reshape(entry["shape"]).astype(np.float32)

    return StubWeights(
        task=manifest["task"],
        seed=manifest["seed"],
        fusion_hidden=manifest["fusion_hidden"],
        input_conv_w=tensor("input_conv_w"),
        input_conv_b=tensor("input_conv_b"),
        embed_w=tensor("embed_w"),
        embed_b=tensor("embed_b"),
        enc_w=tensor("enc_w"),
        enc_b=tensor("enc_b"),
        proj_w=tensor("proj_w"),
        proj_b=tensor("proj_b"),
        neck_conv1_w=tuple(tensor(f"neck_conv1_w_{i:02d}") for i in range(N_LAYERS)),
        neck_conv1_b=tuple(tensor(f"neck_conv1_b_{i:02d}") for i in range(N_LAYERS)),
        neck_conv3_w=tuple(tensor(f"neck_conv3_w_{i:02d}") for i in range(N_LAYERS)),
        neck_conv3_b=tuple(tensor(f"neck_conv3_b_{i:02d}") for i in range(N_LAYERS)),
        head_w1=tensor("head_w1"),
        head_b1=tensor("head_b1"),
        head_w2=tensor("head_w2"),
        head_b2=tensor("head_b2"),
    )
