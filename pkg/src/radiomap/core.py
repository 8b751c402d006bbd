"""Domain types, physical constants, and raster file I/O.

Everything downstream (feature channels, augmentation, the physics
baseline, evaluation) works on the types defined here.  All types are
immutable after construction; array fields are locked read-only so
instances can be shared freely across threads.

Grid File Format ("RMG1")
-------------------------
A lossless little-endian float raster container:

=======  ====================================================
bytes    content
=======  ====================================================
0-3      ASCII magic ``RMG1``
4-7      uint32 LE channel count C (>= 1)
8-11     uint32 LE height H
12-15    uint32 LE width W
16-      C*H*W IEEE-754 float32 LE, channel-major, row-major
=======  ====================================================

PNG output is export-only; 8-bit images cannot represent the value
ranges losslessly.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

#: Side length of one grid cell in meters.
PIXEL_SIZE_M = 0.25

#: Default transmitter height above the floor in meters.
TX_HEIGHT_M = 1.5

#: Upper bound of the prediction range in dB (sigmoid head scale).
MAX_PATHLOSS_DB = 160.0

#: Fill value used when padding inputs and targets (0 is meaningful data).
PAD_VALUE = -1.0

GRID_MAGIC = b"RMG1"
FORMAT_VERSION = "RMG1"

_HEADER = struct.Struct("<III")


class GridFileError(Exception):
    """Base class for grid-file I/O problems."""


class FormatError(GridFileError):
    """File is not a grid file (bad magic or malformed header)."""


class LengthError(GridFileError):
    """Payload is shorter or longer than the header promises."""


class DataError(GridFileError):
    """Values that the format cannot represent (NaN or infinity)."""


def _lock(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AntennaPattern:
    """Azimuthal antenna gain sampled at integer degrees 0..359.

    ``gain_at`` interpolates linearly between samples, wrapping between
    359 and 0 degrees.  The isotropic pattern is the all-zeros vector.
    """

    gains_dbi: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains_dbi, dtype=np.float64)
        if g.shape != (360,):
            raise ValueError(f"pattern needs exactly 360 gains, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("pattern gains must be finite")
        object.__setattr__(self, "gains_dbi", _lock(g))

    @classmethod
    def isotropic(cls) -> "AntennaPattern":
        return cls(np.zeros(360))

    def gain_at(self, theta_deg) -> np.ndarray:
        """Gain in dBi at azimuth ``theta_deg`` (any real, degrees)."""
        t = np.asarray(theta_deg, dtype=np.float64) % 360.0
        i0 = np.floor(t).astype(np.intp)
        i1 = (i0 + 1) % 360
        frac = t - i0
        g = self.gains_dbi
        return g[i0] + frac * (g[i1] - g[i0])


@dataclass(frozen=True)
class BuildingGrid:
    """Paired reflectance/transmittance rasters defining walls.

    Channel values are per-interaction dB magnitudes; 0 denotes air.
    A pixel is a wall iff either channel is positive.
    """

    reflectance: np.ndarray
    transmittance: np.ndarray
    pixel_size_m: float = PIXEL_SIZE_M

    def __post_init__(self):
        r = np.asarray(self.reflectance, dtype=np.float64)
        t = np.asarray(self.transmittance, dtype=np.float64)
        if r.ndim != 2 or r.shape != t.shape:
            raise ValueError(
                f"reflectance {r.shape} and transmittance {t.shape} must be equal 2-D shapes"
            )
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(t))):
            raise ValueError("material values must be finite")
        if (r < 0).any() or (t < 0).any():
            raise ValueError("material values must be non-negative")
        if self.pixel_size_m <= 0:
            raise ValueError("pixel_size_m must be positive")
        object.__setattr__(self, "reflectance", _lock(r))
        object.__setattr__(self, "transmittance", _lock(t))

    @property
    def height(self) -> int:
        return self.reflectance.shape[0]

    @property
    def width(self) -> int:
        return self.reflectance.shape[1]

    @property
    def wall_mask(self) -> np.ndarray:
        """Boolean H x W mask; True where the pixel is a wall."""
        return (self.reflectance > 0) | (self.transmittance > 0)


@dataclass(frozen=True)
class TxConfig:
    """Transmitter placement and radio configuration.

    ``row``/``col`` are fractional pixel coordinates; ``cell_in`` gives
    the integer pixel containing the transmitter.
    """

    row: float
    col: float
    freq_mhz: float
    height_m: float = TX_HEIGHT_M
    pattern: AntennaPattern = field(default_factory=AntennaPattern.isotropic)
    orientation_deg: float = 0.0

    def __post_init__(self):
        if not self.freq_mhz > 0:
            raise ValueError(f"freq_mhz must be positive, got {self.freq_mhz}")

    def cell_in(self, grid: BuildingGrid) -> tuple[int, int]:
        """Integer pixel containing the transmitter, clipped to the grid."""
        r = min(int(np.floor(self.row + 0.5)), grid.height - 1)
        c = min(int(np.floor(self.col + 0.5)), grid.width - 1)
        return r, c


@dataclass(frozen=True)
class RadioMap:
    """A single-channel pathloss raster in dB."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError(f"radio map must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("radio map values must be finite")
        object.__setattr__(self, "values", _lock(v))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


_SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class SampleMeta:
    """Identity of one radio-map sample inside a dataset."""

    building_id: int
    antenna_id: int
    freq_mhz: float
    tx_index: int
    split: str = "train"

    def __post_init__(self):
        if self.building_id < 0 or self.antenna_id < 0 or self.tx_index < 0:
            raise ValueError("ids must be non-negative")
        if self.split not in _SPLITS:
            raise ValueError(f"split must be one of {_SPLITS}, got {self.split!r}")


# ---------------------------------------------------------------------------
# Grid File Format I/O


def write_grid_file(raster, path) -> None:
    """Write a C x H x W raster as an RMG1 file.

    Deterministic: identical input produces byte-identical files.
    """
    a = np.asarray(raster)
    if a.ndim != 3:
        raise ValueError(f"raster must be C x H x W, got shape {a.shape}")
    c, h, w = a.shape
    if c < 1:
        raise ValueError("raster needs at least one channel")
    if not np.all(np.isfinite(a)):
        raise DataError("raster contains non-finite values")
    payload = np.ascontiguousarray(a, dtype="<f4").tobytes()
    Path(path).write_bytes(GRID_MAGIC + _HEADER.pack(c, h, w) + payload)


def read_grid_file(path) -> np.ndarray:
    """Read an RMG1 file back into a float32 C x H x W array.

    Round-trips bit-exactly with :func:`write_grid_file`.
    """
    blob = Path(path).read_bytes()
    if len(blob) < 16 or blob[:4] != GRID_MAGIC:
        raise FormatError(f"{path}: not an RMG1 grid file")
    c, h, w = _HEADER.unpack_from(blob, 4)
    if c < 1:
        raise FormatError(f"{path}: channel count must be >= 1, got {c}")
    expected = 16 + 4 * c * h * w
    if len(blob) != expected:
        raise LengthError(f"{path}: expected {expected} bytes, found {len(blob)}")
    a = np.frombuffer(blob, dtype="<f4", offset=16).reshape(c, h, w)
    if not np.all(np.isfinite(a)):
        raise DataError(f"{path}: payload contains non-finite values")
    return a.copy()


def export_png(raster_channel, path, vmin: float, vmax: float) -> None:
    """Export one channel as an 8-bit grayscale PNG.

    Value v maps to round(255 * clamp((v - vmin) / (vmax - vmin), 0, 1)),
    rounding halves up.
    """
    if not vmin < vmax:
        raise ValueError(f"vmin ({vmin}) must be below vmax ({vmax})")
    a = np.asarray(raster_channel, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"channel must be 2-D, got shape {a.shape}")
    scaled = np.clip((a - vmin) / (vmax - vmin), 0.0, 1.0)
    pix = np.floor(255.0 * scaled + 0.5).astype(np.uint8)
    Image.fromarray(pix, mode="L").save(path)


# ---------------------------------------------------------------------------
# Antenna pattern files: 360 lines of "angle_deg,gain_dbi", each angle once.


def write_pattern_file(pattern: AntennaPattern, path) -> None:
    lines = [f"{deg},{gain:.17g}" for deg, gain in enumerate(pattern.gains_dbi)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_pattern_file(path) -> AntennaPattern:
    gains = np.full(360, np.nan)
    seen = np.zeros(360, dtype=bool)
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            angle_s, gain_s = line.split(",")
            angle, gain = int(angle_s), float(gain_s)
        except ValueError as exc:
            raise FormatError(f"{path}:{ln}: expected 'angle_deg,gain_dbi'") from exc
        if not 0 <= angle < 360:
            raise FormatError(f"{path}:{ln}: angle {angle} outside 0..359")
        if seen[angle]:
            raise FormatError(f"{path}:{ln}: duplicate angle {angle}")
        seen[angle] = True
        gains[angle] = gain
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise FormatError(f"{path}: missing angle {missing}")
    if not np.all(np.isfinite(gains)):
        raise DataError(f"{path}: gains must be finite")
    return AntennaPattern(gains)


# ---------------------------------------------------------------------------
# Building <-> raster helpers and a bundled synthetic layout.


def building_to_raster(grid: BuildingGrid) -> np.ndarray:
    """2-channel raster (reflectance, transmittance) for file storage."""
    return np.stack([grid.reflectance, grid.transmittance]).astype(np.float32)


def building_from_raster(raster: np.ndarray) -> BuildingGrid:
    a = np.asarray(raster)
    if a.ndim != 3 or a.shape[0] != 2:
        raise ValueError(f"building raster must be 2 x H x W, got shape {a.shape}")
    return BuildingGrid(reflectance=a[0], transmittance=a[1])


def synthetic_building(height: int = 48, width: int = 64) -> BuildingGrid:
    """Deterministic small layout used by the demos and smoke tests.

    Outer walls plus two interior partitions with door gaps; reflectance
    10 dB and transmittance 6 dB on every wall pixel.
    """
    refl = np.zeros((height, width))
    trans = np.zeros((height, width))

    def wall(rows, cols):
        refl[rows, cols] = 10.0
        trans[rows, cols] = 6.0

    wall(0, slice(None))
    wall(height - 1, slice(None))
    wall(slice(None), 0)
    wall(slice(None), width - 1)
    # vertical partition with a door gap
    mid_c = width // 2
    wall(slice(1, height // 2 - 3), mid_c)
    wall(slice(height // 2 + 3, height - 1), mid_c)
    # horizontal partition in the left half, also with a gap
    mid_r = height // 2
    wall(mid_r, slice(1, width // 4))
    wall(mid_r, slice(width // 4 + 5, mid_c))
    return BuildingGrid(reflectance=refl, transmittance=trans)
