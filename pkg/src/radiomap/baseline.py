"""Deterministic physics predictor used as a runnable reference model.

Single-ray model: free-space pathloss plus antenna gain plus one
penetration loss per wall entered along the line of sight.  Reflections
are ignored; the reflectance channel is not consumed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import MAX_PATHLOSS_DB, BuildingGrid, RadioMap, TxConfig
from .features import distance_channel, fspl_db, radiation_channel, trace_wall_entries


@dataclass(frozen=True)
class BaselineConfig:
    clamp_min: float = 0.0
    clamp_max: float = MAX_PATHLOSS_DB
    distance_mode: str = "slant"

    def __post_init__(self):
        if not self.clamp_min < self.clamp_max:
            raise ValueError(
                f"clamp_min ({self.clamp_min}) must be below clamp_max ({self.clamp_max})"
            )
        if self.distance_mode not in ("planar", "slant"):
            raise ValueError(f"distance_mode must be 'planar' or 'slant', got {self.distance_mode!r}")


def predict(grid: BuildingGrid, tx: TxConfig, cfg: BaselineConfig = BaselineConfig()) -> RadioMap:
    """PL(p) = clamp(FSPL(p) - gain(p) + sum of entered walls' transmittance).

    With planar distances the tx pixel has d = 0; its -inf FSPL clamps to
    clamp_min.
    """
    d = distance_channel(grid, tx, cfg.distance_mode)
    with np.errstate(divide="ignore"):
        pl = fspl_db(d, tx.freq_mhz)
    pl = pl - radiation_channel(grid, tx)
    _, wall_loss = trace_wall_entries(grid, tx)
    pl = pl + wall_loss
    return RadioMap(np.clip(pl, cfg.clamp_min, cfg.clamp_max))
