import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from radiomap import (
    BuildingGrid,
    RadioMap,
    TxConfig,
    build_stack,
    normalize,
    pad_and_resize,
)


def random_building(rng: np.random.Generator, shape=(32, 32), p_wall=0.15) -> BuildingGrid:
    wall = rng.random(shape) < p_wall
    return BuildingGrid(
        reflectance=np.where(wall, 10.0, 0.0),
        transmittance=np.where(wall, 6.0, 0.0),
    )


def make_pair(seed: int = 0, channels=("reflectance", "transmittance", "distance")):
    """A normalized, padded 518x518 stack and a matching target map."""
    rng = np.random.default_rng(seed)
    grid = random_building(rng, shape=(100, 130), p_wall=0.1)
    tx = TxConfig(row=50, col=60, freq_mhz=868.0)
    stack = normalize(build_stack(grid, tx, channels=channels))
    target = RadioMap(rng.uniform(20.0, 150.0, size=(100, 130)))
    return pad_and_resize(stack, target=target)


@pytest.fixture(scope="session")
def pair518():
    return make_pair(seed=42)
