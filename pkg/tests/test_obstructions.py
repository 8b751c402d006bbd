import numpy as np
import pytest
from numpy.testing import assert_array_equal

from radiomap import BuildingGrid, TxConfig, obstruction_channel, trace_wall_entries

from conftest import random_building
from oracles import dense_obstruction_map


def grid_from_wall(wall, trans_value=6.0):
    return BuildingGrid(
        reflectance=np.where(wall, 10.0, 0.0),
        transmittance=np.where(wall, trans_value, 0.0),
    )


def tx_at(r, c):
    return TxConfig(row=r, col=c, freq_mhz=868.0)


def test_all_air_is_zero():
    grid = grid_from_wall(np.zeros((16, 16), dtype=bool))
    assert_array_equal(obstruction_channel(grid, tx_at(7, 3)), np.zeros((16, 16), np.int32))


def test_single_wall_counts_once():
    wall = np.zeros((9, 15), dtype=bool)
    wall[:, 7] = True
    grid = grid_from_wall(wall)
    counts = obstruction_channel(grid, tx_at(4, 2))
    assert counts[4, 12] == 1
    assert counts[4, 12] == dense_obstruction_map(wall, (4, 2))[4, 12]


def test_two_parallel_walls():
    wall = np.zeros((9, 15), dtype=bool)
    wall[:, 5] = True
    wall[:, 9] = True
    grid = grid_from_wall(wall)
    counts = obstruction_channel(grid, tx_at(4, 2))
    assert counts[4, 13] == 2
    assert counts[4, 13] == dense_obstruction_map(wall, (4, 2))[4, 13]


def test_thick_wall_counts_once():
    wall = np.zeros((9, 15), dtype=bool)
    wall[:, 6:9] = True
    grid = grid_from_wall(wall)
    assert obstruction_channel(grid, tx_at(4, 2))[4, 13] == 1


def test_adjacent_pixel_no_walls():
    grid = grid_from_wall(np.zeros((8, 8), dtype=bool))
    assert obstruction_channel(grid, tx_at(3, 3))[3, 4] == 0


def test_tx_pixel_is_zero():
    wall = np.ones((8, 8), dtype=bool)
    wall[2, 2] = False
    grid = grid_from_wall(wall)
    assert obstruction_channel(grid, tx_at(2, 2))[2, 2] == 0


def test_tx_inside_wall_counts_exits_into_air_walls():
    wall = np.zeros((8, 8), dtype=bool)
    wall[4, 4] = True
    grid = grid_from_wall(wall)
    # starting cell is a wall: classified but no transition of its own
    counts = obstruction_channel(grid, tx_at(4, 4))
    assert counts[4, 4] == 0
    assert counts[4, 7] == 0


def test_matches_dense_oracle_on_random_grids():
    rng = np.random.default_rng(90210)
    for _ in range(20):
        grid = random_building(rng)
        tx = tx_at(int(rng.integers(0, 32)), int(rng.integers(0, 32)))
        expected = dense_obstruction_map(grid.wall_mask, tx.cell_in(grid))
        assert_array_equal(obstruction_channel(grid, tx), expected)


def test_fractional_tx_uses_containing_pixel():
    wall = np.zeros((9, 15), dtype=bool)
    wall[:, 7] = True
    grid = grid_from_wall(wall)
    counts = obstruction_channel(grid, TxConfig(row=4.3, col=2.4, freq_mhz=868.0))
    assert_array_equal(counts, obstruction_channel(grid, tx_at(4, 2)))


def test_isolated_wall_addition_never_decreases_counts():
    rng = np.random.default_rng(77)
    for _ in range(10):
        grid = random_building(rng, shape=(24, 24), p_wall=0.1)
        tx = tx_at(int(rng.integers(0, 24)), int(rng.integers(0, 24)))
        before = obstruction_channel(grid, tx)
        wall = grid.wall_mask.copy()
        # pick an air cell whose whole 8-neighborhood is air, away from tx
        candidates = [
            (r, c)
            for r in range(1, 23)
            for c in range(1, 23)
            if not wall[r - 1 : r + 2, c - 1 : c + 2].any() and (r, c) != tx.cell_in(grid)
        ]
        r, c = candidates[int(rng.integers(0, len(candidates)))]
        refl = grid.reflectance.copy()
        trans = grid.transmittance.copy()
        refl[r, c] = 10.0
        trans[r, c] = 6.0
        after = obstruction_channel(BuildingGrid(reflectance=refl, transmittance=trans), tx)
        assert (after >= before).all()


def test_wall_entry_loss_sums():
    wall = np.zeros((9, 15), dtype=bool)
    wall[:, 5] = True
    wall[:, 9] = True
    grid = grid_from_wall(wall, trans_value=6.0)
    counts, sums = trace_wall_entries(grid, tx_at(4, 2))
    assert counts[4, 13] == 2
    assert sums[4, 13] == pytest.approx(12.0)
    assert sums[4, 3] == 0.0
