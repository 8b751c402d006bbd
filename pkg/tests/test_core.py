import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from PIL import Image

from radiomap import (
    AntennaPattern,
    BuildingGrid,
    DataError,
    FormatError,
    LengthError,
    RadioMap,
    SampleMeta,
    TxConfig,
    building_from_raster,
    building_to_raster,
    export_png,
    read_grid_file,
    read_pattern_file,
    synthetic_building,
    write_grid_file,
    write_pattern_file,
)


class TestGridFile:
    def test_round_trip_bit_exact(self, tmp_path):
        raster = np.array([[[1.5, 0.0], [-1.0, 3.25]]], dtype=np.float32)
        path = tmp_path / "a.rmg"
        write_grid_file(raster, path)
        back = read_grid_file(path)
        assert back.dtype == np.float32
        assert back.tobytes() == raster.tobytes()

    def test_round_trip_random(self, tmp_path):
        rng = np.random.default_rng(11)
        for i in range(30):
            c = int(rng.integers(1, 5))
            h = int(rng.integers(1, 40))
            w = int(rng.integers(1, 40))
            raster = rng.standard_normal((c, h, w)).astype(np.float32) * 1e3
            path = tmp_path / f"r{i}.rmg"
            write_grid_file(raster, path)
            assert_array_equal(read_grid_file(path), raster)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.rmg"
        path.write_bytes(b"XXXX" + b"\x00" * 20)
        with pytest.raises(FormatError):
            read_grid_file(path)

    def test_truncated(self, tmp_path):
        path = tmp_path / "t.rmg"
        write_grid_file(np.ones((1, 4, 4), dtype=np.float32), path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(LengthError):
            read_grid_file(path)

    def test_nonfinite_write(self, tmp_path):
        bad = np.ones((1, 2, 2))
        bad[0, 0, 0] = np.nan
        with pytest.raises(DataError):
            write_grid_file(bad, tmp_path / "nan.rmg")

    def test_nonfinite_read(self, tmp_path):
        path = tmp_path / "inf.rmg"
        write_grid_file(np.ones((1, 1, 1), dtype=np.float32), path)
        blob = bytearray(path.read_bytes())
        blob[16:20] = np.array([np.inf], dtype="<f4").tobytes()
        path.write_bytes(bytes(blob))
        with pytest.raises(DataError):
            read_grid_file(path)

    def test_zero_channels_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            write_grid_file(np.empty((0, 2, 2)), tmp_path / "z.rmg")

    def test_deterministic_bytes(self, tmp_path):
        raster = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
        write_grid_file(raster, tmp_path / "x.rmg")
        write_grid_file(raster, tmp_path / "y.rmg")
        assert (tmp_path / "x.rmg").read_bytes() == (tmp_path / "y.rmg").read_bytes()

    def test_file_size(self, tmp_path):
        path = tmp_path / "s.rmg"
        write_grid_file(np.zeros((2, 3, 4), dtype=np.float32), path)
        assert path.stat().st_size == 16 + 2 * 3 * 4 * 4 == 112


class TestExportPng:
    def test_endpoints_and_midpoint(self, tmp_path):
        chan = np.array([[10.0, 20.0], [15.0, 12.5]])
        path = tmp_path / "g.png"
        export_png(chan, path, vmin=10.0, vmax=20.0)
        pix = np.asarray(Image.open(path))
        assert pix.dtype == np.uint8
        assert pix[0, 0] == 0
        assert pix[0, 1] == 255
        assert pix[1, 0] == 128  # round half up

    def test_clamps_out_of_range(self, tmp_path):
        chan = np.array([[-5.0, 30.0]])
        path = tmp_path / "c.png"
        export_png(chan, path, vmin=0.0, vmax=10.0)
        pix = np.asarray(Image.open(path))
        assert pix[0, 0] == 0 and pix[0, 1] == 255

    def test_bad_range(self, tmp_path):
        with pytest.raises(ValueError):
            export_png(np.zeros((2, 2)), tmp_path / "x.png", vmin=1.0, vmax=1.0)


class TestPatternFile:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        pattern = AntennaPattern(rng.uniform(-30, 10, 360))
        path = tmp_path / "p.csv"
        write_pattern_file(pattern, path)
        back = read_pattern_file(path)
        assert_array_equal(back.gains_dbi, pattern.gains_dbi)

    def test_duplicate_angle(self, tmp_path):
        lines = [f"{d},0.0" for d in range(360)]
        lines[10] = "9,1.0"
        path = tmp_path / "dup.csv"
        path.write_text("\n".join(lines))
        with pytest.raises(FormatError):
            read_pattern_file(path)

    def test_missing_angle(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("\n".join(f"{d},0.0" for d in range(359)))
        with pytest.raises(FormatError):
            read_pattern_file(path)

    def test_garbled_line(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("not a pattern\n")
        with pytest.raises(FormatError):
            read_pattern_file(path)


class TestAntennaPattern:
    def test_isotropic_is_zero(self):
        assert_array_equal(AntennaPattern.isotropic().gains_dbi, np.zeros(360))

    def test_needs_360(self):
        with pytest.raises(ValueError):
            AntennaPattern(np.zeros(359))

    def test_linear_interpolation(self):
        gains = np.zeros(360)
        gains[45], gains[46] = 4.0, 6.0
        p = AntennaPattern(gains)
        assert p.gain_at(45.5) == pytest.approx(5.0)

    def test_wraparound(self):
        gains = np.zeros(360)
        gains[359], gains[0] = 2.0, 4.0
        p = AntennaPattern(gains)
        assert p.gain_at(359.5) == pytest.approx(3.0)
        assert p.gain_at(-0.5) == pytest.approx(3.0)


class TestBuildingGrid:
    def test_wall_iff_positive_channel(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            refl = np.where(rng.random((12, 9)) < 0.3, rng.uniform(1, 20, (12, 9)), 0.0)
            trans = np.where(rng.random((12, 9)) < 0.3, rng.uniform(1, 20, (12, 9)), 0.0)
            g = BuildingGrid(reflectance=refl, transmittance=trans)
            assert_array_equal(g.wall_mask, (refl > 0) | (trans > 0))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            BuildingGrid(reflectance=np.zeros((3, 3)), transmittance=np.zeros((3, 4)))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            BuildingGrid(reflectance=np.full((2, 2), -1.0), transmittance=np.zeros((2, 2)))

    def test_immutable(self):
        g = BuildingGrid(reflectance=np.zeros((2, 2)), transmittance=np.zeros((2, 2)))
        with pytest.raises(ValueError):
            g.reflectance[0, 0] = 1.0


class TestSmallTypes:
    def test_tx_validation(self):
        with pytest.raises(ValueError):
            TxConfig(row=0, col=0, freq_mhz=0.0)

    def test_tx_cell(self):
        g = BuildingGrid(reflectance=np.zeros((8, 8)), transmittance=np.zeros((8, 8)))
        assert TxConfig(row=3.2, col=4.6, freq_mhz=868).cell_in(g) == (3, 5)
        assert TxConfig(row=7.9, col=0.0, freq_mhz=868).cell_in(g) == (7, 0)

    def test_radio_map_finite_2d(self):
        with pytest.raises(ValueError):
            RadioMap(np.array([[np.inf]]))
        with pytest.raises(ValueError):
            RadioMap(np.zeros(4))

    def test_sample_meta(self):
        with pytest.raises(ValueError):
            SampleMeta(building_id=-1, antenna_id=0, freq_mhz=868, tx_index=0)
        with pytest.raises(ValueError):
            SampleMeta(building_id=1, antenna_id=0, freq_mhz=868, tx_index=0, split="dev")


def test_building_raster_round_trip():
    grid = synthetic_building()
    back = building_from_raster(building_to_raster(grid))
    assert_allclose(back.reflectance, grid.reflectance)
    assert_allclose(back.transmittance, grid.transmittance)


def test_synthetic_building_deterministic():
    a, b = synthetic_building(), synthetic_building()
    assert_array_equal(a.reflectance, b.reflectance)
    assert a.wall_mask.any() and not a.wall_mask.all()
