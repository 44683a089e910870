import struct

import numpy as np
import pytest

from wavemamba import hsi_io
from wavemamba.errors import BadMagic, DimMismatch, IoFailure, MissingPaletteEntry, NonFinite
from wavemamba.hsi_io import HsiCube, LabelMap


def test_smallest_cube_round_trip(tmp_path):
    path = tmp_path / "one.hsic"
    hsi_io.write_cube(HsiCube(np.array([[[2.5]]])), path)
    cube = hsi_io.load_cube(path)
    assert (cube.height, cube.width, cube.bands) == (1, 1, 1)
    assert cube.data[0, 0, 0] == 2.5


def test_single_value_file_size(tmp_path):
    path = tmp_path / "zero.hsic"
    hsi_io.write_cube(HsiCube(np.zeros((1, 1, 1))), path)
    assert path.stat().st_size == 20  # 16-byte header + 4-byte payload


def test_cube_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(7)
    # float32 on disk: round-trip values through f32 first
    data = rng.normal(size=(4, 5, 6)).astype(np.float32).astype(np.float64)
    path = tmp_path / "cube.hsic"
    hsi_io.write_cube(HsiCube(data), path)
    loaded = hsi_io.load_cube(path)
    assert np.array_equal(loaded.data, data)


def test_load_cube_bad_magic(tmp_path):
    path = tmp_path / "bad.hsic"
    path.write_bytes(b"NOPE" + b"\0" * 16)
    with pytest.raises(BadMagic):
        hsi_io.load_cube(path)


def test_load_cube_dim_mismatch(tmp_path):
    path = tmp_path / "short.hsic"
    payload = struct.pack("<11f", *range(11))
    path.write_bytes(b"HSIC" + struct.pack("<III", 2, 2, 3) + payload)
    with pytest.raises(DimMismatch):
        hsi_io.load_cube(path)


def test_load_cube_non_finite(tmp_path):
    path = tmp_path / "nan.hsic"
    path.write_bytes(b"HSIC" + struct.pack("<III", 1, 1, 1) + struct.pack("<f", np.nan))
    with pytest.raises(NonFinite):
        hsi_io.load_cube(path)


def test_write_cube_unwritable_path():
    with pytest.raises(IoFailure):
        hsi_io.write_cube(HsiCube(np.zeros((1, 1, 1))), "/nonexistent-dir/x.hsic")


def test_labels_num_classes(tmp_path):
    path = tmp_path / "l.hsil"
    hsi_io.write_labels(LabelMap(np.array([[0, 1], [1, 2]])), path)
    labels = hsi_io.load_labels(path)
    assert labels.num_classes == 2
    assert np.array_equal(labels.labels, [[0, 1], [1, 2]])


def test_labels_all_zero(tmp_path):
    path = tmp_path / "z.hsil"
    hsi_io.write_labels(LabelMap(np.zeros((3, 2), dtype=np.uint16)), path)
    assert hsi_io.load_labels(path).num_classes == 0


def test_labels_round_trip_random(tmp_path):
    rng = np.random.default_rng(3)
    labels = rng.integers(0, 9, size=(7, 5)).astype(np.uint16)
    path = tmp_path / "r.hsil"
    hsi_io.write_labels(LabelMap(labels), path)
    assert np.array_equal(hsi_io.load_labels(path).labels, labels)


def test_labels_bad_magic(tmp_path):
    path = tmp_path / "bad.hsil"
    path.write_bytes(b"HSIC" + struct.pack("<II", 1, 1) + b"\0\0")
    with pytest.raises(BadMagic):
        hsi_io.load_labels(path)


def test_render_single_red_pixel(tmp_path):
    path = tmp_path / "map.ppm"
    palette = {0: (0, 0, 0), 1: (255, 0, 0)}
    hsi_io.render_map(LabelMap(np.array([[1]])), palette, path)
    raw = path.read_bytes()
    assert raw.startswith(b"P6\n1 1\n255\n")
    assert raw[-3:] == bytes([255, 0, 0])


def test_render_missing_palette_entry(tmp_path):
    palette = {0: (0, 0, 0), 1: (255, 0, 0)}
    with pytest.raises(MissingPaletteEntry):
        hsi_io.render_map(LabelMap(np.array([[3]])), palette, tmp_path / "x.ppm")


def test_render_pixel_oracle(tmp_path):
    rng = np.random.default_rng(9)
    labels = rng.integers(0, 4, size=(6, 4)).astype(np.uint16)
    palette = hsi_io.default_palette(3)
    path = tmp_path / "map.ppm"
    hsi_io.render_map(LabelMap(labels), palette, path)
    raw = path.read_bytes()
    header = f"P6\n4 6\n255\n".encode()
    assert raw.startswith(header)
    body = raw[len(header):]
    assert len(body) == 3 * labels.size
    pixels = np.frombuffer(body, dtype=np.uint8).reshape(6, 4, 3)
    for (r, c), lab in np.ndenumerate(labels):
        assert tuple(pixels[r, c]) == palette[int(lab)]
