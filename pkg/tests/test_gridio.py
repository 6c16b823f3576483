"""Binary grid/snapshot records and deterministic text artifacts."""

import struct

import numpy as np
import pytest

from nullwave import gridio
from nullwave.errors import FormatError
from nullwave.exterior import Obstacle, build_masked_grid, build_radial_grid


def _radial():
    return build_radial_grid(1.0, 48.0, 2000, angular_mode=1,
                             sponge_cells=170, sponge_strength=4.0)


def _cartesian():
    return build_masked_grid(Obstacle.ellipsoid(1.0, 0.5, 0.75), 12.0, 24,
                             sponge_cells=8, sponge_strength=2.5)


# ---------------------------------------------------------------------------
# round trips


def test_radial_grid_round_trip(tmp_path):
    path = tmp_path / "grid.nwb"
    grid = _radial()
    gridio.write_grid(path, grid)
    back = gridio.read_grid(path)
    assert back.kind == "radial"
    assert back.r0 == grid.r0 and back.r_max == grid.r_max
    assert back.n == grid.n
    assert back.angular_mode == grid.angular_mode
    assert back.sponge_cells == grid.sponge_cells
    assert back.sponge_strength == grid.sponge_strength
    assert np.array_equal(back.r, grid.r)


def test_cartesian_grid_round_trip(tmp_path):
    path = tmp_path / "grid.nwb"
    grid = _cartesian()
    gridio.write_grid(path, grid)
    back = gridio.read_grid(path)
    assert back.kind == "cartesian"
    assert back.L == grid.L and back.n == grid.n
    assert back.obstacle.kind == "ellipsoid"
    assert back.obstacle.params == grid.obstacle.params
    assert np.array_equal(back.mask, grid.mask)
    assert back.sponge_cells == grid.sponge_cells


def test_snapshot_round_trip(tmp_path):
    path = tmp_path / "s.nwb"
    grid = build_radial_grid(1.0, 6.0, 100)
    rng = np.random.default_rng(42)
    u = rng.standard_normal(grid.n_nodes)
    v = rng.standard_normal(grid.n_nodes)
    gridio.write_snapshot(path, grid, 12.5, {"u": u, "v": v})
    back_grid, t, fields = gridio.read_snapshot(path)
    assert back_grid.kind == "radial" and back_grid.n == 100
    assert t == 12.5
    assert set(fields) == {"u", "v"}
    assert np.array_equal(fields["u"], u)
    assert np.array_equal(fields["v"], v)


def test_snapshot_multidim_field(tmp_path):
    path = tmp_path / "s.nwb"
    grid = _cartesian()
    field = grid.coords()[..., 0]
    gridio.write_snapshot(path, grid, 0.0, {"x": field})
    _, _, fields = gridio.read_snapshot(path)
    assert fields["x"].shape == field.shape
    assert np.array_equal(fields["x"], field)


def test_write_is_byte_deterministic(tmp_path):
    p1, p2 = tmp_path / "a.nwb", tmp_path / "b.nwb"
    gridio.write_grid(p1, _radial())
    gridio.write_grid(p2, _radial())
    assert p1.read_bytes() == p2.read_bytes()


# ---------------------------------------------------------------------------
# malformed records


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.nwb"
    path.write_bytes(b"WAVE" + b"\x00" * 40)
    with pytest.raises(FormatError):
        gridio.read_grid(path)


def test_bad_version(tmp_path):
    path = tmp_path / "bad.nwb"
    path.write_bytes(gridio.MAGIC + struct.pack("<HH", 9, gridio.KIND_RADIAL)
                     + b"\x00" * 40)
    with pytest.raises(FormatError):
        gridio.read_grid(path)


def test_unknown_kind(tmp_path):
    path = tmp_path / "bad.nwb"
    path.write_bytes(gridio.MAGIC + struct.pack("<HH", gridio.VERSION, 77)
                     + b"\x00" * 40)
    with pytest.raises(FormatError):
        gridio.read_grid(path)


def test_kind_mismatch_between_readers(tmp_path):
    gpath = tmp_path / "g.nwb"
    spath = tmp_path / "s.nwb"
    grid = build_radial_grid(1.0, 6.0, 100)
    gridio.write_grid(gpath, grid)
    gridio.write_snapshot(spath, grid, 1.0, {"u": grid.zeros()})
    with pytest.raises(FormatError):
        gridio.read_snapshot(gpath)
    with pytest.raises(FormatError):
        gridio.read_grid(spath)


def test_truncation_reports_offset(tmp_path):
    path = tmp_path / "t.nwb"
    grid = _cartesian()
    gridio.write_grid(path, grid)
    whole = path.read_bytes()
    path.write_bytes(whole[: len(whole) // 2])
    with pytest.raises(FormatError, match="offset"):
        gridio.read_grid(path)


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "t.nwb"
    gridio.write_grid(path, build_radial_grid(1.0, 6.0, 100))
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        gridio.read_grid(path)


def test_unknown_obstacle_code(tmp_path):
    path = tmp_path / "t.nwb"
    grid = _cartesian()
    gridio.write_grid(path, grid)
    raw = bytearray(path.read_bytes())
    # obstacle code byte sits after header (8) + L, n, sponge, strength
    off = 8 + struct.calcsize("<dIId")
    assert raw[off] == 2
    raw[off] = 9
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError, match="obstacle"):
        gridio.read_grid(path)


# ---------------------------------------------------------------------------
# text artifacts


def test_format_float_round_trips():
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = float(rng.standard_normal() * 10.0 ** rng.integers(-12, 12))
        assert float(gridio.format_float(x)) == x
    assert gridio.format_float(0.5) == "0.5"
    assert gridio.format_float(np.float64(2.0)) == "2.0"


def test_write_csv_cells(tmp_path):
    path = tmp_path / "t.csv"
    gridio.write_csv(path, ["a", "b", "c", "d", "e"],
                     [[1, 0.5, None, True, "x"],
                      [np.int64(2), np.float64(0.1), None, False, "y"]])
    text = path.read_text()
    assert text == ("a,b,c,d,e\n"
                    "1,0.5,,true,x\n"
                    "2,0.1,,false,y\n")


def test_write_csv_deterministic(tmp_path):
    rows = [[i, np.sqrt(i + 0.1)] for i in range(20)]
    p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
    gridio.write_csv(p1, ["i", "v"], rows)
    gridio.write_csv(p2, ["i", "v"], rows)
    assert p1.read_bytes() == p2.read_bytes()


def test_write_json_sorted_and_typed(tmp_path):
    path = tmp_path / "t.json"
    gridio.write_json(path, {"b": np.float64(1.5), "a": np.int32(2),
                             "c": {"z": np.bool_(True),
                                   "arr": np.arange(3)}})
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert text.endswith("\n")
    import json
    back = json.loads(text)
    assert back == {"a": 2, "b": 1.5, "c": {"z": True, "arr": [0, 1, 2]}}


def test_write_json_rejects_unknown_types(tmp_path):
    with pytest.raises(TypeError):
        gridio.write_json(tmp_path / "t.json", {"x": object()})
