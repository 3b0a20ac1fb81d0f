import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indoor_noma.layout import GridSpec, build_layout
from indoor_noma.radiomap import (
    OUTSIDE_SENTINEL_DB,
    ApConfig,
    MapFormatError,
    PowerMap,
    SinrMap,
    build_power_map,
    build_sinr_map,
    export_map,
    import_map,
    occlusion_counts,
)
from indoor_noma.units import noise_power_dbm

from . import oracles

GRID = GridSpec(8, 5, 0.5)
NOISE = noise_power_dbm(-100.0, 15_000.0)
RX = 0.5


def room():
    # partition across x = 2.0 .. 2.5 leaving the top row open
    return build_layout(GRID, [(4, iy, 0.0, 2.5) for iy in range(4)])


SERVING = ApConfig("ap", (0.5, 1.0, 2.0), 20.0)
OUTDOOR = ApConfig("out", (3.5, 1.0, 2.0), -5.0, role="interferer")


def test_power_map_matches_direct_evaluation():
    lay = room()
    pm = build_power_map(lay, SERVING, RX)
    for ix, iy in [(0, 0), (1, 2), (6, 1), (7, 4)]:
        x, y = GRID.cell_center(ix, iy)
        d = float(np.sqrt((x - 0.5) ** 2 + (y - 1.0) ** 2 + 1.5**2))
        n = sum(
            oracles.sampled_segment_hit((0.5, 1.0, 2.0), (x, y, RX), lo, hi)[0]
            for lo, hi in zip(*lay.boxes)
        )
        loss = oracles.los_loss(d) if n == 0 else oracles.nlos_loss(d, n)
        assert pm.values[ix, iy] == pytest.approx(20.0 - loss, abs=1e-9)


def test_occlusion_counts_see_the_partition():
    n = occlusion_counts(room(), SERVING, RX)
    assert n[1, 1] == 0
    assert n[6, 1] >= 1


def test_power_map_is_deterministic():
    a = build_power_map(room(), SERVING, RX).values
    b = build_power_map(room(), SERVING, RX).values
    assert np.array_equal(a, b)


def test_sinr_without_interferers_is_snr():
    pm = build_power_map(build_layout(GRID, []), SERVING, RX)
    sinr = build_sinr_map(pm, [], NOISE)
    assert np.array_equal(sinr.values, pm.values - NOISE)
    assert NOISE == pytest.approx(-58.239, abs=1e-3)


def test_sinr_matches_linear_sum():
    lay = room()
    s = build_power_map(lay, SERVING, RX)
    i = build_power_map(lay, OUTDOOR, RX)
    sinr = build_sinr_map(s, [i], NOISE)
    ix, iy = 3, 2
    denom = 10 ** (i.values[ix, iy] / 10) + 10 ** (NOISE / 10)
    assert sinr.values[ix, iy] == pytest.approx(s.values[ix, iy] - 10 * np.log10(denom), abs=1e-9)


def test_negligible_interferer_leaves_sinr_unchanged():
    lay = room()
    s = build_power_map(lay, SERVING, RX)
    ghost = PowerMap(GRID, RX, np.full((8, 5), -1e6))
    base = build_sinr_map(s, [], NOISE).values
    assert np.max(np.abs(build_sinr_map(s, [ghost], NOISE).values - base)) < 1e-9


def test_removing_an_interferer_never_lowers_sinr():
    lay = room()
    s = build_power_map(lay, SERVING, RX)
    i = build_power_map(lay, OUTDOOR, RX)
    assert np.all(build_sinr_map(s, [], NOISE).values >= build_sinr_map(s, [i], NOISE).values)


def test_sinr_rejects_grid_mismatch():
    s = build_power_map(room(), SERVING, RX)
    other = PowerMap(GridSpec(5, 8, 0.5), RX, np.zeros((5, 8)))
    with pytest.raises(ValueError, match="interferer map #0"):
        build_sinr_map(s, [other], NOISE)


def test_lookup_outside_room_returns_sentinel():
    m = SinrMap(GRID, RX, np.zeros((8, 5)))
    assert m.at(-0.1, 1.0) == OUTSIDE_SENTINEL_DB
    assert m.at(1.0, 2.6) == OUTSIDE_SENTINEL_DB
    assert m.at(0.1, 0.1) == 0.0


def test_ap_config_validation():
    with pytest.raises(ValueError):
        ApConfig("x", (0, 0, 1), 20.0, role="relay")
    with pytest.raises(ValueError):
        ApConfig("x", (0, 0, 1), float("nan"))
    with pytest.raises(ValueError):
        build_power_map(room(), ApConfig("x", (float("inf"), 0, 1), 20.0), RX)


# -- CSV ----------------------------------------------------------------------

def test_export_layout_and_round_trip(tmp_path):
    pm = build_power_map(room(), SERVING, RX)
    path = tmp_path / "p.csv"
    export_map(pm, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "# grid 8 5 0.5 0.0 0.0 0.5"
    assert len(lines) == 6 and all(len(r.split(",")) == 8 for r in lines[1:])
    back = import_map(path, PowerMap, expected_grid=GRID)
    assert isinstance(back, PowerMap)
    assert np.max(np.abs(back.values - pm.values)) <= 5e-7
    assert back.rx_height == RX


@settings(max_examples=30, deadline=None)
@given(vals=st.lists(st.floats(-200, 100), min_size=40, max_size=40))
def test_round_trip_within_print_precision(vals, tmp_path_factory):
    m = SinrMap(GRID, RX, np.array(vals).reshape(8, 5))
    path = tmp_path_factory.mktemp("rt") / "m.csv"
    export_map(m, path)
    assert np.max(np.abs(import_map(path, SinrMap).values - m.values)) <= 5e-7


def test_paper_sized_grid_file_shape(tmp_path):
    g = GridSpec(110, 60, 0.5)
    path = tmp_path / "big.csv"
    export_map(SinrMap(g, RX, np.zeros((110, 60))), path)
    rows = path.read_text().splitlines()[1:]
    assert len(rows) == 60 and all(len(r.split(",")) == 110 for r in rows)


@pytest.mark.parametrize(
    "body, line",
    [
        ("", 1),
        ("# map 8 5 0.5 0 0 0.5\n", 1),
        ("# grid 8 x 0.5 0 0 0.5\n", 1),
        ("# grid 2 2 0.5 0 0 0.5\n1,2\n", 3),
        ("# grid 2 2 0.5 0 0 0.5\n1,2\n3\n", 3),
        ("# grid 2 2 0.5 0 0 0.5\n1,2\n3,abc\n", 3),
    ],
)
def test_import_errors_name_the_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(MapFormatError, match=f"line {line}"):
        import_map(path)


def test_import_rejects_unexpected_grid(tmp_path):
    path = tmp_path / "m.csv"
    export_map(SinrMap(GRID, RX, np.zeros((8, 5))), path)
    with pytest.raises(MapFormatError, match="does not match"):
        import_map(path, SinrMap, expected_grid=GridSpec(8, 5, 0.25))
