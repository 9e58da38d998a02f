import datetime as dt
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wildfire_psps.errors import BoundsError, GeometryError, RasterFormatError, ValidationError
from wildfire_psps.network import Line
from wildfire_psps.oracle import sampled_cells
from wildfire_psps.raster import (
    GridGeometry,
    PixelRef,
    RiskRaster,
    load_raster,
    load_raster_dir,
    pixel_risks,
    raster_filename,
    stack_rasters,
    trace_line,
    write_raster,
)

GRID = GridGeometry(10, 10, 0.0, 0.0, 1.0)

ASC = """ncols 3
nrows 2
xllcorner 0
yllcorner 0
cellsize 1
NODATA_value -9999
1 2 3
4 -9999 6
"""


def seg(p0, p1, lid=1):
    return Line(lid, 1, 2, -10.0, 1.0, -0.5, 0.5, (p0, p1))


def cells(p0, p1, grid=GRID):
    return set(trace_line(seg(p0, p1), grid).pixels)


def test_parse_small_grid(tmp_path):
    p = tmp_path / "wfpi_2020-10-26.asc"
    p.write_text(ASC)
    r = load_raster(p)
    assert r.day == dt.date(2020, 10, 26)
    assert (r.n_cols, r.n_rows) == (3, 2)
    assert r.value(PixelRef(0, 0)) == 1.0  # top-left
    assert r.value(PixelRef(1, 1)) is None
    assert r.value(PixelRef(2, 1)) == 6.0


def test_roundtrip(tmp_path):
    vals = np.array([[1.0, np.nan], [2.5, 0.0]])
    r = RiskRaster(dt.date(2020, 1, 1), 2, 2, 10.0, 20.0, 0.5, vals)
    write_raster(r, tmp_path / "x.asc")
    back = load_raster(tmp_path / "x.asc", r.day)
    np.testing.assert_array_equal(back.values, vals)
    assert back.geometry == r.geometry


@pytest.mark.parametrize(
    "text, exc, match",
    [
        (ASC.replace("ncols 3\n", ""), RasterFormatError, "ncols"),
        (ASC.replace("4 -9999 6", "4 -9999"), RasterFormatError, "row 1"),
        (ASC.replace("4 -9999 6", "4 x 6"), RasterFormatError, "row 1, col 1"),
        (ASC.replace("4 -9999 6", "4 -5 6"), ValidationError, "row 1, col 1"),
        (ASC.replace("nrows 2", "nrows 3"), RasterFormatError, "3 rows"),
    ],
)
def test_parse_errors(tmp_path, text, exc, match):
    p = tmp_path / "bad.asc"
    p.write_text(text)
    with pytest.raises(exc, match=match):
        load_raster(p)


def test_missing_day_is_named(tmp_path):
    (tmp_path / raster_filename(dt.date(2020, 1, 1))).write_text(ASC)
    with pytest.raises(RasterFormatError, match="2020-01-02"):
        load_raster_dir(tmp_path, [dt.date(2020, 1, 1), dt.date(2020, 1, 2)])


def test_horizontal_segment_inside_row():
    got = cells((0.5, 0.5), (3.5, 0.5))
    assert got == {PixelRef(c, 9) for c in range(4)}


def test_diagonal_through_corners_includes_corner_neighbours():
    got = cells((0.5, 0.5), (2.5, 2.5))
    # the segment passes exactly through lattice points (1,1) and (2,2)
    want = {(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1)}
    assert got == {PixelRef(c, 9 - v) for c, v in want}


def test_segment_along_grid_line_touches_both_sides():
    got = cells((1.0, 0.5), (1.0, 2.5))
    assert got == {PixelRef(c, 9 - v) for c in (0, 1) for v in (0, 1, 2)}


def test_degenerate_point_on_corner():
    net_line = Line(1, 1, 2, -10.0, 1.0, -0.5, 0.5, ((2.0, 2.0), (2.0, 2.0), (2.5, 2.5)))
    got = set(trace_line(net_line, GRID).pixels)
    assert {PixelRef(1, 8), PixelRef(2, 8), PixelRef(1, 7), PixelRef(2, 7)} <= got


def test_out_of_bounds_vertex():
    with pytest.raises(BoundsError, match="vertex 1"):
        trace_line(seg((1, 1), (11, 1)), GRID)


def test_polyline_dedupes_in_visit_order():
    ln = Line(1, 1, 2, -10.0, 1.0, -0.5, 0.5, ((0.5, 0.5), (2.5, 0.5), (0.5, 0.5)))
    got = trace_line(ln, GRID).pixels
    assert list(got) == [PixelRef(0, 9), PixelRef(1, 9), PixelRef(2, 9)]


def test_pixel_risks_skips_nodata():
    vals = np.full((10, 10), 5.0)
    vals[9, 1] = np.nan
    r = RiskRaster(None, 10, 10, 0.0, 0.0, 1.0, vals)
    values, count = pixel_risks(trace_line(seg((0.5, 0.5), (3.5, 0.5)), r), r)
    assert values == [5.0, 5.0, 5.0] and count == 3


def test_pixel_risks_grid_mismatch():
    r = RiskRaster(None, 10, 10, 0.0, 0.0, 2.0, np.zeros((10, 10)))
    with pytest.raises(GeometryError):
        pixel_risks(trace_line(seg((0.5, 0.5), (3.5, 0.5)), GRID), r)


def test_stack_requires_common_grid():
    a = RiskRaster(dt.date(2020, 1, 1), 2, 2, 0.0, 0.0, 1.0, np.zeros((2, 2)))
    b = RiskRaster(dt.date(2020, 1, 2), 2, 2, 1.0, 0.0, 1.0, np.zeros((2, 2)))
    with pytest.raises(GeometryError):
        stack_rasters({a.day: a, b.day: b})
    days, grid, stack = stack_rasters({a.day: a})
    assert stack.flags.c_contiguous and stack.shape == (1, 2, 2)


coord = st.floats(0, 10, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(coord, coord, coord, coord)
def test_no_false_negatives_against_sampling(x0, y0, x1, y1):
    if math.dist((x0, y0), (x1, y1)) == 0:
        return
    assert sampled_cells((x0, y0), (x1, y1), GRID, 4000) <= cells((x0, y0), (x1, y1))


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord)
def test_traced_cells_touch_the_segment(x0, y0, x1, y1):
    """Every traced cell's closed square meets the segment (no stray cells)."""
    if math.dist((x0, y0), (x1, y1)) == 0:
        return
    for p in cells((x0, y0), (x1, y1)):
        lo_x, lo_y = p.col, 9 - p.row
        # clip the segment's parameter range to the square [lo, lo + 1]^2
        t0, t1 = 0.0, 1.0
        for a, d, lo in ((x0, x1 - x0, lo_x), (y0, y1 - y0, lo_y)):
            if d == 0:
                assert lo - 1e-9 <= a <= lo + 1 + 1e-9
                continue
            ta, tb = sorted(((lo - a) / d, (lo + 1 - a) / d))
            t0, t1 = max(t0, ta), min(t1, tb)
        assert t0 <= t1 + 1e-9


@settings(max_examples=100, deadline=None)
@given(coord, coord, coord, coord, st.integers(-3, 3), st.integers(-3, 3))
def test_translation_invariance(x0, y0, x1, y1, dx, dy):
    big = GridGeometry(30, 30, -10.0, -10.0, 1.0)
    if math.dist((x0, y0), (x1, y1)) == 0:
        return
    base = cells((x0, y0), (x1, y1), big)
    moved = cells((x0 + dx, y0 + dy), (x1 + dx, y1 + dy), big)
    assert {PixelRef(p.col + dx, p.row - dy) for p in base} == moved
