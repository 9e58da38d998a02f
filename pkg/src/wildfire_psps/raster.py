"""Daily risk rasters in ESRI ASCII grid format and line/pixel intersection."""

from __future__ import annotations

import datetime as dt
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from . import kernels
from .errors import BoundsError, GeometryError, RasterFormatError, ValidationError
from .network import Line

NO_DATA = float("nan")
DEFAULT_NODATA_VALUE = -9999.0

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
_NAME_RE = re.compile(r"wfpi_(\d{4}-\d{2}-\d{2})\.asc$")


class GridGeometry(NamedTuple):
    n_cols: int
    n_rows: int
    x_origin: float
    y_origin: float
    cell_size: float


class PixelRef(NamedTuple):
    """Raster cell index; ``row`` 0 is the top (northernmost) row."""

    col: int
    row: int


@dataclass(frozen=True, eq=False)
class RiskRaster:
    """One day of gridded wildfire potential.

    ``values`` has shape (n_rows, n_cols), top row first, with NaN for
    no-data (unburnable) cells.
    """

    day: dt.date | None
    n_cols: int
    n_rows: int
    x_origin: float
    y_origin: float
    cell_size: float
    values: np.ndarray

    def __post_init__(self):
        if self.cell_size <= 0:
            raise ValidationError(f"cell_size must be positive, got {self.cell_size}")
        if self.values.shape != (self.n_rows, self.n_cols):
            raise RasterFormatError(
                f"values shape {self.values.shape} does not match header ({self.n_rows}, {self.n_cols})"
            )
        if np.any(self.values[~np.isnan(self.values)] < 0):
            raise ValidationError("risk values must be >= 0")
        self.values.setflags(write=False)

    @property
    def geometry(self) -> GridGeometry:
        return GridGeometry(self.n_cols, self.n_rows, self.x_origin, self.y_origin, self.cell_size)

    def value(self, pixel: PixelRef) -> float | None:
        v = self.values[pixel.row, pixel.col]
        return None if math.isnan(v) else float(v)


@dataclass(frozen=True)
class LinePixelSet:
    line: int
    pixels: tuple[PixelRef, ...]
    grid: GridGeometry

    @property
    def rows(self) -> np.ndarray:
        return np.fromiter((p.row for p in self.pixels), dtype=np.int64, count=len(self.pixels))

    @property
    def cols(self) -> np.ndarray:
        return np.fromiter((p.col for p in self.pixels), dtype=np.int64, count=len(self.pixels))


def day_from_filename(path: str | Path) -> dt.date | None:
    m = _NAME_RE.search(Path(path).name)
    return dt.date.fromisoformat(m.group(1)) if m else None


def raster_filename(day: dt.date) -> str:
    return f"wfpi_{day.isoformat()}.asc"


def load_raster(path: str | Path, day: dt.date | None = None) -> RiskRaster:
    """Parse an ASCII grid file.

    The day is taken from a ``wfpi_YYYY-MM-DD.asc`` file name unless given.
    """
    path = Path(path)
    if day is None:
        day = day_from_filename(path)
    with path.open(encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    header: dict[str, str] = {}
    pos = 0
    while pos < len(lines):
        parts = lines[pos].split()
        if not parts:
            pos += 1
            continue
        key = parts[0].lower()
        if key not in _HEADER_KEYS:
            break
        if len(parts) != 2:
            raise RasterFormatError(f"{path}:{pos + 1}: malformed header line")
        header[key] = parts[1]
        pos += 1
    for key in _HEADER_KEYS[:5]:
        if key not in header:
            raise RasterFormatError(f"{path}: missing header field '{key}'")
    try:
        ncols, nrows = int(header["ncols"]), int(header["nrows"])
        xll, yll = float(header["xllcorner"]), float(header["yllcorner"])
        cell = float(header["cellsize"])
        nodata = float(header.get("nodata_value", DEFAULT_NODATA_VALUE))
    except ValueError:
        raise RasterFormatError(f"{path}: non-numeric header value") from None
    if ncols <= 0 or nrows <= 0:
        raise RasterFormatError(f"{path}: ncols and nrows must be positive")

    rows = [ln for ln in lines[pos:] if ln.strip()]
    if len(rows) != nrows:
        raise RasterFormatError(f"{path}: header declares {nrows} rows, found {len(rows)}")
    values = np.empty((nrows, ncols))
    for r, text in enumerate(rows):
        cells = text.split()
        if len(cells) != ncols:
            raise RasterFormatError(f"{path}: row {r} has {len(cells)} values, header declares {ncols} cols")
        for c, tok in enumerate(cells):
            try:
                v = float(tok)
            except ValueError:
                raise RasterFormatError(f"{path}: non-numeric value {tok!r} at row {r}, col {c}") from None
            if v == nodata:
                values[r, c] = NO_DATA
            elif not v >= 0 or not math.isfinite(v):
                raise ValidationError(f"{path}: invalid risk value {v} at row {r}, col {c}")
            else:
                values[r, c] = v
    return RiskRaster(day, ncols, nrows, xll, yll, cell, values)


def write_raster(raster: RiskRaster, path: str | Path, nodata: float = DEFAULT_NODATA_VALUE) -> None:
    def fmt(v):
        if math.isnan(v):
            return f"{nodata:g}"
        return f"{int(v)}" if float(v).is_integer() else repr(float(v))

    out = [
        f"ncols {raster.n_cols}",
        f"nrows {raster.n_rows}",
        f"xllcorner {raster.x_origin!r}",
        f"yllcorner {raster.y_origin!r}",
        f"cellsize {raster.cell_size!r}",
        f"NODATA_value {nodata:g}",
    ]
    out.extend(" ".join(fmt(v) for v in row) for row in raster.values)
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def load_raster_dir(directory: str | Path, days: Iterable[dt.date]) -> dict[dt.date, RiskRaster]:
    """Load ``wfpi_<day>.asc`` for each requested day."""
    directory = Path(directory)
    out = {}
    for day in days:
        path = directory / raster_filename(day)
        if not path.exists():
            raise RasterFormatError(f"missing raster for {day.isoformat()}: {path}")
        out[day] = load_raster(path, day)
    return out


def trace_line(line: Line, raster: RiskRaster | GridGeometry) -> LinePixelSet:
    """Supercover of a line's polyline: every cell whose closed square the
    polyline touches, corner contacts included, deduplicated in order of
    first visit.  No-data cells are included."""
    grid = raster.geometry if isinstance(raster, RiskRaster) else raster
    x_max = grid.x_origin + grid.n_cols * grid.cell_size
    y_max = grid.y_origin + grid.n_rows * grid.cell_size
    for k, (x, y) in enumerate(line.geometry):
        if not (grid.x_origin <= x <= x_max and grid.y_origin <= y <= y_max):
            raise BoundsError(f"line {line.id}: vertex {k} ({x}, {y}) lies outside the raster extent")
    uv = [((x - grid.x_origin) / grid.cell_size, (y - grid.y_origin) / grid.cell_size) for x, y in line.geometry]
    seen: dict[PixelRef, None] = {}
    top = grid.n_rows - 1
    for (u0, v0), (u1, v1) in zip(uv, uv[1:]):
        cells = kernels.segment_cells(u0, v0, u1, v1, grid.n_cols, grid.n_rows)
        for col, vrow in cells.tolist():
            seen.setdefault(PixelRef(col, top - vrow), None)
    return LinePixelSet(line.id, tuple(seen), grid)


def pixel_risks(pixel_set: LinePixelSet, raster: RiskRaster) -> tuple[list[float], int]:
    """Risk values of the burnable pixels in ``pixel_set``.

    Returns:
        ``(values, count)`` where ``count`` is the number of burnable
        pixels, i.e. ``len(values)``.
    """
    if pixel_set.grid != raster.geometry:
        raise GeometryError(f"line {pixel_set.line}: pixel set was traced on a different grid")
    vals = raster.values[pixel_set.rows, pixel_set.cols]
    kept = [float(v) for v in vals if not math.isnan(v)]
    return kept, len(kept)


def stack_rasters(rasters: Mapping[dt.date, RiskRaster]) -> tuple[list[dt.date], GridGeometry, np.ndarray]:
    """Stack rasters into a C-contiguous (days, rows, cols) array.

    All rasters must share one grid geometry.
    """
    days = sorted(rasters)
    if not days:
        raise GeometryError("no rasters to stack")
    grid = rasters[days[0]].geometry
    for d in days:
        if rasters[d].geometry != grid:
            raise GeometryError(f"raster for {d} has grid {rasters[d].geometry}, expected {grid}")
    stack = np.ascontiguousarray(np.stack([rasters[d].values for d in days]), dtype=np.float64)
    return days, grid, stack
