"""Per-line daily wildfire risk metrics.

Six aggregations of the pixel values a line crosses: maximum (MA), mean
(ME), cumulative (CU), and their high-risk variants (HRMA, HRME, HRCU) that
only keep pixels at or above a threshold derived from a training year.
Both means divide by the number of burnable pixels on the line, so the
high-risk mean behaves as if low-risk pixels were set to zero.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import DataError, InsufficientDataError, ValidationError
from .network import Network
from .raster import RiskRaster, stack_rasters, trace_line


class MetricKind(str, enum.Enum):
    MA = "MA"
    ME = "ME"
    CU = "CU"
    HRMA = "HRMA"
    HRME = "HRME"
    HRCU = "HRCU"

    @property
    def column(self) -> int:
        return _COLUMN[self]


ALL_METRICS = tuple(MetricKind)
_COLUMN = {m: i for i, m in enumerate(ALL_METRICS)}


@dataclass(frozen=True)
class HighRiskThreshold:
    mean_r: float
    std_r: float
    training_year: str = ""

    @property
    def threshold(self) -> float:
        return self.mean_r + self.std_r


def compute_high_risk_threshold(pixel_values: Iterable[Sequence[float]], training_year: str = "") -> HighRiskThreshold:
    """Population mean and standard deviation over every observed pixel risk.

    Args:
        pixel_values: One sequence of burnable pixel values per (line, day);
            a pixel crossed by several lines is counted once per line.
    """
    chunks = [np.asarray(v, dtype=np.float64).ravel() for v in pixel_values]
    allv = np.concatenate(chunks) if chunks else np.empty(0)
    if allv.size == 0:
        raise InsufficientDataError("no pixel values to compute the high-risk threshold")
    mean = float(allv.sum() / allv.size)
    dev = allv - mean
    std = math.sqrt(float((dev * dev).sum()) / allv.size)
    return HighRiskThreshold(mean, std, training_year)


def threshold_from_rasters(
    network: Network, rasters: Mapping[dt.date, RiskRaster], training_year: str = ""
) -> HighRiskThreshold:
    """Same statistic as :func:`compute_high_risk_threshold`, computed with
    the compiled two-pass moment kernel directly on a raster stack."""
    _, grid, stack = stack_rasters(rasters)
    sets = [trace_line(ln, grid) for ln in network.lines]
    total_n, total_s = 0, 0.0
    for ps in sets:
        n, s, _ = kernels.pixel_moments(stack, ps.rows, ps.cols, 0.0)
        total_n += n
        total_s += s
    if total_n == 0:
        raise InsufficientDataError("training rasters contain no burnable pixels on any line")
    mean = total_s / total_n
    sq = sum(kernels.pixel_moments(stack, ps.rows, ps.cols, mean)[2] for ps in sets)
    return HighRiskThreshold(mean, math.sqrt(sq / total_n), training_year)


def high_risk_pixels(values: Sequence[float], thr: HighRiskThreshold | float) -> list[float]:
    cut = thr.threshold if isinstance(thr, HighRiskThreshold) else thr
    return [v for v in values if v >= cut]


def aggregate(values: Sequence[float], pixel_count: int, kind: MetricKind, thr: HighRiskThreshold | float) -> float:
    """Aggregate one line's burnable pixel values under ``kind``.

    An empty relevant pixel set yields zero for every metric.
    """
    kind = MetricKind(kind)
    if pixel_count < 0 or len(values) > pixel_count:
        raise DataError(f"inconsistent pixel count {pixel_count} for {len(values)} values")
    if kind in (MetricKind.HRMA, MetricKind.HRME, MetricKind.HRCU):
        values = high_risk_pixels(values, thr)
    if not values:
        return 0.0
    if kind in (MetricKind.MA, MetricKind.HRMA):
        return float(max(values))
    total = math.fsum(values)
    if kind in (MetricKind.CU, MetricKind.HRCU):
        return total
    return total / pixel_count


class LineRiskTable:
    """Dense (line, day, metric) table of aggregated risk values."""

    def __init__(self, line_ids: Sequence[int], days: Sequence[dt.date], values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (len(line_ids), len(days), len(ALL_METRICS)):
            raise ValidationError(f"table shape {values.shape} does not match lines/days/metrics")
        if np.any(values < 0) or np.any(np.isnan(values)):
            raise ValidationError("risk values must be non-negative numbers")
        self.line_ids = tuple(line_ids)
        self.days = tuple(days)
        self.values = values
        self.values.setflags(write=False)
        self._line_pos = {lid: i for i, lid in enumerate(self.line_ids)}
        self._day_pos = {d: i for i, d in enumerate(self.days)}

    def __len__(self):
        return self.values.size

    def get(self, line_id: int, day: dt.date, kind: MetricKind) -> float:
        return float(self.values[self._line_pos[line_id], self._day_pos[day], MetricKind(kind).column])

    def day_slice(self, day: dt.date, kind: MetricKind) -> dict[int, float]:
        """``{line_id: risk}`` for one day and metric."""
        if day not in self._day_pos:
            raise DataError(f"risk table has no entries for {day}")
        col = self.values[:, self._day_pos[day], MetricKind(kind).column]
        return dict(zip(self.line_ids, col.tolist()))

    def metric_values(self, kind: MetricKind) -> np.ndarray:
        """All (line, day) values for one metric, flattened."""
        return self.values[:, :, MetricKind(kind).column].ravel()

    def to_csv(self, path: str | Path, metrics: Iterable[MetricKind] = ALL_METRICS) -> None:
        metrics = [MetricKind(m) for m in metrics]
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["line", "day", "metric", "risk"])
            for i, lid in enumerate(self.line_ids):
                for j, day in enumerate(self.days):
                    for m in metrics:
                        w.writerow([lid, day.isoformat(), m.value, repr(float(self.values[i, j, m.column]))])

    @classmethod
    def from_csv(cls, path: str | Path) -> "LineRiskTable":
        """Read a table written by :meth:`to_csv`.  Metrics missing from the
        file are filled with zeros."""
        rows = []
        with Path(path).open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                rows.append((int(rec["line"]), dt.date.fromisoformat(rec["day"]), MetricKind(rec["metric"]), float(rec["risk"])))
        line_ids = sorted({r[0] for r in rows})
        days = sorted({r[1] for r in rows})
        lpos = {lid: i for i, lid in enumerate(line_ids)}
        dpos = {d: i for i, d in enumerate(days)}
        values = np.zeros((len(line_ids), len(days), len(ALL_METRICS)))
        for lid, day, m, risk in rows:
            values[lpos[lid], dpos[day], m.column] = risk
        return cls(line_ids, days, values)


def build_table(network: Network, rasters: Mapping[dt.date, RiskRaster], thr: HighRiskThreshold) -> LineRiskTable:
    """Trace every line once and aggregate all six metrics for every day."""
    days, grid, stack = stack_rasters(rasters)
    out = np.zeros((len(network.lines), len(days), len(ALL_METRICS)))
    cut = thr.threshold
    for i, line in enumerate(network.lines):
        try:
            ps = trace_line(line, grid)
        except DataError as exc:
            raise type(exc)(f"{exc} (while tracing for days {days[0]}..{days[-1]})") from exc
        metrics, _ = kernels.line_day_metrics(stack, ps.rows, ps.cols, cut)
        out[i] = metrics
    return LineRiskTable([ln.id for ln in network.lines], days, out)
