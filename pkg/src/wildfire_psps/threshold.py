"""Percentile-threshold de-energization plans."""

from __future__ import annotations

import csv
import datetime as dt
import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError, InsufficientDataError, ValidationError
from .metrics import LineRiskTable, MetricKind


class Method(str, enum.Enum):
    THRESHOLD = "THRESHOLD"
    OPS = "OPS"


@dataclass(frozen=True)
class PercentileThreshold:
    metric: MetricKind
    q: float
    value: float


@dataclass(frozen=True)
class DeEnergizationPlan:
    day: dt.date
    metric: MetricKind
    method: Method
    off_lines: frozenset[int]
    residual_risk: float
    risk_budget: float | None = None
    extra: dict = field(default_factory=dict, compare=False, hash=False)


def nearest_rank(values: Iterable[float], q: float) -> float:
    """Nearest-rank percentile: the ceil(q/100 * N)-th smallest value."""
    data = sorted(float(v) for v in values)
    if not data:
        raise InsufficientDataError("cannot take a percentile of an empty population")
    if not 0 < q < 100:
        raise ValidationError(f"percentile must lie in (0, 100), got {q}")
    rank = math.ceil(Fraction(q) * len(data) / 100)
    return data[max(rank, 1) - 1]


def compute_percentile(table: LineRiskTable, metric: MetricKind, q: float = 95.0) -> PercentileThreshold:
    metric = MetricKind(metric)
    return PercentileThreshold(metric, q, nearest_rank(table.metric_values(metric).tolist(), q))


def switchable_lines(risks: Mapping[int, float]) -> list[int]:
    """Lines eligible for switching: those with non-zero risk."""
    return sorted(lid for lid, r in risks.items() if r > 0)


def residual_risk(risks: Mapping[int, float], off_lines: Iterable[int]) -> float:
    off = set(off_lines)
    return math.fsum(r for lid, r in sorted(risks.items()) if r > 0 and lid not in off)


def plan_threshold(table: LineRiskTable, metric: MetricKind, day: dt.date, pct: PercentileThreshold | float) -> DeEnergizationPlan:
    """De-energize every line whose risk is strictly above the percentile value."""
    metric = MetricKind(metric)
    cut = pct.value if isinstance(pct, PercentileThreshold) else float(pct)
    return plan_from_risks(table.day_slice(day, metric), cut, day, metric)


def plan_from_risks(risks: Mapping[int, float], threshold: float, day: dt.date, metric: MetricKind) -> DeEnergizationPlan:
    """Threshold plan from one day's ``{line_id: risk}``."""
    off = frozenset(lid for lid, r in risks.items() if r > threshold)
    return DeEnergizationPlan(day, MetricKind(metric), Method.THRESHOLD, off, residual_risk(risks, off))


PLAN_HEADER = ["day", "metric", "method", "line_id", "status"]


def write_plans(path: str | Path, plans: Iterable[DeEnergizationPlan]) -> None:
    """One ``off`` row per de-energized line, ordered by day, metric, line."""
    order = {m: i for i, m in enumerate(MetricKind)}
    rows = []
    for p in plans:
        for lid in sorted(p.off_lines):
            rows.append((p.day, order[p.metric], p.metric.value, p.method.value, lid))
    rows.sort()
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PLAN_HEADER)
        for day, _, metric, method, lid in rows:
            w.writerow([day.isoformat(), metric, method, lid, "off"])


def read_plans(path: str | Path) -> dict[tuple[dt.date, MetricKind], set[int]]:
    """Off-line sets keyed by (day, metric).  Days with nothing off are absent."""
    out: dict[tuple[dt.date, MetricKind], set[int]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != PLAN_HEADER:
            raise DataError(f"{path}: expected header {','.join(PLAN_HEADER)}")
        for rec in reader:
            if rec["status"] != "off":
                continue
            key = (dt.date.fromisoformat(rec["day"]), MetricKind(rec["metric"]))
            out.setdefault(key, set()).add(int(rec["line_id"]))
    return out
