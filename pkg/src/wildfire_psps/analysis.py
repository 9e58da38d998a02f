"""Comparing de-energization plans across methods and metrics."""

from __future__ import annotations

import csv
import datetime as dt
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError
from .metrics import ALL_METRICS, MetricKind
from .threshold import Method

METHODS = (Method.THRESHOLD, Method.OPS)
#: Row/column order of the similarity matrix.
PAIRS = tuple(itertools.product(ALL_METRICS, METHODS))


def pair_label(metric: MetricKind, method: Method) -> str:
    return f"{MetricKind(metric).value}/{Method(method).value}"


def unique_lines(off_sets: Iterable[Iterable[int]]) -> int:
    """Number of distinct lines de-energized on at least one day."""
    seen: set[int] = set()
    for s in off_sets:
        seen.update(s)
    return len(seen)


def count_vector(off_sets: Iterable[Iterable[int]], line_ids: Sequence[int]) -> np.ndarray:
    """Days each line spent de-energized, in ``line_ids`` order."""
    pos = {lid: i for i, lid in enumerate(line_ids)}
    out = np.zeros(len(line_ids))
    for s in off_sets:
        for lid in s:
            out[pos[lid]] += 1
    return out


def similarity(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity of two count vectors; 0 if either is all zero."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DataError(f"count vectors differ in length: {u.shape} vs {v.shape}")
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0 or nv == 0:
        return 0.0
    return float(min(1.0, max(0.0, np.dot(u / nu, v / nv))))


def similarity_matrix(vectors: Sequence[np.ndarray]) -> np.ndarray:
    n = len(vectors)
    out = np.zeros((n, n))
    for i in range(n):
        # self-similarity is exactly 1; skip the rounding of u.u / |u|^2
        out[i, i] = 1.0 if np.any(np.asarray(vectors[i]) != 0) else 0.0
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = similarity(vectors[i], vectors[j])
    return out


def rolling_average(series: Sequence[float], window: int = 7) -> list[float]:
    """Trailing mean; the first ``window - 1`` points average the available prefix."""
    if len(series) == 0:
        raise DataError("rolling average of an empty series")
    if window < 1:
        raise DataError("window must be >= 1")
    out = []
    for i in range(len(series)):
        chunk = series[max(0, i - window + 1) : i + 1]
        out.append(math.fsum(chunk) / len(chunk))
    return out


@dataclass
class StudyResults:
    """Everything the report needs, keyed by (method, metric)."""

    line_ids: list[int]
    days: list[dt.date]
    off_lines: dict[tuple[Method, MetricKind], dict[dt.date, frozenset[int]]] = field(default_factory=dict)
    daily_shed: dict[tuple[Method, MetricKind], dict[dt.date, float]] = field(default_factory=dict)

    def pairs(self) -> list[tuple[Method, MetricKind]]:
        return [(method, metric) for metric, method in PAIRS if (method, metric) in self.off_lines or (method, metric) in self.daily_shed]


def _fmt(v: float) -> str:
    return repr(float(v))


def report(results: StudyResults, out_dir: str | Path) -> dict[str, Path]:
    """Write the comparison CSVs and SVG charts; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {name: out_dir / name for name in (
        "plans.csv", "daily_shed.csv", "unique_lines.csv", "similarity.csv", "summary.csv", "load_shed.svg", "similarity.svg",
    )}
    pairs = results.pairs()

    with paths["plans.csv"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "metric", "method", "line_id", "status"])
        for day in results.days:
            for metric, method in PAIRS:
                off = results.off_lines.get((method, metric), {}).get(day, frozenset())
                for lid in sorted(off):
                    w.writerow([day.isoformat(), metric.value, method.value, lid, "off"])

    rolling: dict[tuple[Method, MetricKind], list[float]] = {}
    with paths["daily_shed.csv"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "method", "metric", "total_shed_mwh", "rolling7_mwh"])
        for key in pairs:
            shed = results.daily_shed.get(key, {})
            series = [shed.get(d, 0.0) for d in results.days]
            if not series:
                continue
            rolling[key] = rolling_average(series)
            for day, s, r in zip(results.days, series, rolling[key]):
                w.writerow([day.isoformat(), key[0].value, key[1].value, _fmt(s), _fmt(r)])

    with paths["unique_lines.csv"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "metric", "unique_lines"])
        for method, metric in pairs:
            w.writerow([method.value, metric.value, unique_lines(results.off_lines.get((method, metric), {}).values())])

    vectors = [count_vector(results.off_lines.get((method, metric), {}).values(), results.line_ids) for metric, method in PAIRS]
    sim = similarity_matrix(vectors)
    labels = [pair_label(m, k) for m, k in PAIRS]
    with paths["similarity.csv"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pair", *labels])
        for label, row in zip(labels, sim):
            w.writerow([label, *(_fmt(v) for v in row)])

    with paths["summary.csv"].open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "threshold_total_mwh", "ops_total_mwh", "ops_to_threshold_ratio"])
        for metric in ALL_METRICS:
            t = results.daily_shed.get((Method.THRESHOLD, metric))
            o = results.daily_shed.get((Method.OPS, metric))
            if t is None or o is None or not results.days:
                continue
            tt, ot = math.fsum(t.values()), math.fsum(o.values())
            ratio = ot / tt if tt > 0 else (0.0 if ot == 0 else math.inf)
            w.writerow([metric.value, _fmt(tt), _fmt(ot), _fmt(ratio)])

    paths["load_shed.svg"].write_text(_line_chart(results.days, rolling), encoding="utf-8")
    paths["similarity.svg"].write_text(_heatmap(labels, sim), encoding="utf-8")
    return paths


_COLORS = {
    MetricKind.MA: "#1f77b4",
    MetricKind.ME: "#ff7f0e",
    MetricKind.CU: "#2ca02c",
    MetricKind.HRMA: "#d62728",
    MetricKind.HRME: "#9467bd",
    MetricKind.HRCU: "#8c564b",
}


def _line_chart(days: Sequence[dt.date], series: Mapping[tuple[Method, MetricKind], list[float]]) -> str:
    width, height, pad = 800, 400, 50
    top = max((max(s) for s in series.values() if s), default=0.0) or 1.0
    n = max(len(days) - 1, 1)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{pad}" y="20" font-family="sans-serif" font-size="14">Seven-day rolling average load shed (MWh)</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad - 5}" y="{pad}" font-family="sans-serif" font-size="10" text-anchor="end">{top:.1f}</text>',
    ]
    for k, ((method, metric), ys) in enumerate(series.items()):
        pts = " ".join(
            f"{pad + (width - 2 * pad) * i / n:.2f},{height - pad - (height - 2 * pad) * y / top:.2f}" for i, y in enumerate(ys)
        )
        dash = ' stroke-dasharray="4 3"' if method is Method.OPS else ""
        out.append(f'<polyline fill="none" stroke="{_COLORS[metric]}" stroke-width="1.2"{dash} points="{pts}"/>')
        out.append(
            f'<text x="{width - pad + 4}" y="{pad + 12 * k}" font-family="sans-serif" font-size="9" fill="{_COLORS[metric]}">'
            f"{pair_label(metric, method)}</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _heatmap(labels: Sequence[str], sim: np.ndarray) -> str:
    cell, left, topm = 36, 110, 110
    size = left + cell * len(labels) + 10
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for i, label in enumerate(labels):
        out.append(f'<text x="{left - 4}" y="{topm + cell * i + cell / 2 + 3:.1f}" font-family="sans-serif" font-size="9" text-anchor="end">{label}</text>')
        x = left + cell * i + cell / 2
        out.append(f'<text x="{x:.1f}" y="{topm - 4}" font-family="sans-serif" font-size="9" transform="rotate(-60 {x:.1f} {topm - 4})">{label}</text>')
        for j in range(len(labels)):
            level = int(round(255 * float(sim[i, j])))
            out.append(
                f'<rect x="{left + cell * j}" y="{topm + cell * i}" width="{cell}" height="{cell}" '
                f'fill="rgb({level},{level},{max(0, level - 80)})"><title>{sim[i, j]:.3f}</title></rect>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
