"""Self-checks behind ``wildfire-psps verify``.

Each check compares a production path against an independent reference
(brute force, naive recomputation, dense sampling, or post-hoc recomputation
from the stage files) and returns a :class:`CheckReport`.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import random
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import StudyConfig
from .errors import DataError
from .metrics import MetricKind
from .network import Line
from .oracle import enumerate_ops, random_ops_instance, sampled_cells
from .ops import BUDGET_RTOL, solve_ops
from .raster import GridGeometry, trace_line
from .threshold import read_plans, residual_risk

SCALES = (0.5, 2.0, 10.0)


@dataclass
class CheckReport:
    name: str
    cases: int = 0
    worst: float = 0.0
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        state = "ok" if self.ok else f"FAILED ({len(self.failures)})"
        return f"{self.name}: {self.cases} cases, worst deviation {self.worst:.3g}, {state}"


def check_ops_oracle(count: int = 25, seed: int = 0, max_buses: int = 10, max_switchable: int = 12, tol: float = 1e-6) -> CheckReport:
    """MILP objective against exhaustive enumeration on random small networks."""
    rng = random.Random(seed)
    rep = CheckReport("ops-oracle")
    for k in range(count):
        inst = random_ops_instance(rng, max_buses=max_buses, max_switchable=max_switchable)
        got = solve_ops(inst).objective
        want = enumerate_ops(inst.network, inst).objective
        diff = abs(got - want)
        rep.cases += 1
        rep.worst = max(rep.worst, diff)
        if diff > tol:
            rep.failures.append(f"instance {k}: milp {got!r} vs enumeration {want!r}")
    return rep


def fuzz_vectors(rng: np.random.Generator, count: int, max_len: int = 40) -> tuple[np.ndarray, np.ndarray]:
    """Integer-valued pixel vectors padded with NaN, one per row, plus a
    threshold per row (a third of them sitting exactly on a pixel value)."""
    lengths = rng.integers(0, max_len + 1, size=count)
    vals = rng.integers(0, 151, size=(count, max_len)).astype(float)
    vals[np.arange(max_len)[None, :] >= lengths[:, None]] = np.nan
    thr = rng.uniform(0, 150, size=count)
    exact = rng.random(count) < 1 / 3
    thr[exact] = np.floor(thr[exact])
    return vals, thr


def batch_metrics(vals: np.ndarray, thr: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Metrics for each row of ``vals`` against its own threshold.

    Rows sharing a threshold are run through the line kernel as one stack.
    """
    out = np.zeros((vals.shape[0], 6))
    cols = np.arange(vals.shape[1], dtype=np.int64)
    rows = np.zeros_like(cols)
    for t in np.unique(thr):
        idx = np.flatnonzero(thr == t)
        for s in range(0, idx.size, chunk):
            part = idx[s : s + chunk]
            stack = np.ascontiguousarray(vals[part][:, None, :])
            out[part] = kernels.line_day_metrics(stack, rows, cols, float(t))[0]
    return out


def check_metric_properties(count: int = 100_000, seed: int = 0, rtol: float = 1e-9) -> CheckReport:
    """Order and scale properties of the six metrics on fuzzed vectors."""
    rng = np.random.default_rng(seed)
    vals, thr = fuzz_vectors(rng, count)
    # Bucket thresholds so rows can share kernel calls.
    thr = np.round(thr * 4) / 4
    base = batch_metrics(vals, thr)
    ma, me, cu, hrma, hrme, hrcu = base.T
    rep = CheckReport("metric-properties", cases=count)

    def flag(mask, label):
        for i in np.flatnonzero(mask)[:5]:
            rep.failures.append(f"vector {i}: {label}")

    flag(hrma > ma, "HRMA > MA")
    flag(hrme > me, "HRME > ME")
    flag(hrcu > cu, "HRCU > CU")
    flag(me > ma, "ME > MA")
    flag(~((hrma == 0) | (hrma == ma)), "HRMA not in {0, MA}")
    for c in SCALES:
        scaled = batch_metrics(vals * c, thr * c)
        dev = np.abs(scaled - c * base) / np.maximum(np.abs(c * base), 1e-300)
        dev[(scaled == 0) & (base == 0)] = 0.0
        rep.worst = max(rep.worst, float(dev.max(initial=0.0)))
        flag((dev > rtol).any(axis=1), f"not scale-equivariant at c={c}")
    return rep


def check_supercover(count: int = 1000, seed: int = 0, samples: int = 20_000, grid_size: int = 30) -> CheckReport:
    """Traced cells against dense point sampling on random segments."""
    rng = random.Random(seed)
    grid = GridGeometry(grid_size, grid_size, 0.0, 0.0, 1.0)
    rep = CheckReport("supercover")
    k = 0
    while rep.cases < count:
        k += 1
        p0 = (rng.uniform(0, grid_size), rng.uniform(0, grid_size))
        if k % 4 == 0:
            # axis-aligned and diagonal segments through lattice points
            p0 = (float(rng.randint(0, grid_size)), float(rng.randint(0, grid_size)))
            step = rng.randint(1, 5)
            p1 = rng.choice([(p0[0] + step, p0[1]), (p0[0], p0[1] + step), (p0[0] + step, p0[1] + step)])
            p1 = (min(p1[0], grid_size), min(p1[1], grid_size))
        else:
            p1 = (rng.uniform(0, grid_size), rng.uniform(0, grid_size))
        if p0 == p1:  # clipped to a point at the grid edge; draw again
            continue
        traced = set(trace_line(Line(1, 1, 2, -10.0, 1.0, -0.5, 0.5, (p0, p1)), grid).pixels)
        missing = sampled_cells(p0, p1, grid, samples) - traced
        rep.cases += 1
        rep.worst = max(rep.worst, float(len(missing)))
        if missing:
            rep.failures.append(f"segment {p0} -> {p1}: missing {sorted(missing)[:4]}")
    return rep


def check_study_plans(cfg: StudyConfig) -> CheckReport:
    """Recompute every OPS plan's energized risk from the risk table and
    compare the decision-hour shed against the threshold plan."""
    from .study import read_hourly_shed, read_table

    base = cfg.output_dir / "plans"
    summary = base / "ops" / "summary.csv"
    if not summary.is_file():
        raise DataError(f"OPS summary not found: {summary}")
    table = read_table(cfg)
    thr_off = read_plans(base / "threshold" / "plans.csv")
    ops_off = read_plans(base / "ops" / "plans.csv")
    hourly: dict[tuple[str, MetricKind], dict] = {}
    rep = CheckReport("study-plans")
    with summary.open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            if rec["status"] == "failed":
                continue
            day, metric, hour = dt.date.fromisoformat(rec["day"]), MetricKind(rec["metric"]), int(rec["hour"])
            for sub in ("threshold", "ops"):
                if (sub, metric) not in hourly:
                    hourly[(sub, metric)] = read_hourly_shed(base / sub / metric.value / "shed_hourly.csv")
            risks = table.day_slice(day, metric)
            budget = residual_risk(risks, thr_off.get((day, metric), set()))
            energized = residual_risk(risks, ops_off.get((day, metric), set()))
            rep.cases += 1
            if energized > budget + BUDGET_RTOL * abs(budget):
                rep.failures.append(f"{day} {metric.value}: energized risk {energized!r} > budget {budget!r}")
            t_shed = hourly[("threshold", metric)][day][hour]
            o_shed = hourly[("ops", metric)][day][hour]
            rep.worst = max(rep.worst, o_shed - t_shed)
            if o_shed > t_shed:
                rep.failures.append(f"{day} {metric.value}: hour {hour} OPS shed {o_shed!r} > threshold {t_shed!r}")
            if not math.isclose(budget, float(rec["risk_budget"]), rel_tol=BUDGET_RTOL, abs_tol=1e-12):
                rep.failures.append(f"{day} {metric.value}: recorded budget {rec['risk_budget']} != {budget!r}")
    return rep
