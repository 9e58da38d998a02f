"""File-based study pipeline: risk -> threshold plans -> OPS plans -> report.

Each stage reads only the files written by earlier stages, so any stage can
be deleted and re-run.  Output layout under ``output_dir``::

    risk/high_risk_threshold.json
    risk/line_risk.csv
    plans/<method>/percentiles.csv          (threshold only)
    plans/<method>/plans.csv
    plans/<method>/summary.csv
    plans/<method>/<METRIC>/shed_hourly.csv
    plans/<method>/<METRIC>/shed_daily.csv
    report/...
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .analysis import StudyResults, report
from .config import StudyConfig
from .dispatch import DaySimulation, simulate_day
from .errors import DataError, SolverError
from .metrics import HighRiskThreshold, LineRiskTable, MetricKind, build_table, threshold_from_rasters
from .network import HOURS_PER_DAY, Network, demand_by_day, load_demand, load_network
from .ops import BUDGET_RTOL, decide_ops, worst_case_hour
from .raster import load_raster_dir
from .threshold import DeEnergizationPlan, Method, compute_percentile, plan_from_risks, read_plans, residual_risk, write_plans

logger = logging.getLogger(__name__)


def _w(fh):
    return csv.writer(fh, lineterminator="\n")


def _r(v: float) -> str:
    return repr(float(v))


@dataclass
class StageResult:
    paths: list[Path] = field(default_factory=list)
    incomplete_days: list[tuple[dt.date, MetricKind, str]] = field(default_factory=list)


# ---------------------------------------------------------------- risk stage


def run_risk(cfg: StudyConfig, metrics: Sequence[MetricKind] | None = None) -> StageResult:
    network = load_network(cfg.network)
    training = load_raster_dir(cfg.rasters, cfg.training.days())
    thr = threshold_from_rasters(network, training, cfg.training.label)
    del training
    study = load_raster_dir(cfg.rasters, cfg.study.days())
    table = build_table(network, study, thr)
    out = cfg.output_dir / "risk"
    out.mkdir(parents=True, exist_ok=True)
    thr_path = out / "high_risk_threshold.json"
    thr_path.write_text(
        json.dumps(
            {"training_year": thr.training_year, "mean_r": thr.mean_r, "std_r": thr.std_r, "threshold": thr.threshold},
            indent=1,
        )
        + "\n",
        encoding="utf-8",
    )
    table_path = out / "line_risk.csv"
    table.to_csv(table_path, metrics or cfg.metrics)
    return StageResult([thr_path, table_path])


def read_threshold(cfg: StudyConfig) -> HighRiskThreshold:
    doc = json.loads((cfg.output_dir / "risk" / "high_risk_threshold.json").read_text(encoding="utf-8"))
    return HighRiskThreshold(doc["mean_r"], doc["std_r"], doc["training_year"])


def read_table(cfg: StudyConfig) -> LineRiskTable:
    path = cfg.output_dir / "risk" / "line_risk.csv"
    if not path.is_file():
        raise DataError(f"risk table not found: {path} (run the risk stage first)")
    return LineRiskTable.from_csv(path)


def _table_metrics(cfg: StudyConfig) -> list[MetricKind]:
    path = cfg.output_dir / "risk" / "line_risk.csv"
    with path.open(newline="", encoding="utf-8") as fh:
        present = {rec["metric"] for rec in csv.DictReader(fh)}
    return [m for m in cfg.metrics if m.value in present]


# ----------------------------------------------------------------- helpers


def _select_days(cfg: StudyConfig, table: LineRiskTable, days: Iterable[dt.date] | None) -> list[dt.date]:
    chosen = sorted(days) if days else list(table.days)
    missing = [d for d in chosen if d not in set(table.days)]
    if missing:
        raise DataError(f"risk table has no entries for {', '.join(d.isoformat() for d in missing)}")
    return chosen


def _demand_for(cfg: StudyConfig, network: Network, days: Sequence[dt.date]) -> dict[dt.date, np.ndarray]:
    demand = demand_by_day(load_demand(cfg.demand, network), network)
    missing = [d for d in days if d not in demand]
    if missing:
        raise DataError(f"demand file has no data for {missing[0].isoformat()}")
    return {d: demand[d] for d in days}


def _map(fn: Callable, jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def _write_shed(base: Path, metric: MetricKind, network: Network, sims: dict[dt.date, DaySimulation]) -> list[Path]:
    d = base / metric.value
    d.mkdir(parents=True, exist_ok=True)
    hourly, daily = d / "shed_hourly.csv", d / "shed_daily.csv"
    with hourly.open("w", newline="", encoding="utf-8") as fh:
        w = _w(fh)
        w.writerow(["day", "hour", "bus", "load_shed_mw"])
        for day in sorted(sims):
            for res in sims[day].hours:
                for bus in network.buses:
                    w.writerow([day.isoformat(), res.hour, bus.id, _r(res.shed_mw[bus.id])])
    with daily.open("w", newline="", encoding="utf-8") as fh:
        w = _w(fh)
        w.writerow(["day", "total_shed_mwh"])
        for day in sorted(sims):
            w.writerow([day.isoformat(), _r(sims[day].total_shed_mwh)])
    return [hourly, daily]


def read_hourly_shed(path: Path) -> dict[dt.date, list[float]]:
    acc: dict[dt.date, list[list[float]]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            day = dt.date.fromisoformat(rec["day"])
            acc.setdefault(day, [[] for _ in range(HOURS_PER_DAY)])[int(rec["hour"])].append(float(rec["load_shed_mw"]))
    return {d: [math.fsum(h) for h in hours] for d, hours in acc.items()}


def read_daily_shed(path: Path) -> dict[dt.date, float]:
    with path.open(newline="", encoding="utf-8") as fh:
        return {dt.date.fromisoformat(r["day"]): float(r["total_shed_mwh"]) for r in csv.DictReader(fh)}


# ----------------------------------------------------------- threshold stage


def _threshold_day(job):
    network, day, demand, per_metric = job
    cache: dict[frozenset, DaySimulation] = {}
    out = {}
    for metric, (risks, cut) in per_metric.items():
        plan = plan_from_risks(risks, cut, day, metric)
        if plan.off_lines not in cache:
            cache[plan.off_lines] = simulate_day(network, plan.off_lines, demand, day=day)
        out[metric] = (plan, cache[plan.off_lines])
    return day, out


def run_threshold(cfg: StudyConfig, days: Iterable[dt.date] | None = None) -> StageResult:
    network = load_network(cfg.network)
    table = read_table(cfg)
    metrics = _table_metrics(cfg)
    chosen = _select_days(cfg, table, days)
    demand = _demand_for(cfg, network, chosen)
    pcts = {m: compute_percentile(table, m, cfg.percentile) for m in metrics}
    jobs = [
        (network, day, demand[day], {m: (table.day_slice(day, m), pcts[m].value) for m in metrics}) for day in chosen
    ]
    results = dict(_map(_threshold_day, jobs, cfg.workers))

    base = cfg.output_dir / "plans" / "threshold"
    base.mkdir(parents=True, exist_ok=True)
    res = StageResult()
    pct_path = base / "percentiles.csv"
    with pct_path.open("w", newline="", encoding="utf-8") as fh:
        w = _w(fh)
        w.writerow(["metric", "q", "value"])
        for m in metrics:
            w.writerow([m.value, _r(pcts[m].q), _r(pcts[m].value)])
    plans = [results[d][m][0] for d in chosen for m in metrics]
    write_plans(base / "plans.csv", plans)
    with (base / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        w = _w(fh)
        w.writerow(["day", "metric", "off_count", "residual_risk", "worst_hour", "total_shed_mwh"])
        for d in chosen:
            for m in metrics:
                plan, sim = results[d][m]
                w.writerow([d.isoformat(), m.value, len(plan.off_lines), _r(plan.residual_risk), worst_case_hour(sim), _r(sim.total_shed_mwh)])
    res.paths += [pct_path, base / "plans.csv", base / "summary.csv"]
    for m in metrics:
        res.paths += _write_shed(base, m, network, {d: results[d][m][1] for d in chosen})
    return res


# ----------------------------------------------------------------- OPS stage


def _ops_day(job):
    network, day, demand, per_metric, eps, gap, tl, lp_dir = job
    out = {}
    cache: dict[frozenset, DaySimulation] = {}
    for metric, (risks, thr_off, thr_hourly) in per_metric.items():
        thr_plan = DeEnergizationPlan(day, metric, Method.THRESHOLD, thr_off, residual_risk(risks, thr_off))
        lp = None if lp_dir is None else Path(lp_dir) / f"ops_{day.isoformat()}_{metric.value}.lp"
        try:
            sol = decide_ops(
                network, risks, metric, day, demand, thr_plan, thr_hourly,
                epsilon_switch=eps, mip_gap=gap, time_limit=tl, export_lp=lp,
            )
        except SolverError as exc:
            out[metric] = ("failed", str(exc))
            continue
        if sol.plan.off_lines not in cache:
            cache[sol.plan.off_lines] = simulate_day(network, sol.plan.off_lines, demand, day=day)
        out[metric] = ("ok", sol, cache[sol.plan.off_lines])
    return day, out


def run_ops(cfg: StudyConfig, days: Iterable[dt.date] | None = None, export_lp: Path | None = None) -> StageResult:
    """OPS plans for ``days`` (default: all); ``export_lp`` is a directory for
    per-day LP-format model dumps."""
    network = load_network(cfg.network)
    table = read_table(cfg)
    metrics = _table_metrics(cfg)
    chosen = _select_days(cfg, table, days)
    demand = _demand_for(cfg, network, chosen)
    tbase = cfg.output_dir / "plans" / "threshold"
    if not (tbase / "plans.csv").is_file():
        raise DataError(f"threshold plans not found under {tbase} (run 'plan threshold' first)")
    thr_off = read_plans(tbase / "plans.csv")
    thr_hourly = {m: read_hourly_shed(tbase / m.value / "shed_hourly.csv") for m in metrics}
    jobs = []
    for day in chosen:
        per_metric = {}
        for m in metrics:
            if day not in thr_hourly[m]:
                raise DataError(f"threshold simulation missing for {day.isoformat()} / {m.value}")
            per_metric[m] = (table.day_slice(day, m), frozenset(thr_off.get((day, m), set())), thr_hourly[m][day])
        jobs.append((network, day, demand[day], per_metric, cfg.epsilon_switch, cfg.mip_gap, cfg.time_limit_s, export_lp))
    if export_lp is not None:
        Path(export_lp).mkdir(parents=True, exist_ok=True)
    results = dict(_map(_ops_day, jobs, cfg.workers))

    base = cfg.output_dir / "plans" / "ops"
    base.mkdir(parents=True, exist_ok=True)
    res = StageResult()
    plans = []
    with (base / "summary.csv").open("w", newline="", encoding="utf-8") as fh:
        w = _w(fh)
        w.writerow([
            "day", "metric", "hour", "risk_budget", "energized_risk", "budget_ok", "objective", "gap",
            "status", "hint_accepted", "off_count", "total_shed_mwh",
        ])
        for d in chosen:
            for m in metrics:
                entry = results[d][m]
                if entry[0] == "failed":
                    res.incomplete_days.append((d, m, entry[1]))
                    w.writerow([d.isoformat(), m.value, "", "", "", "", "", "", "failed", "", "", ""])
                    continue
                _, sol, sim = entry
                budget = sol.plan.risk_budget
                ok = sol.energized_risk <= budget + BUDGET_RTOL * abs(budget)
                if not ok:
                    raise SolverError(f"{d} {m.value}: OPS plan violates its risk budget")
                if sol.timed_out:
                    res.incomplete_days.append((d, m, f"time limit, gap {sol.gap:.3g}"))
                plans.append(sol.plan)
                w.writerow([
                    d.isoformat(), m.value, sol.plan.extra["hour"], _r(budget), _r(sol.energized_risk), ok,
                    _r(sol.objective), _r(sol.gap), sol.status, sol.hint_accepted, len(sol.plan.off_lines), _r(sim.total_shed_mwh),
                ])
    write_plans(base / "plans.csv", plans)
    res.paths += [base / "summary.csv", base / "plans.csv"]
    for m in metrics:
        sims = {d: results[d][m][2] for d in chosen if results[d][m][0] == "ok"}
        res.paths += _write_shed(base, m, network, sims)
    return res


# ------------------------------------------------------------- compare stage


def load_results(cfg: StudyConfig) -> StudyResults:
    network = load_network(cfg.network)
    metrics = _table_metrics(cfg)
    out = StudyResults([ln.id for ln in network.lines], [])
    days: set[dt.date] = set()
    for method, sub in ((Method.THRESHOLD, "threshold"), (Method.OPS, "ops")):
        base = cfg.output_dir / "plans" / sub
        if not (base / "plans.csv").is_file():
            raise DataError(f"plans not found under {base}")
        offs = read_plans(base / "plans.csv")
        for m in metrics:
            shed = read_daily_shed(base / m.value / "shed_daily.csv")
            days.update(shed)
            out.daily_shed[(method, m)] = shed
            out.off_lines[(method, m)] = {d: frozenset(offs.get((d, m), set())) for d in shed}
    out.days = sorted(days)
    return out


def run_compare(cfg: StudyConfig) -> StageResult:
    results = load_results(cfg)
    paths = report(results, cfg.output_dir / "report")
    return StageResult(list(paths.values()))
