"""DC dispatch with line statuses: minimum load shed for one hour.

:func:`build_hour_model` writes the single-hour shutoff model in which every
line either has a fixed status or a binary status variable.  With all
statuses fixed it is the dispatch LP used to evaluate a plan; the optimal
shutoff planner reuses it with binaries on the switchable lines.

All model quantities are per-unit; results are reported in MW.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError
from .network import HOURS_PER_DAY, Network
from .solver import INF, HighsSession, LinearModel, SolveOutcome

BIG_M_UPPER = 2 * math.pi
BIG_M_LOWER = -2 * math.pi


@dataclass
class HourModel:
    """A built single-hour model plus the column/row maps needed to read it."""

    model: LinearModel
    gen_cols: list[int]
    shed_cols: list[int]
    flow_cols: list[int]
    angle_cols: list[int]
    status_cols: dict[int, int]
    balance_rows: list[int]
    risk_row: int | None = None
    fixed_status: dict[int, int] = field(default_factory=dict)


def build_hour_model(
    network: Network,
    demand_mw: Sequence[float],
    *,
    fixed_status: Mapping[int, int] | None = None,
    switchable: Sequence[int] = (),
    risks: Mapping[int, float] | None = None,
    risk_budget: float | None = None,
    epsilon_switch: float = 0.0,
    big_m_upper: float = BIG_M_UPPER,
    big_m_lower: float = BIG_M_LOWER,
    name: str = "dispatch",
) -> HourModel:
    """Build the shutoff model for one hour.

    Lines in ``switchable`` get a binary status; every other line takes its
    status from ``fixed_status`` (default energized).  Generator lower
    bounds are relaxed to zero.  One bus per connected component of the full
    topology (the lowest id) is the angle reference.
    """
    fixed = dict(fixed_status or {})
    switch = list(switchable)
    overlap = sorted(set(switch) & set(fixed))
    if overlap:
        raise DataError(f"lines {overlap} are both switchable and fixed")
    base = network.base_mva
    demand = np.asarray(demand_mw, dtype=float) / base
    if demand.shape != (network.n_buses,):
        raise DataError(f"demand vector has shape {demand.shape}, expected ({network.n_buses},)")
    m = LinearModel(name)

    gen_cols = [m.add_var(f"pg_{g.id}", g.planning_p_min, g.p_max) for g in network.generators]
    shed_cols = [m.add_var(f"pls_{b.id}", 0.0, float(demand[k]), cost=1.0) for k, b in enumerate(network.buses)]
    refs = set(network.reference_buses())
    flow_cols = []
    for ln in network.lines:
        if ln.id in fixed and fixed[ln.id] not in (0, 1):
            raise DataError(f"line {ln.id}: status must be 0 or 1")
        z = fixed.get(ln.id, 1)
        bound = ln.flow_limit if ln.id in switch else ln.flow_limit * z
        flow_cols.append(m.add_var(f"f_{ln.id}", -bound, bound))
    angle_cols = [
        m.add_var(f"va_{b.id}", 0.0 if b.id in refs else -INF, 0.0 if b.id in refs else INF) for b in network.buses
    ]
    status_cols = {lid: m.add_binary(f"z_{lid}", cost=-epsilon_switch) for lid in switch}
    m.objective_offset = epsilon_switch * len(switch)

    bi = network.bus_index
    for ln, fc in zip(network.lines, flow_cols):
        tf, tt = angle_cols[bi[ln.from_bus]], angle_cols[bi[ln.to_bus]]
        b, absb = ln.susceptance_b, abs(ln.susceptance_b)
        if ln.id in status_cols:
            zc = status_cols[ln.id]
            m.add_row(f"flow_hi_{ln.id}", {fc: 1.0, zc: -ln.flow_limit}, upper=0.0)
            m.add_row(f"flow_lo_{ln.id}", {fc: 1.0, zc: ln.flow_limit}, lower=0.0)
            m.add_row(f"angle_lo_{ln.id}", {tf: 1.0, tt: -1.0, zc: -(ln.angle_min - big_m_lower)}, lower=big_m_lower)
            m.add_row(f"angle_hi_{ln.id}", {tf: 1.0, tt: -1.0, zc: -(ln.angle_max - big_m_upper)}, upper=big_m_upper)
            m.add_row(f"dc_lo_{ln.id}", {fc: 1.0, tf: b, tt: -b, zc: absb * big_m_lower}, lower=absb * big_m_lower)
            m.add_row(f"dc_hi_{ln.id}", {fc: 1.0, tf: b, tt: -b, zc: absb * big_m_upper}, upper=absb * big_m_upper)
        else:
            z = fixed.get(ln.id, 1)
            m.add_row(
                f"angle_{ln.id}",
                {tf: 1.0, tt: -1.0},
                lower=ln.angle_min * z + big_m_lower * (1 - z),
                upper=ln.angle_max * z + big_m_upper * (1 - z),
            )
            m.add_row(
                f"dc_{ln.id}",
                {fc: 1.0, tf: b, tt: -b},
                lower=absb * big_m_lower * (1 - z),
                upper=absb * big_m_upper * (1 - z),
            )

    balance_rows = []
    for k, bus in enumerate(network.buses):
        coeffs: dict[int, float] = {shed_cols[k]: -1.0}
        for ln, fc in zip(network.lines, flow_cols):
            if ln.from_bus == bus.id:
                coeffs[fc] = coeffs.get(fc, 0.0) + 1.0
            if ln.to_bus == bus.id:
                coeffs[fc] = coeffs.get(fc, 0.0) - 1.0
        for g, gc in zip(network.generators, gen_cols):
            if g.bus == bus.id:
                coeffs[gc] = -1.0
        balance_rows.append(m.add_row(f"balance_{bus.id}", coeffs, -float(demand[k]), -float(demand[k])))

    risk_row = None
    if status_cols and risk_budget is not None:
        risks = risks or {}
        risk_row = m.add_row("risk_budget", {status_cols[lid]: risks[lid] for lid in switch}, upper=risk_budget)
    return HourModel(m, gen_cols, shed_cols, flow_cols, angle_cols, status_cols, balance_rows, risk_row, fixed)


@dataclass
class DispatchResult:
    day: dt.date | None
    hour: int
    generation_mw: dict[int, float]
    flow_mw: dict[int, float]
    angle_rad: dict[int, float]
    shed_mw: dict[int, float]
    total_shed: float
    feasible: bool
    balance_residual_pu: float
    objective: float = 0.0

    @property
    def total_shed_pu(self) -> float:
        return self.objective


@dataclass
class DaySimulation:
    day: dt.date | None
    hours: list[DispatchResult]

    @property
    def hourly_shed(self) -> list[float]:
        return [r.total_shed for r in self.hours]

    @property
    def total_shed_mwh(self) -> float:
        return math.fsum(self.hourly_shed)


def read_result(network: Network, hm: HourModel, x: np.ndarray, demand_mw: Sequence[float], day=None, hour=0) -> DispatchResult:
    base = network.base_mva
    demand = np.asarray(demand_mw, dtype=float) / base
    pg = x[hm.gen_cols]
    pls = x[hm.shed_cols]
    f = x[hm.flow_cols]
    va = x[hm.angle_cols]
    inj = -pls + demand
    bi = network.bus_index
    for ln, fl in zip(network.lines, f):
        inj[bi[ln.from_bus]] += fl
        inj[bi[ln.to_bus]] -= fl
    for g, p in zip(network.generators, pg):
        inj[bi[g.bus]] -= p
    shed_pu = float(pls.sum())
    return DispatchResult(
        day=day,
        hour=hour,
        generation_mw={g.id: float(p * base) for g, p in zip(network.generators, pg)},
        flow_mw={ln.id: float(fl * base) for ln, fl in zip(network.lines, f)},
        angle_rad={b.id: float(a) for b, a in zip(network.buses, va)},
        shed_mw={b.id: float(s * base) for b, s in zip(network.buses, pls)},
        total_shed=shed_pu * base,
        feasible=True,
        balance_residual_pu=float(np.max(np.abs(inj), initial=0.0)),
        objective=shed_pu,
    )


def _full_status(network: Network, statuses: Mapping[int, int]) -> dict[int, int]:
    missing = [ln.id for ln in network.lines if ln.id not in statuses]
    if missing:
        raise DataError(f"statuses missing for lines {missing}")
    return {ln.id: int(statuses[ln.id]) for ln in network.lines}


def dispatch_fixed(network: Network, statuses: Mapping[int, int], demand_mw: Sequence[float], *, day=None, hour=0) -> DispatchResult:
    """Minimum-shed dispatch for one hour with every line status fixed."""
    status = _full_status(network, statuses)
    hm = build_hour_model(network, demand_mw, fixed_status=status, name=f"dispatch_{day}_{hour}")
    out = HighsSession(hm.model, mip_gap=0.0).solve()
    return read_result(network, hm, out.x, demand_mw, day, hour)


def statuses_from_off(network: Network, off_lines) -> dict[int, int]:
    off = set(off_lines)
    unknown = off - set(network.line_index)
    if unknown:
        raise DataError(f"unknown line ids {sorted(unknown)}")
    return {ln.id: 0 if ln.id in off else 1 for ln in network.lines}


def simulate_day(network: Network, off_lines, demand_day_mw: np.ndarray, *, day=None) -> DaySimulation:
    """Dispatch all 24 hours of a day with a fixed set of de-energized lines.

    ``off_lines`` may be a :class:`~wildfire_psps.threshold.DeEnergizationPlan`
    or any iterable of line ids.  One model is built and re-solved with
    updated demand bounds for each hour.
    """
    off = getattr(off_lines, "off_lines", off_lines)
    if day is None:
        day = getattr(off_lines, "day", None)
    demand_day_mw = np.asarray(demand_day_mw, dtype=float)
    if demand_day_mw.shape != (HOURS_PER_DAY, network.n_buses):
        raise DataError(f"day demand has shape {demand_day_mw.shape}, expected (24, {network.n_buses})")
    status = statuses_from_off(network, off)
    hm = build_hour_model(network, demand_day_mw[0], fixed_status=status, name=f"dispatch_{day}")
    session = HighsSession(hm.model, mip_gap=0.0)
    base = network.base_mva
    results = []
    for hour in range(HOURS_PER_DAY):
        d = demand_day_mw[hour] / base
        if hour:
            session.set_col_bounds(hm.shed_cols, np.zeros(network.n_buses), d)
            session.set_row_bounds(hm.balance_rows, -d, -d)
        out: SolveOutcome = session.solve()
        results.append(read_result(network, hm, out.x, demand_day_mw[hour], day, hour))
    return DaySimulation(day, results)
