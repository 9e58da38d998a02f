"""Optimal power shutoff: minimum load shed subject to a network risk budget.

The MILP is solved for a single decision hour per day (the hour in which the
threshold plan sheds the most load), warm-started from the threshold plan,
with the budget set to the threshold plan's residual risk.  The resulting
statuses are then held fixed for the whole day.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dispatch import (
    BIG_M_LOWER,
    BIG_M_UPPER,
    DaySimulation,
    DispatchResult,
    HourModel,
    build_hour_model,
    read_result,
    simulate_day,
    statuses_from_off,
)
from .errors import DataError, InternalSolverError, ValidationError
from .metrics import LineRiskTable, MetricKind
from .network import Network
from .solver import HighsSession
from .threshold import DeEnergizationPlan, Method, residual_risk, switchable_lines

DEFAULT_EPSILON = 0.01
DEFAULT_MIP_GAP = 1e-4
BUDGET_RTOL = 1e-9


@dataclass
class OpsInstance:
    network: Network
    day: dt.date | None
    metric: MetricKind
    hour: int
    risk_values: Mapping[int, float]
    risk_budget: float
    demand_mw: Sequence[float]
    epsilon_switch: float = DEFAULT_EPSILON
    big_m_upper: float = BIG_M_UPPER
    big_m_lower: float = BIG_M_LOWER
    warm_start: Mapping[int, int] | None = None
    mip_gap: float = DEFAULT_MIP_GAP
    time_limit: float | None = None

    def __post_init__(self):
        if self.risk_budget < 0:
            raise ValidationError(f"risk budget must be >= 0, got {self.risk_budget}")
        if self.epsilon_switch <= 0:
            raise ValidationError("epsilon_switch must be positive")
        missing = [ln.id for ln in self.network.lines if ln.id not in self.risk_values]
        if missing:
            raise DataError(f"no risk value for lines {missing}")
        if any(r < 0 for r in self.risk_values.values()):
            raise ValidationError("risk values must be >= 0")

    @property
    def switchable(self) -> list[int]:
        return switchable_lines(self.risk_values)


@dataclass
class OpsSolution:
    plan: DeEnergizationPlan
    dispatch: DispatchResult
    objective: float
    gap: float
    status: str
    timed_out: bool = False
    hint_accepted: bool | None = None
    energized_risk: float = 0.0
    statuses: dict[int, int] = field(default_factory=dict)


def worst_case_hour(hourly_shed: Sequence[float] | DaySimulation, atol: float = 1e-9) -> int:
    """Hour with the largest shed; ties (within ``atol``) go to the earliest hour."""
    shed = hourly_shed.hourly_shed if isinstance(hourly_shed, DaySimulation) else list(hourly_shed)
    if not shed:
        raise DataError("empty shed series")
    top = max(shed)
    return next(h for h, s in enumerate(shed) if s >= top - atol)


def risk_budget(threshold_plan: DeEnergizationPlan) -> float:
    return threshold_plan.residual_risk


def build_ops(instance: OpsInstance) -> HourModel:
    """Single-hour shutoff MILP for ``instance``.  Non-switchable lines are
    fixed energized."""
    switch = instance.switchable
    fixed = {ln.id: 1 for ln in instance.network.lines if ln.id not in set(switch)}
    return build_hour_model(
        instance.network,
        instance.demand_mw,
        fixed_status=fixed,
        switchable=switch,
        risks=instance.risk_values,
        risk_budget=instance.risk_budget,
        epsilon_switch=instance.epsilon_switch,
        big_m_upper=instance.big_m_upper,
        big_m_lower=instance.big_m_lower,
        name=f"ops_{instance.day}_{instance.metric.value if isinstance(instance.metric, MetricKind) else instance.metric}",
    )


def _hint_vector(instance: OpsInstance, hm: HourModel) -> np.ndarray | None:
    """Complete feasible point for the warm-start statuses, or None when the
    statuses violate the risk budget."""
    net = instance.network
    switch = instance.switchable
    z = {lid: int(instance.warm_start.get(lid, 1)) for lid in switch}
    if math.fsum(instance.risk_values[lid] * z[lid] for lid in switch) > instance.risk_budget:
        return None
    fixed = {ln.id: z.get(ln.id, 1) for ln in net.lines}
    lp = build_hour_model(
        net, instance.demand_mw, fixed_status=fixed, big_m_upper=instance.big_m_upper, big_m_lower=instance.big_m_lower
    )
    x_lp = HighsSession(lp.model, mip_gap=0.0).solve().x
    x = np.zeros(hm.model.num_cols)
    for a, b in ((hm.gen_cols, lp.gen_cols), (hm.shed_cols, lp.shed_cols), (hm.flow_cols, lp.flow_cols), (hm.angle_cols, lp.angle_cols)):
        x[a] = x_lp[b]
    for lid, col in hm.status_cols.items():
        x[col] = z[lid]
    return x


def solve_ops(instance: OpsInstance, export_lp: str | Path | None = None) -> OpsSolution:
    """Solve ``instance``; ``export_lp`` additionally writes the model in LP format."""
    hm = build_ops(instance)
    if export_lp is not None:
        Path(export_lp).write_text(hm.model.to_lp_text(), encoding="utf-8")
    hint = _hint_vector(instance, hm) if instance.warm_start is not None else None
    session = HighsSession(hm.model, time_limit=instance.time_limit, mip_gap=instance.mip_gap)
    out = session.solve(hint)
    x = out.x.copy()
    statuses = {ln.id: 1 for ln in instance.network.lines}
    for lid, col in hm.status_cols.items():
        statuses[lid] = int(round(x[col]))
        x[col] = statuses[lid]
    off = frozenset(lid for lid, z in statuses.items() if z == 0)
    energized = residual_risk(instance.risk_values, off)
    if energized > instance.risk_budget + BUDGET_RTOL * abs(instance.risk_budget):
        raise InternalSolverError(
            f"{hm.model.name}: returned statuses carry risk {energized!r} above budget {instance.risk_budget!r}",
            model_dump=hm.model.to_lp_text(),
        )
    plan = DeEnergizationPlan(
        instance.day,
        MetricKind(instance.metric),
        Method.OPS,
        off,
        energized,
        instance.risk_budget,
        extra={"hour": instance.hour},
    )
    dispatch = read_result(instance.network, hm, x, instance.demand_mw, instance.day, instance.hour)
    return OpsSolution(
        plan=plan,
        dispatch=dispatch,
        objective=out.objective,
        gap=out.gap,
        status=out.status,
        timed_out=out.timed_out,
        hint_accepted=out.hint_accepted,
        energized_risk=energized,
        statuses=statuses,
    )


def decide_ops(
    network: Network,
    risks: Mapping[int, float],
    metric: MetricKind,
    day: dt.date,
    demand_day_mw: np.ndarray,
    threshold_plan: DeEnergizationPlan,
    threshold_shed: DaySimulation | Sequence[float],
    *,
    epsilon_switch: float = DEFAULT_EPSILON,
    mip_gap: float = DEFAULT_MIP_GAP,
    time_limit: float | None = None,
    export_lp: str | Path | None = None,
) -> OpsSolution:
    """Solve the shutoff MILP at the threshold plan's worst-case hour, with
    the threshold plan as budget source and warm start."""
    hour = worst_case_hour(threshold_shed)
    instance = OpsInstance(
        network=network,
        day=day,
        metric=MetricKind(metric),
        hour=hour,
        risk_values=risks,
        risk_budget=risk_budget(threshold_plan),
        demand_mw=np.asarray(demand_day_mw)[hour],
        epsilon_switch=epsilon_switch,
        warm_start=statuses_from_off(network, threshold_plan.off_lines),
        mip_gap=mip_gap,
        time_limit=time_limit,
    )
    return solve_ops(instance, export_lp)


def plan_ops_day(
    network: Network,
    table: LineRiskTable | Mapping[int, float],
    metric: MetricKind,
    day: dt.date,
    demand_day_mw: np.ndarray,
    threshold_plan: DeEnergizationPlan,
    threshold_sim: DaySimulation | Sequence[float] | None = None,
    *,
    epsilon_switch: float = DEFAULT_EPSILON,
    mip_gap: float = DEFAULT_MIP_GAP,
    time_limit: float | None = None,
) -> tuple[OpsSolution, DaySimulation]:
    """Decide the day's shutoffs at its worst-case hour, then hold them for 24 hours."""
    metric = MetricKind(metric)
    risks = table.day_slice(day, metric) if isinstance(table, LineRiskTable) else dict(table)
    if threshold_sim is None:
        threshold_sim = simulate_day(network, threshold_plan.off_lines, demand_day_mw, day=day)
    sol = decide_ops(
        network, risks, metric, day, demand_day_mw, threshold_plan, threshold_sim,
        epsilon_switch=epsilon_switch, mip_gap=mip_gap, time_limit=time_limit,
    )
    return sol, simulate_day(network, sol.plan.off_lines, demand_day_mw, day=day)
