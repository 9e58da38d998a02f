import datetime as dt
import math
import random

import numpy as np
import pytest

from conftest import line
from wildfire_psps.dispatch import dispatch_fixed, simulate_day, statuses_from_off
from wildfire_psps.errors import DataError, ValidationError
from wildfire_psps.metrics import MetricKind
from wildfire_psps.network import parse_network
from wildfire_psps.oracle import enumerate_ops, random_ops_instance
from wildfire_psps.ops import OpsInstance, decide_ops, plan_ops_day, risk_budget, solve_ops, worst_case_hour
from wildfire_psps.threshold import DeEnergizationPlan, Method, plan_from_risks

DAY = dt.date(2020, 8, 1)
EPS = 0.01


def instance(net, risks, budget, demand, **kw):
    return OpsInstance(net, DAY, MetricKind.CU, 0, risks, budget, demand, mip_gap=0.0, **kw)


def weak_triangle():
    """Loop flow overloads the 30 MW 1-3 line; opening it clears the path."""
    return parse_network(
        {
            "base_mva": 100.0,
            "buses": [{"id": 1}, {"id": 2}, {"id": 3}],
            "generators": [{"id": 1, "bus": 1, "p_min": 0.0, "p_max": 300.0}],
            "lines": [line(1, 1, 2, limit=200.0), line(2, 1, 3, limit=30.0), line(3, 2, 3, limit=200.0)],
        }
    )


def test_worst_case_hour():
    shed = [0.0] * 24
    shed[18] = 5.0
    assert worst_case_hour(shed) == 18
    assert worst_case_hour([0.0] * 24) == 0
    tie = [0.0] * 24
    tie[10] = tie[20] = 3.0
    assert worst_case_hour(tie) == 10
    tie[20] += 1e-12  # within tolerance
    assert worst_case_hour(tie) == 10
    with pytest.raises(DataError):
        worst_case_hour([])


def test_risk_budget():
    plan = DeEnergizationPlan(DAY, MetricKind.CU, Method.THRESHOLD, frozenset({1}), 5.0, 5.0)
    assert risk_budget(plan) == 5.0
    assert risk_budget(plan_from_risks({1: 3.0, 2: 4.0, 3: 0.0}, 10.0, DAY, MetricKind.CU)) == 7.0


def test_instance_validation(triangle):
    risks = {1: 1.0, 2: 1.0, 3: 1.0}
    with pytest.raises(ValidationError):
        instance(triangle, risks, -1.0, [0, 0, 0])
    with pytest.raises(ValidationError):
        instance(triangle, risks, 1.0, [0, 0, 0], epsilon_switch=0.0)
    with pytest.raises(DataError):
        instance(triangle, {1: 1.0}, 1.0, [0, 0, 0])
    with pytest.raises(ValidationError):
        instance(triangle, {1: 1.0, 2: -1.0, 3: 0.0}, 1.0, [0, 0, 0])


def test_no_switchable_lines_reduces_to_dispatch(triangle):
    demand = [0.0, 70.0, 80.0]
    sol = solve_ops(instance(triangle, {1: 0.0, 2: 0.0, 3: 0.0}, 0.0, demand))
    ref = dispatch_fixed(triangle, {1: 1, 2: 1, 3: 1}, demand)
    assert sol.plan.off_lines == frozenset()
    assert sol.dispatch.total_shed == pytest.approx(ref.total_shed, abs=1e-7)
    assert sol.objective == pytest.approx(ref.objective, abs=1e-9)


def test_zero_budget_switches_everything_off(triangle):
    sol = solve_ops(instance(triangle, {1: 1.0, 2: 2.0, 3: 3.0}, 0.0, [0.0, 10.0, 10.0]))
    assert sol.plan.off_lines == {1, 2, 3}
    assert sol.dispatch.total_shed == pytest.approx(20.0)


def test_single_switchable_line_stays_on_when_it_carries_load(two_bus):
    inst = instance(two_bus, {1: 4.0}, 4.0, [0.0, 50.0])
    sol = solve_ops(inst)
    assert sol.statuses == {1: 1}
    # two-point enumeration: on -> shed 0, off -> shed 0.5 p.u. + eps
    assert sol.objective == pytest.approx(0.0, abs=1e-9)
    assert enumerate_ops(two_bus, inst).evaluations == 2


def test_opening_a_loop_line_reduces_shed():
    net = weak_triangle()
    sol = solve_ops(instance(net, {1: 1.0, 2: 1.0, 3: 1.0}, 3.0, [0.0, 0.0, 150.0]))
    assert sol.plan.off_lines == {2}
    assert sol.dispatch.total_shed == pytest.approx(0.0, abs=1e-7)
    assert sol.objective == pytest.approx(EPS)


def test_triangle_tight_budget_matches_enumeration(triangle):
    inst = instance(triangle, {1: 5.0, 2: 3.0, 3: 4.0}, 6.0, [0.0, 70.0, 90.0])
    sol = solve_ops(inst)
    ref = enumerate_ops(triangle, inst)
    assert ref.evaluations == 4  # all off, or exactly one line on
    assert sol.objective == pytest.approx(ref.objective, abs=1e-6)
    assert sol.energized_risk <= 6.0


def test_enumeration_on_random_instances():
    rng = random.Random(11)
    for _ in range(8):
        inst = random_ops_instance(rng, max_buses=7, max_switchable=8)
        assert solve_ops(inst).objective == pytest.approx(enumerate_ops(inst.network, inst).objective, abs=1e-6)


def test_enumeration_excludes_all_on_when_over_budget(triangle):
    inst = instance(triangle, {1: 1.0, 2: 1.0, 3: 1.0}, 2.5, [0.0, 10.0, 10.0])
    assert enumerate_ops(triangle, inst).evaluations == 7


def test_warm_start_at_optimum(triangle):
    inst = instance(triangle, {1: 5.0, 2: 3.0, 3: 4.0}, 6.0, [0.0, 70.0, 90.0])
    cold = solve_ops(inst)
    inst.warm_start = cold.statuses
    warm = solve_ops(inst)
    assert warm.hint_accepted is True
    assert warm.objective == pytest.approx(cold.objective, abs=1e-9)


def test_over_budget_warm_start_is_ignored(triangle):
    inst = instance(triangle, {1: 5.0, 2: 3.0, 3: 4.0}, 6.0, [0.0, 70.0, 90.0], warm_start={1: 1, 2: 1, 3: 1})
    sol = solve_ops(inst)
    assert sol.hint_accepted is None
    assert sol.energized_risk <= 6.0


def test_returned_solution_obeys_model(triangle):
    demand = [0.0, 70.0, 90.0]
    sol = solve_ops(instance(triangle, {1: 5.0, 2: 3.0, 3: 4.0}, 8.0, demand))
    res = sol.dispatch
    assert res.balance_residual_pu <= 1e-6
    for ln in triangle.lines:
        if sol.statuses[ln.id] == 0:
            assert res.flow_mw[ln.id] == 0.0
            assert abs(res.angle_rad[ln.from_bus] - res.angle_rad[ln.to_bus]) <= 2 * math.pi + 1e-9
        else:
            dtheta = res.angle_rad[ln.from_bus] - res.angle_rad[ln.to_bus]
            assert res.flow_mw[ln.id] / 100 == pytest.approx(-ln.susceptance_b * dtheta, abs=1e-6)
    ref = dispatch_fixed(triangle, sol.statuses, demand)
    off = sum(1 for z in sol.statuses.values() if z == 0)
    assert sol.objective == pytest.approx(ref.objective + EPS * off, abs=1e-7)


def test_no_line_stays_off_needlessly():
    rng = random.Random(5)
    for _ in range(6):
        inst = random_ops_instance(rng, max_buses=6, max_switchable=6)
        sol = solve_ops(inst)
        base = dispatch_fixed(inst.network, sol.statuses, inst.demand_mw).objective
        for lid in sol.plan.off_lines:
            flipped = {**sol.statuses, lid: 1}
            if residual_ok(inst, flipped):
                assert dispatch_fixed(inst.network, flipped, inst.demand_mw).objective > base + 1e-7


def residual_ok(inst, statuses):
    return math.fsum(inst.risk_values[l] for l, z in statuses.items() if z) <= inst.risk_budget


def test_zero_demand_day_keeps_everything_on(triangle):
    risks = {1: 5.0, 2: 3.0, 3: 4.0}
    thr = plan_from_risks(risks, 100.0, DAY, MetricKind.CU)
    sol, sim = plan_ops_day(triangle, risks, MetricKind.CU, DAY, np.zeros((24, 3)), thr, mip_gap=0.0)
    assert sol.plan.off_lines == frozenset()
    assert sim.total_shed_mwh == 0.0
    assert sol.plan.extra["hour"] == 0


def test_decision_hour_dominance(triangle):
    rng = np.random.default_rng(2)
    demand = rng.uniform(20, 110, size=(24, 3))
    demand[:, 0] = 0
    risks = {1: 9.0, 2: 2.0, 3: 7.0}
    thr = plan_from_risks(risks, 5.0, DAY, MetricKind.CU)
    thr_sim = simulate_day(triangle, thr.off_lines, demand)
    sol = decide_ops(triangle, risks, MetricKind.CU, DAY, demand, thr, thr_sim, mip_gap=0.0)
    h = worst_case_hour(thr_sim)
    assert sol.dispatch.hour == h
    assert sol.energized_risk <= thr.residual_risk * (1 + 1e-9)
    assert sol.dispatch.objective + EPS * len(sol.plan.off_lines) <= thr_sim.hours[h].objective + EPS * len(thr.off_lines) + 1e-9


def test_lp_export(tmp_path, triangle):
    path = tmp_path / "m.lp"
    solve_ops(instance(triangle, {1: 5.0, 2: 3.0, 3: 4.0}, 6.0, [0.0, 70.0, 90.0]), export_lp=path)
    text = path.read_text()
    assert text.startswith("\\ ops_")
    for token in ("Minimize", "Subject To", "risk_budget_hi", "Binaries", "z_1 z_2 z_3", "End"):
        assert token in text


def test_statuses_feed_day_simulation(triangle):
    demand = np.tile([0.0, 70.0, 90.0], (24, 1))
    risks = {1: 5.0, 2: 3.0, 3: 4.0}
    thr = plan_from_risks(risks, 4.5, DAY, MetricKind.CU)
    sol, sim = plan_ops_day(triangle, risks, MetricKind.CU, DAY, demand, thr, mip_gap=0.0)
    ref = simulate_day(triangle, sol.plan.off_lines, demand)
    assert sim.hourly_shed == pytest.approx(ref.hourly_shed)
    assert statuses_from_off(triangle, sol.plan.off_lines) == sol.statuses
