
import highspy
import pytest

from wildfire_psps.errors import InternalSolverError
from wildfire_psps.solver import INF, HighsSession, LinearModel, solve


def knapsack():
    m = LinearModel("knap")
    a = m.add_binary("a", cost=-5.0)
    b = m.add_binary("b", cost=-4.0)
    c = m.add_binary("c", cost=-3.0)
    m.add_row("cap", {a: 2.0, b: 3.0, c: 1.0}, upper=4.0)
    m.objective_offset = 1.0
    return m


def test_model_building():
    m = LinearModel()
    x = m.add_var("x", -1.0, 2.0, cost=1.0)
    y = m.add_var("y")
    r = m.add_row("r", {x: 1.0, y: 2.0}, lower=1.0)
    assert (m.num_cols, m.num_rows, m.num_integer) == (2, 1, 0)
    assert m.row_index[r] == [0, 1]
    m.add_row("merge", {y: 1.0, x: 0.0})
    assert m.row_index[1] == [1]  # zero coefficient dropped
    assert m.row_activity([1.0, 2.0]).tolist() == [5.0, 2.0]
    assert m.max_violation([-2.0, 0.0]) == pytest.approx(3.0)
    assert m.max_violation([1.0, 0.0]) == 0.0


def test_lp_solve():
    m = LinearModel()
    x = m.add_var("x", 0, INF, cost=1.0)
    y = m.add_var("y", 0, INF, cost=2.0)
    m.add_row("cover", {x: 1.0, y: 1.0}, lower=3.0)
    m.add_row("xcap", {x: 1.0}, upper=1.0)
    out = solve(m)
    assert out.status == "optimal" and out.gap == 0.0
    assert out.objective == pytest.approx(5.0)
    assert out.x == pytest.approx([1.0, 2.0])


def test_mip_solve_with_offset_and_hint():
    m = knapsack()
    out = solve(m, mip_gap=0.0)
    assert out.objective == pytest.approx(-7.0)  # a + c, plus offset 1
    assert m.objective(out.x) == pytest.approx(out.objective)
    warm = solve(m, hint=out.x, mip_gap=0.0)
    assert warm.hint_accepted is True and warm.objective == pytest.approx(out.objective)


def test_infeasible_raises_with_dump():
    m = LinearModel("bad")
    x = m.add_var("x", 0, 1)
    m.add_row("r", {x: 1.0}, lower=2.0)
    with pytest.raises(InternalSolverError) as err:
        solve(m)
    assert "Subject To" in err.value.model_dump


def test_session_bound_updates():
    m = LinearModel()
    x = m.add_var("x", 0, 1, cost=-1.0)
    s = HighsSession(m, mip_gap=0.0)
    assert s.solve().objective == pytest.approx(-1.0)
    s.set_col_bounds([x], [0.0], [3.0])
    assert s.solve().objective == pytest.approx(-3.0)
    r = m.add_row("r", {x: 1.0}, upper=2.0)
    s2 = HighsSession(m, mip_gap=0.0)
    s2.set_row_bounds([r], [-INF], [0.5])
    assert s2.solve().objective == pytest.approx(-0.5)
    assert m.row_upper[r] == 0.5


def test_lp_text_reads_back(tmp_path):
    m = knapsack()
    path = tmp_path / "k.lp"
    path.write_text(m.to_lp_text())
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    h.run()
    assert h.getInfo().objective_function_value == pytest.approx(solve(m, mip_gap=0.0).objective)
