import copy
import datetime as dt
import json

import numpy as np
import pytest

from wildfire_psps.errors import DanglingReferenceError, DuplicateError, SchemaError, ValidationError
from wildfire_psps.network import demand_by_day, load_demand, load_network, parse_network, save_network, write_demand

from conftest import line


def doc_two_bus():
    return {
        "base_mva": 100.0,
        "buses": [{"id": 1, "name": "a"}, {"id": 2, "name": "b"}],
        "generators": [{"id": 1, "bus": 1, "p_min": 0.0, "p_max": 100.0}],
        "lines": [line(1, 1, 2)],
    }


def test_two_bus_counts(two_bus):
    assert two_bus.n_buses == 2
    assert len(two_bus.lines) == 1
    assert two_bus.generators[0].p_max == pytest.approx(1.0)  # per-unit


def test_fixture_network_counts(fixture_dir):
    net = load_network(fixture_dir / "network.json")
    assert net.n_buses == 14
    assert len(net.lines) == 20
    assert len(net.components()) == 1


def test_dangling_bus_names_line():
    doc = doc_two_bus()
    doc["lines"][0]["to_bus"] = 99
    with pytest.raises(DanglingReferenceError, match="line 1: bus 99"):
        parse_network(doc)


@pytest.mark.parametrize(
    "mutate, exc",
    [
        (lambda d: d.pop("lines"), SchemaError),
        (lambda d: d["buses"].append({"id": 1}), DuplicateError),
        (lambda d: d["lines"][0].update(flow_limit=-1), ValidationError),
        (lambda d: d["lines"][0].update(susceptance_b=0), ValidationError),
        (lambda d: d["lines"][0].update(to_bus=1), ValidationError),
        (lambda d: d["generators"][0].update(p_min=200), ValidationError),
        (lambda d: d["lines"][0].update(geometry=[[0, 0]]), SchemaError),
        (lambda d: d["lines"][0].update(geometry=[[1, 1], [1, 1]]), ValidationError),
        (lambda d: d["generators"][0].pop("p_max"), SchemaError),
    ],
)
def test_invalid_documents(mutate, exc):
    doc = copy.deepcopy(doc_two_bus())
    mutate(doc)
    with pytest.raises(exc):
        parse_network(doc)


def test_roundtrip(tmp_path, fixture_dir):
    net = load_network(fixture_dir / "network.json")
    save_network(net, tmp_path / "n.json")
    assert load_network(tmp_path / "n.json") == net


def test_planning_lower_bound_is_relaxed():
    doc = doc_two_bus()
    doc["generators"][0]["p_min"] = 20.0
    gen = parse_network(doc).generators[0]
    assert gen.p_min == pytest.approx(0.2)
    assert gen.planning_p_min == 0.0


def test_components_and_references(triangle):
    assert triangle.components() == [[1, 2, 3]]
    assert triangle.components(line_ids=[3]) == [[1], [2, 3]]
    assert triangle.reference_buses() == [1]


def test_invalid_json(tmp_path):
    p = tmp_path / "n.json"
    p.write_text("{nope")
    with pytest.raises(SchemaError):
        load_network(p)


def _demand_csv(tmp_path, rows):
    p = tmp_path / "demand.csv"
    p.write_text("day,hour,bus,mw\n" + "\n".join(rows) + "\n")
    return p


def test_demand_roundtrip(tmp_path, two_bus):
    day = dt.date(2020, 1, 1)
    arr = np.zeros((24, 2))
    arr[:, 1] = np.arange(24)
    write_demand(tmp_path / "d.csv", {day: arr}, two_bus)
    got = demand_by_day(load_demand(tmp_path / "d.csv", two_bus), two_bus)
    np.testing.assert_array_equal(got[day], arr)


def test_demand_absent_bus_is_zero(tmp_path, two_bus):
    rows = [f"2020-01-01,{h},2,5" for h in range(24)]
    got = demand_by_day(load_demand(_demand_csv(tmp_path, rows), two_bus), two_bus)
    assert got[dt.date(2020, 1, 1)][:, 0].sum() == 0
    assert got[dt.date(2020, 1, 1)][:, 1].sum() == 120


@pytest.mark.parametrize(
    "rows, exc",
    [
        ([f"2020-01-01,{h},2,5" for h in range(23)], ValidationError),
        ([f"2020-01-01,{h},2,5" for h in range(24)] + ["2020-01-01,0,2,5"], DuplicateError),
        ([f"2020-01-01,{h},2,{-1 if h == 3 else 5}" for h in range(24)], ValidationError),
        (["2020-01-01,0,7,5"], DanglingReferenceError),
        (["2020-01-01,24,2,5"], ValidationError),
        (["2020-01-01,x,2,5"], SchemaError),
        ([f"2020-01-0{d},{h},2,5" for d in (1, 3) for h in range(24)], ValidationError),
    ],
)
def test_demand_errors(tmp_path, two_bus, rows, exc):
    with pytest.raises(exc):
        load_demand(_demand_csv(tmp_path, rows), two_bus)


def test_fixture_demand_covers_study_year(fixture_dir):
    net = load_network(fixture_dir / "network.json")
    days = demand_by_day(load_demand(fixture_dir / "demand.csv", net), net)
    assert len(days) == 366
    assert all(v.shape == (24, 14) and (v >= 0).all() for v in days.values())


def test_to_dict_is_json(two_bus):
    json.dumps(two_bus.to_dict())
