import shutil
from pathlib import Path

import pytest

from wildfire_psps import study
from wildfire_psps.config import load_config
from wildfire_psps.network import parse_network

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures" / "synthetic14"


def line(lid, a, b, x=0.1, limit=100.0, geom=((0.5, 0.5), (1.5, 0.5))):
    return {
        "id": lid,
        "from_bus": a,
        "to_bus": b,
        "susceptance_b": -1.0 / x,
        "flow_limit": limit,
        "angle_min": -0.5236,
        "angle_max": 0.5236,
        "geometry": [list(p) for p in geom],
    }


@pytest.fixture
def two_bus():
    """One 100 MW generator at bus 1, load at bus 2, one 80 MW line."""
    return parse_network(
        {
            "base_mva": 100.0,
            "buses": [{"id": 1}, {"id": 2}],
            "generators": [{"id": 1, "bus": 1, "p_min": 0.0, "p_max": 100.0}],
            "lines": [line(1, 1, 2, limit=80.0)],
        }
    )


@pytest.fixture
def triangle():
    """Generator at bus 1, loads at buses 2 and 3, equal reactances."""
    return parse_network(
        {
            "base_mva": 100.0,
            "buses": [{"id": 1}, {"id": 2}, {"id": 3}],
            "generators": [{"id": 1, "bus": 1, "p_min": 0.0, "p_max": 300.0}],
            "lines": [
                line(1, 1, 2, limit=60.0, geom=((0.5, 0.5), (2.5, 0.5))),
                line(2, 1, 3, limit=60.0, geom=((0.5, 0.5), (1.5, 2.5))),
                line(3, 2, 3, limit=60.0, geom=((2.5, 0.5), (1.5, 2.5))),
            ],
        }
    )


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR


def run_study(target: Path):
    """Copy the shipped fixture to ``target`` and run every stage."""
    shutil.copytree(FIXTURE_DIR, target)
    cfg = load_config(target / "study.yaml")
    study.run_risk(cfg)
    study.run_threshold(cfg)
    ops = study.run_ops(cfg)
    study.run_compare(cfg)
    return cfg, ops


@pytest.fixture(scope="session")
def study_run(tmp_path_factory):
    """The full fixture study, run once per session: (config, OPS stage result)."""
    return run_study(tmp_path_factory.mktemp("study") / "synthetic14")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """``criterion(n, ok, detail)``: record one acceptance line, then assert."""

    def record(n: int, ok: bool, detail: str) -> None:
        text = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(text)
        print(text)
        assert ok, text

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for text in sorted(ACCEPTANCE_LINES, key=lambda t: int(t.split()[1].rstrip(":"))):
            terminalreporter.write_line(text)
