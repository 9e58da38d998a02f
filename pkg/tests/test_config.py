import datetime as dt
from pathlib import Path

import pytest
import yaml

from wildfire_psps.config import (
    DEFAULTS,
    ENV_TIME_LIMIT,
    ENV_WORKERS,
    apply_env,
    defaults_yaml,
    load_config,
    parse_config,
)
from wildfire_psps.errors import ConfigError
from wildfire_psps.metrics import ALL_METRICS, MetricKind


def test_defaults_parse():
    cfg = parse_config({}, Path("/base"))
    assert cfg.network == Path("/base/network.json")
    assert cfg.metrics == ALL_METRICS
    assert cfg.percentile == 95.0 and cfg.epsilon_switch == 0.01 and cfg.mip_gap == 1e-4
    assert cfg.time_limit_s is None and cfg.workers == 1
    assert cfg.training.start == dt.date(2019, 1, 1) and len(cfg.study.days()) == 366


def test_defaults_yaml_roundtrip():
    assert yaml.safe_load(defaults_yaml()) == DEFAULTS


def test_absolute_paths_kept():
    assert parse_config({"rasters": "/data/r"}, Path("/base")).rasters == Path("/data/r")


def test_metrics_normalized_and_ordered():
    cfg = parse_config({"metrics": ["hrcu", "MA", "MA"]})
    assert cfg.metrics == (MetricKind.MA, MetricKind.HRCU)


@pytest.mark.parametrize(
    "doc",
    [
        {"bogus": 1},
        {"percentile": 100},
        {"percentile": 0},
        {"percentile": "95"},
        {"epsilon_switch": 0},
        {"mip_gap": -0.1},
        {"time_limit_s": 0},
        {"workers": 1.5},
        {"workers": 0},
        {"workers": True},
        {"metrics": []},
        {"metrics": ["XX"]},
        {"study": {"start": "2020-02-01", "end": "2020-01-01"}},
        {"study": {"start": "2020-02-30", "end": "2020-03-01"}},
        {"training": {"start": "2019-01-01"}},
        {"network": ""},
    ],
)
def test_invalid_documents(doc):
    with pytest.raises(ConfigError):
        parse_config(doc)


def test_not_a_mapping():
    with pytest.raises(ConfigError):
        parse_config(["a"])


def test_env_overrides():
    cfg = parse_config({"time_limit_s": 5, "workers": 2})
    out = apply_env(cfg, {ENV_TIME_LIMIT: "12.5", ENV_WORKERS: "3"})
    assert out.time_limit_s == 12.5 and out.workers == 3
    assert apply_env(cfg, {}) is cfg
    for env in ({ENV_TIME_LIMIT: "soon"}, {ENV_TIME_LIMIT: "-1"}, {ENV_WORKERS: "two"}, {ENV_WORKERS: "0"}):
        with pytest.raises(ConfigError):
            apply_env(cfg, env)


def test_with_overrides_skips_none():
    cfg = parse_config({})
    assert cfg.with_overrides(mip_gap=None, epsilon_switch=0.5).epsilon_switch == 0.5
    assert cfg.with_overrides(mip_gap=None).mip_gap == 1e-4


def test_load_config_resolves_against_file(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_WORKERS, raising=False)
    monkeypatch.delenv(ENV_TIME_LIMIT, raising=False)
    (tmp_path / "rasters").mkdir()
    (tmp_path / "network.json").write_text("{}")
    (tmp_path / "demand.csv").write_text("")
    (tmp_path / "s.yaml").write_text("output_dir: results\n")
    cfg = load_config(tmp_path / "s.yaml")
    assert cfg.output_dir == tmp_path / "results"
    monkeypatch.setenv(ENV_WORKERS, "4")
    assert load_config(tmp_path / "s.yaml").workers == 4


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    (tmp_path / "bad.yaml").write_text("a: [1\n")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "bad.yaml")
    (tmp_path / "ok.yaml").write_text("workers: 1\n")
    with pytest.raises(ConfigError, match="network"):
        load_config(tmp_path / "ok.yaml")
    assert load_config(tmp_path / "ok.yaml", check_paths=False).workers == 1
