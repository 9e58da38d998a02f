"""Study configuration (YAML) with validation and environment overrides."""

from __future__ import annotations

import dataclasses
import datetime as dt
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .metrics import ALL_METRICS, MetricKind

ENV_TIME_LIMIT = "WILDFIRE_PSPS_TIME_LIMIT_S"
ENV_WORKERS = "WILDFIRE_PSPS_WORKERS"


@dataclass(frozen=True)
class DateRange:
    start: dt.date
    end: dt.date

    def days(self) -> list[dt.date]:
        return [self.start + dt.timedelta(n) for n in range((self.end - self.start).days + 1)]

    @property
    def label(self) -> str:
        if self.start.year == self.end.year:
            return str(self.start.year)
        return f"{self.start.isoformat()}..{self.end.isoformat()}"


@dataclass(frozen=True)
class StudyConfig:
    network: Path
    rasters: Path
    demand: Path
    training: DateRange
    study: DateRange
    output_dir: Path
    metrics: tuple[MetricKind, ...] = ALL_METRICS
    percentile: float = 95.0
    epsilon_switch: float = 0.01
    mip_gap: float = 1e-4
    time_limit_s: float | None = None
    workers: int = 1

    def with_overrides(self, **kwargs) -> "StudyConfig":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return dataclasses.replace(self, **kwargs)

    def validate_paths(self) -> None:
        for name in ("network", "demand"):
            if not getattr(self, name).is_file():
                raise ConfigError(f"{name}: file not found: {getattr(self, name)}")
        if not self.rasters.is_dir():
            raise ConfigError(f"rasters: directory not found: {self.rasters}")


DEFAULTS: dict[str, Any] = {
    "network": "network.json",
    "rasters": "rasters",
    "demand": "demand.csv",
    "training": {"start": "2019-01-01", "end": "2019-12-31"},
    "study": {"start": "2020-01-01", "end": "2020-12-31"},
    "output_dir": "out",
    "metrics": [m.value for m in ALL_METRICS],
    "percentile": 95.0,
    "epsilon_switch": 0.01,
    "mip_gap": 1e-4,
    "time_limit_s": None,
    "workers": 1,
}

_KNOWN = set(DEFAULTS)


def defaults_yaml() -> str:
    return yaml.safe_dump(DEFAULTS, sort_keys=False)


def _date(value, key) -> dt.date:
    if isinstance(value, dt.date):
        return value
    try:
        return dt.date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"{key}: not an ISO date: {value!r}") from None


def _range(raw, key) -> DateRange:
    if not isinstance(raw, dict) or set(raw) != {"start", "end"}:
        raise ConfigError(f"{key}: expected a mapping with 'start' and 'end'")
    rng = DateRange(_date(raw["start"], f"{key}.start"), _date(raw["end"], f"{key}.end"))
    if rng.end < rng.start:
        raise ConfigError(f"{key}: end precedes start")
    return rng


def _number(raw, key, *, lo=None, hi=None, integer=False, open_lo=False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {raw!r}")
    if integer and int(raw) != raw:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}")
    if lo is not None and (raw < lo or (open_lo and raw == lo)):
        raise ConfigError(f"{key}: must be {'>' if open_lo else '>='} {lo}, got {raw}")
    if hi is not None and raw >= hi:
        raise ConfigError(f"{key}: must be < {hi}, got {raw}")
    return int(raw) if integer else float(raw)


def parse_config(doc: dict[str, Any], base_dir: Path = Path(".")) -> StudyConfig:
    """Validate a decoded config document; relative paths resolve against ``base_dir``."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(doc) - _KNOWN
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**DEFAULTS, **doc}

    def path(key):
        raw = merged[key]
        if not isinstance(raw, str) or not raw:
            raise ConfigError(f"{key}: expected a path string")
        p = Path(raw)
        return p if p.is_absolute() else base_dir / p

    metrics = merged["metrics"]
    if not isinstance(metrics, list) or not metrics:
        raise ConfigError("metrics: expected a non-empty list")
    try:
        metric_kinds = tuple(sorted({MetricKind(str(m).upper()) for m in metrics}, key=lambda m: m.column))
    except ValueError:
        raise ConfigError(f"metrics: unknown metric in {metrics}") from None
    pct = _number(merged["percentile"], "percentile", lo=0, hi=100, open_lo=True)
    eps = _number(merged["epsilon_switch"], "epsilon_switch", lo=0, open_lo=True)
    gap = _number(merged["mip_gap"], "mip_gap", lo=0)
    tl = merged["time_limit_s"]
    tl = None if tl is None else _number(tl, "time_limit_s", lo=0, open_lo=True)
    workers = _number(merged["workers"], "workers", lo=1, integer=True)
    return StudyConfig(
        network=path("network"),
        rasters=path("rasters"),
        demand=path("demand"),
        training=_range(merged["training"], "training"),
        study=_range(merged["study"], "study"),
        output_dir=path("output_dir"),
        metrics=metric_kinds,
        percentile=pct,
        epsilon_switch=eps,
        mip_gap=gap,
        time_limit_s=tl,
        workers=workers,
    )


def apply_env(cfg: StudyConfig, env=None) -> StudyConfig:
    env = os.environ if env is None else env
    updates = {}
    if env.get(ENV_TIME_LIMIT):
        try:
            updates["time_limit_s"] = _number(float(env[ENV_TIME_LIMIT]), ENV_TIME_LIMIT, lo=0, open_lo=True)
        except ValueError:
            raise ConfigError(f"{ENV_TIME_LIMIT}: not a number") from None
    if env.get(ENV_WORKERS):
        try:
            updates["workers"] = _number(int(env[ENV_WORKERS]), ENV_WORKERS, lo=1, integer=True)
        except ValueError:
            raise ConfigError(f"{ENV_WORKERS}: not an integer") from None
    return dataclasses.replace(cfg, **updates) if updates else cfg


def load_config(path: str | Path, *, check_paths: bool = True) -> StudyConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})") from None
    cfg = apply_env(parse_config(doc, path.parent))
    if check_paths:
        cfg.validate_paths()
    return cfg
