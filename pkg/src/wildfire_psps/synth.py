"""Deterministic synthetic study: a 14-bus, 20-line network, two years of daily
risk rasters, and hourly demand.

Generation sits in the north and the main load in the south.  Four short
corridor lines carry the transfer through a hot band; spur lines to
self-sufficient pockets and the redundant northern feeders sit in a milder
halo.  Switching off the corridor sheds load, while the halo lines can be
switched off almost for free.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .network import HOURS_PER_DAY, parse_network, save_network, write_demand
from .raster import RiskRaster, raster_filename, write_raster

GRID = 40
CELL = 1.0
NODATA_SENTINEL = -9999

# id: (x, y, load share, local generation MW)
BUSES = {
    1: (6.0, 36.0, 0.00, 330.0),
    2: (20.0, 37.0, 0.00, 260.0),
    3: (34.0, 36.0, 0.05, 0.0),
    4: (3.0, 22.0, 0.04, 45.0),
    5: (14.0, 19.0, 0.02, 0.0),
    6: (26.0, 19.0, 0.02, 0.0),
    7: (37.0, 22.0, 0.04, 45.0),
    8: (9.0, 7.0, 0.24, 40.0),
    9: (20.0, 6.0, 0.32, 80.0),
    10: (31.0, 7.0, 0.19, 30.0),
    11: (12.0, 29.0, 0.02, 25.0),
    12: (34.0, 17.0, 0.02, 25.0),
    13: (6.0, 17.0, 0.02, 25.0),
    14: (28.0, 29.0, 0.02, 25.0),
}

# (from, to, limit MW, reactance p.u., intermediate vertices)
LINES = [
    (1, 5, 160.0, 0.08, []),
    (2, 5, 160.0, 0.08, []),
    (2, 6, 160.0, 0.08, []),
    (3, 6, 140.0, 0.09, []),
    (5, 8, 150.0, 0.08, []),
    (5, 9, 170.0, 0.08, []),
    (6, 9, 170.0, 0.08, []),
    (6, 10, 150.0, 0.08, []),
    (1, 2, 250.0, 0.05, []),
    (2, 3, 200.0, 0.05, []),
    (1, 4, 120.0, 0.10, []),
    (4, 8, 100.0, 0.12, []),
    (3, 7, 120.0, 0.10, []),
    (7, 10, 100.0, 0.12, []),
    (8, 9, 150.0, 0.06, []),
    (9, 10, 150.0, 0.06, []),
    (5, 11, 60.0, 0.10, []),
    (6, 14, 60.0, 0.10, []),
    (6, 12, 60.0, 0.10, []),
    (5, 13, 60.0, 0.10, []),
]

# Hot band over the lower corridor, warm halo over the rest of the basin.
HOT_CENTER = (20.0, 13.0)
HOT_SPREAD = (14.0, 5.0)
HALO_CENTER = (20.0, 22.0)
HALO_RADIUS = 14.0
HALO_SHARE = 0.3


@dataclass(frozen=True)
class SynthParams:
    seed: int = 20201026
    peak_mw: float = 560.0
    training: tuple[dt.date, dt.date] = (dt.date(2019, 1, 1), dt.date(2019, 12, 31))
    study: tuple[dt.date, dt.date] = (dt.date(2020, 1, 1), dt.date(2020, 12, 31))


def network_document() -> dict:
    buses = [{"id": bid, "name": f"bus{bid}"} for bid in BUSES]
    gens = []
    for bid, (_, _, _, cap) in BUSES.items():
        if cap > 0:
            gens.append({"id": len(gens) + 1, "bus": bid, "p_min": round(0.1 * cap, 1), "p_max": cap})
    lines = []
    for k, (fb, tb, limit, x, via) in enumerate(LINES, start=1):
        pts = [BUSES[fb][:2], *via, BUSES[tb][:2]]
        lines.append(
            {
                "id": k,
                "from_bus": fb,
                "to_bus": tb,
                "susceptance_b": -1.0 / x,
                "flow_limit": limit,
                "angle_min": -0.5236,
                "angle_max": 0.5236,
                "geometry": [list(p) for p in pts],
            }
        )
    return {"base_mva": 100.0, "buses": buses, "generators": gens, "lines": lines}


def _smooth_noise(rng: np.random.Generator, shape, passes: int = 4) -> np.ndarray:
    field = rng.normal(size=shape)
    for _ in range(passes):
        field = (field + np.roll(field, 1, 0) + np.roll(field, -1, 0) + np.roll(field, 1, 1) + np.roll(field, -1, 1)) / 5
    return field / (field.std() or 1.0)


def _fire_intensity(days: list[dt.date], rng: np.random.Generator) -> np.ndarray:
    """Seasonal fire intensity in [0, ~1.3] with multi-day wind events."""
    n = len(days)
    doy = np.array([d.timetuple().tm_yday for d in days], dtype=float)
    season = np.clip(np.sin(math.pi * (doy - 140) / 200), 0, None) ** 2
    level = 0.55 * season + 0.08 * rng.random(n)
    start = 0
    while start < n:
        start += int(rng.integers(9, 25))
        if start >= n:
            break
        length = int(rng.integers(2, 6))
        boost = (0.45 + 0.4 * rng.random()) * (0.25 + season[start])
        level[start : start + length] += boost
    return level


def risk_fields(days: list[dt.date], rng: np.random.Generator) -> list[np.ndarray]:
    yy, xx = np.mgrid[0:GRID, 0:GRID]
    cx = xx + 0.5
    cy = (GRID - 1 - yy) + 0.5
    band = np.exp(-(((cx - HOT_CENTER[0]) / HOT_SPREAD[0]) ** 2) - ((cy - HOT_CENTER[1]) / HOT_SPREAD[1]) ** 2)
    halo = np.exp(-((cx - HALO_CENTER[0]) ** 2 + (cy - HALO_CENTER[1]) ** 2) / HALO_RADIUS**2)
    basin = np.maximum(band, HALO_SHARE * halo)
    relief = _smooth_noise(rng, (GRID, GRID))
    background = 22 + 8 * relief + 8 * (cy / GRID)
    nodata = (cy < 3) & (cx > 34) | ((cx - 8) ** 2 + (cy - 26) ** 2 < 4)
    intensity = _fire_intensity(days, rng)
    out = []
    for level in intensity:
        day_noise = 6 * _smooth_noise(rng, (GRID, GRID), passes=2)
        vals = background * (0.85 + 0.2 * level) + 125 * level * basin * (1 + 0.15 * relief) + day_noise
        vals = np.clip(np.rint(vals), 0, None)
        vals[nodata] = np.nan
        out.append(vals)
    return out


def demand_profile(days: list[dt.date], peak_mw: float, rng: np.random.Generator) -> dict[dt.date, np.ndarray]:
    hours = np.arange(HOURS_PER_DAY)
    shape = 0.62 + 0.38 * np.exp(-((hours - 17.5) ** 2) / 18.0) + 0.08 * np.exp(-((hours - 9) ** 2) / 6.0)
    shares = np.array([BUSES[b][2] for b in BUSES])
    out = {}
    for d in days:
        doy = d.timetuple().tm_yday
        season = 0.82 + 0.18 * math.sin(math.pi * (doy - 120) / 240) ** 2 if 120 <= doy <= 360 else 0.82
        scale = peak_mw * season * (1 + 0.03 * rng.standard_normal())
        out[d] = np.round(np.outer(shape / shape.max() * scale, shares), 3)
    return out


def _days(rng_pair):
    a, b = rng_pair
    return [a + dt.timedelta(n) for n in range((b - a).days + 1)]


def generate(out_dir: str | Path, params: SynthParams = SynthParams()) -> Path:
    """Write network.json, demand.csv, rasters/ and study.yaml; returns the config path."""
    out_dir = Path(out_dir)
    (out_dir / "rasters").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(params.seed)
    doc = network_document()
    network = parse_network(doc)
    save_network(network, out_dir / "network.json")
    for span in (params.training, params.study):
        days = _days(span)
        for day, vals in zip(days, risk_fields(days, rng)):
            write_raster(RiskRaster(day, GRID, GRID, 0.0, 0.0, CELL, vals), out_dir / "rasters" / raster_filename(day), NODATA_SENTINEL)
    study_days = _days(params.study)
    write_demand(out_dir / "demand.csv", demand_profile(study_days, params.peak_mw, rng), network)
    cfg = {
        "network": "network.json",
        "rasters": "rasters",
        "demand": "demand.csv",
        "training": {"start": params.training[0].isoformat(), "end": params.training[1].isoformat()},
        "study": {"start": params.study[0].isoformat(), "end": params.study[1].isoformat()},
        "output_dir": "out",
        "metrics": ["MA", "ME", "CU", "HRMA", "HRME", "HRCU"],
        "percentile": 95.0,
        "epsilon_switch": 0.01,
        "mip_gap": 0.0,
        "time_limit_s": None,
        "workers": 1,
    }
    cfg_path = out_dir / "study.yaml"
    cfg_path.write_text(yaml.safe_dump(cfg, sort_keys=False), encoding="utf-8")
    return cfg_path
