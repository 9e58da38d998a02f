"""Power network data model and ingestion of network and demand files.

Network files are JSON documents (see ``docs/formats.md``).  Power quantities
are stored in MW in the file and converted to per-unit on the system base
exactly once, at load time.  Demand stays in MW; the dispatch layer divides
by ``base_mva`` when it builds a model.
"""

from __future__ import annotations

import csv
import datetime as dt
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import DanglingReferenceError, DuplicateError, SchemaError, ValidationError

logger = logging.getLogger(__name__)

HOURS_PER_DAY = 24

#: Fixture default for angle-difference limits (30 degrees), used when a
#: network file omits them.
DEFAULT_ANGLE_LIMIT = 0.5236


@dataclass(frozen=True)
class Bus:
    id: int
    name: str = ""


@dataclass(frozen=True)
class Generator:
    """Generator with limits in per-unit.

    ``p_min`` is kept as given in the file for reporting; planners always
    use a lower bound of zero (see :attr:`planning_p_min`).
    """

    id: int
    bus: int
    p_min: float
    p_max: float

    @property
    def planning_p_min(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Line:
    """Transmission line.

    Attributes:
        id: Line identifier.
        from_bus: Bus id at the sending end.
        to_bus: Bus id at the receiving end.
        susceptance_b: Series susceptance in per-unit; flow is
            ``-b * (theta_from - theta_to)``.
        flow_limit: Thermal limit in per-unit.
        angle_min: Lower bound on ``theta_from - theta_to`` (rad).
        angle_max: Upper bound on ``theta_from - theta_to`` (rad).
        geometry: Polyline vertices in raster CRS units.
    """

    id: int
    from_bus: int
    to_bus: int
    susceptance_b: float
    flow_limit: float
    angle_min: float
    angle_max: float
    geometry: tuple[tuple[float, float], ...]

    @property
    def length(self) -> float:
        return sum(math.dist(a, b) for a, b in zip(self.geometry, self.geometry[1:]))


@dataclass(frozen=True)
class DemandSeries:
    bus: int
    day: dt.date
    hourly_mw: tuple[float, ...]


@dataclass(frozen=True)
class Network:
    base_mva: float
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]
    bus_index: Mapping[int, int] = field(init=False, repr=False, compare=False)
    line_index: Mapping[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "bus_index", {b.id: i for i, b in enumerate(self.buses)})
        object.__setattr__(self, "line_index", {ln.id: i for i, ln in enumerate(self.lines)})

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    def line(self, line_id: int) -> Line:
        return self.lines[self.line_index[line_id]]

    def components(self, line_ids: Iterable[int] | None = None) -> list[list[int]]:
        """Connected components (lists of bus ids, each sorted) of the graph
        formed by ``line_ids`` (all lines when omitted)."""
        parent = list(range(self.n_buses))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        chosen = self.lines if line_ids is None else [self.line(i) for i in line_ids]
        for ln in chosen:
            a, b = find(self.bus_index[ln.from_bus]), find(self.bus_index[ln.to_bus])
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups: dict[int, list[int]] = defaultdict(list)
        for i, bus in enumerate(self.buses):
            groups[find(i)].append(bus.id)
        return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])

    def reference_buses(self) -> list[int]:
        """Lowest bus id of each connected component of the full topology."""
        return [comp[0] for comp in self.components()]

    def to_dict(self) -> dict[str, Any]:
        """Serialize back to the file schema (MW units)."""
        base = self.base_mva
        return {
            "base_mva": base,
            "buses": [{"id": b.id, "name": b.name} for b in self.buses],
            "generators": [
                {"id": g.id, "bus": g.bus, "p_min": g.p_min * base, "p_max": g.p_max * base}
                for g in self.generators
            ],
            "lines": [
                {
                    "id": ln.id,
                    "from_bus": ln.from_bus,
                    "to_bus": ln.to_bus,
                    "susceptance_b": ln.susceptance_b,
                    "flow_limit": ln.flow_limit * base,
                    "angle_min": ln.angle_min,
                    "angle_max": ln.angle_max,
                    "geometry": [list(p) for p in ln.geometry],
                }
                for ln in self.lines
            ],
        }


def _field(record: Mapping[str, Any], name: str, kind: str, idx: int, cast=float):
    if name not in record:
        raise SchemaError(f"{kind} record {idx}: missing field '{name}'")
    value = record[name]
    try:
        if cast is int:
            if isinstance(value, bool) or not float(value).is_integer():
                raise ValueError
            return int(value)
        if cast is float:
            if isinstance(value, bool):
                raise ValueError
            out = float(value)
            if not math.isfinite(out):
                raise ValueError
            return out
        return cast(value)
    except (TypeError, ValueError):
        raise SchemaError(f"{kind} record {idx}: field '{name}' has invalid value {value!r}") from None


def parse_network(doc: Mapping[str, Any]) -> Network:
    """Build a :class:`Network` from a decoded network document."""
    if not isinstance(doc, Mapping):
        raise SchemaError("network document must be a JSON object")
    for key in ("base_mva", "buses", "generators", "lines"):
        if key not in doc:
            raise SchemaError(f"network: missing top-level key '{key}'")
    base = _field(doc, "base_mva", "network", 0)
    if base <= 0:
        raise ValidationError(f"network: base_mva must be positive, got {base}")

    buses = []
    seen: set[int] = set()
    for i, rec in enumerate(doc["buses"]):
        bid = _field(rec, "id", "bus", i, int)
        if bid in seen:
            raise DuplicateError(f"bus record {i}: duplicate bus id {bid}")
        seen.add(bid)
        buses.append(Bus(bid, str(rec.get("name", ""))))
    buses.sort(key=lambda b: b.id)

    generators = []
    gen_ids: set[int] = set()
    for i, rec in enumerate(doc["generators"]):
        gid = _field(rec, "id", "generator", i, int)
        if gid in gen_ids:
            raise DuplicateError(f"generator record {i}: duplicate generator id {gid}")
        gen_ids.add(gid)
        bus = _field(rec, "bus", "generator", i, int)
        if bus not in seen:
            raise DanglingReferenceError(f"generator {gid}: bus {bus} does not exist")
        p_min = _field(rec, "p_min", "generator", i) if "p_min" in rec else 0.0
        p_max = _field(rec, "p_max", "generator", i)
        if not 0 <= p_min <= p_max:
            raise ValidationError(f"generator {gid}: need 0 <= p_min <= p_max, got {p_min}, {p_max}")
        generators.append(Generator(gid, bus, p_min / base, p_max / base))

    lines = []
    line_ids: set[int] = set()
    for i, rec in enumerate(doc["lines"]):
        lid = _field(rec, "id", "line", i, int)
        if lid in line_ids:
            raise DuplicateError(f"line record {i}: duplicate line id {lid}")
        line_ids.add(lid)
        fb = _field(rec, "from_bus", "line", i, int)
        tb = _field(rec, "to_bus", "line", i, int)
        for end in (fb, tb):
            if end not in seen:
                raise DanglingReferenceError(f"line {lid}: bus {end} does not exist")
        if fb == tb:
            raise ValidationError(f"line {lid}: from_bus equals to_bus ({fb})")
        b = _field(rec, "susceptance_b", "line", i)
        if b == 0:
            raise ValidationError(f"line {lid}: susceptance_b must be non-zero")
        limit = _field(rec, "flow_limit", "line", i)
        if limit <= 0:
            raise ValidationError(f"line {lid}: flow_limit must be positive, got {limit}")
        amin = _field(rec, "angle_min", "line", i) if "angle_min" in rec else -DEFAULT_ANGLE_LIMIT
        amax = _field(rec, "angle_max", "line", i) if "angle_max" in rec else DEFAULT_ANGLE_LIMIT
        if not amin < amax:
            raise ValidationError(f"line {lid}: angle_min must be below angle_max")
        geometry = _parse_geometry(rec.get("geometry"), lid)
        lines.append(Line(lid, fb, tb, b, limit / base, amin, amax, geometry))

    net = Network(base, tuple(buses), tuple(generators), tuple(lines))
    if len(net.components()) > 1:
        logger.warning("network has %d islands with all lines energized", len(net.components()))
    return net


def _parse_geometry(raw, lid: int) -> tuple[tuple[float, float], ...]:
    if not isinstance(raw, Sequence) or len(raw) < 2:
        raise SchemaError(f"line {lid}: field 'geometry' needs at least two [x, y] points")
    pts = []
    for k, p in enumerate(raw):
        try:
            x, y = (float(c) for c in p)
        except (TypeError, ValueError):
            raise SchemaError(f"line {lid}: geometry point {k} is not an [x, y] pair") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise SchemaError(f"line {lid}: geometry point {k} is not finite")
        pts.append((x, y))
    geometry = tuple(pts)
    if sum(math.dist(a, b) for a, b in zip(geometry, geometry[1:])) <= 0:
        raise ValidationError(f"line {lid}: geometry has zero length")
    return geometry


def load_network(path: str | Path) -> Network:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return parse_network(doc)


def save_network(network: Network, path: str | Path) -> None:
    Path(path).write_text(json.dumps(network.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_demand(path: str | Path, network: Network) -> list[DemandSeries]:
    """Read an hourly demand CSV (``day,hour,bus,mw``).

    Every bus that appears in the file must have all 24 hours for every day
    between the first and last date in the file.  Buses absent from the file
    have zero demand.

    Returns:
        DemandSeries ordered by (day, bus).
    """
    path = Path(path)
    cells: dict[tuple[int, dt.date], list[float | None]] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) < {"day", "hour", "bus", "mw"}:
            raise SchemaError(f"{path}: header must be day,hour,bus,mw")
        for lineno, row in enumerate(reader, start=2):
            try:
                day = dt.date.fromisoformat(row["day"].strip())
                hour = int(row["hour"])
                bus = int(row["bus"])
                mw = float(row["mw"])
            except (TypeError, ValueError):
                raise SchemaError(f"{path}:{lineno}: malformed row {row}") from None
            if bus not in network.bus_index:
                raise DanglingReferenceError(f"{path}:{lineno}: bus {bus} does not exist")
            if not 0 <= hour < HOURS_PER_DAY:
                raise ValidationError(f"{path}:{lineno}: hour {hour} outside 0-23")
            if not mw >= 0 or not math.isfinite(mw):
                raise ValidationError(f"{path}:{lineno}: demand must be >= 0, got {mw}")
            slot = cells.setdefault((bus, day), [None] * HOURS_PER_DAY)
            if slot[hour] is not None:
                raise DuplicateError(f"{path}:{lineno}: duplicate entry for bus {bus}, {day}, hour {hour}")
            slot[hour] = mw
    if not cells:
        return []
    days = sorted({d for _, d in cells})
    first, last = days[0], days[-1]
    all_days = [first + dt.timedelta(n) for n in range((last - first).days + 1)]
    buses = sorted({b for b, _ in cells})
    out = []
    for day in all_days:
        for bus in buses:
            slot = cells.get((bus, day))
            if slot is None:
                raise ValidationError(f"{path}: bus {bus} has no demand rows for {day}")
            missing = [h for h, v in enumerate(slot) if v is None]
            if missing:
                raise ValidationError(f"{path}: bus {bus}, {day} is missing hour(s) {missing}")
            out.append(DemandSeries(bus, day, tuple(slot)))
    return out


def demand_by_day(series: Iterable[DemandSeries], network: Network) -> dict[dt.date, np.ndarray]:
    """Group demand into ``{day: array(24, n_buses)}`` in MW; absent buses are zero."""
    out: dict[dt.date, np.ndarray] = {}
    for s in series:
        arr = out.setdefault(s.day, np.zeros((HOURS_PER_DAY, network.n_buses)))
        arr[:, network.bus_index[s.bus]] = s.hourly_mw
    return dict(sorted(out.items()))


def write_demand(path: str | Path, demand: Mapping[dt.date, np.ndarray], network: Network) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["day", "hour", "bus", "mw"])
        for day in sorted(demand):
            arr = demand[day]
            for hour in range(HOURS_PER_DAY):
                for k, bus in enumerate(network.buses):
                    w.writerow([day.isoformat(), hour, bus.id, repr(float(arr[hour, k]))])
