"""Brute-force reference implementations for verification.

Nothing here is on a production path.  The switching oracle evaluates every
status vector with its own dense LP assembly solved by
``scipy.optimize.linprog``, so it shares no model-building code with the
planners it checks.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import InternalSolverError, OracleCapError
from .metrics import ALL_METRICS, HighRiskThreshold, MetricKind
from .network import Bus, Generator, Line, Network
from .raster import GridGeometry, PixelRef

MAX_ENUMERATION = 20


def reference_dispatch_shed(
    network: Network,
    statuses: Mapping[int, int],
    demand_mw: Sequence[float],
    big_m_upper: float = 2 * math.pi,
    big_m_lower: float = -2 * math.pi,
) -> float:
    """Minimum total shed (per-unit) for fixed statuses, written directly
    from the model equations as one dense LP."""
    base = network.base_mva
    nb, ng, nl = network.n_buses, len(network.generators), len(network.lines)
    pd = np.asarray(demand_mw, dtype=float) / base
    # column layout: [pg | pls | f | theta]
    n = ng + nb + nl + nb
    og, os_, of, ot = 0, ng, ng + nb, ng + nb + nl
    bounds = [(0.0, g.p_max) for g in network.generators]
    bounds += [(0.0, pd[k]) for k in range(nb)]
    bounds += [(None, None)] * nl
    refs = {comp[0] for comp in network.components()}
    bounds += [((0.0, 0.0) if b.id in refs else (None, None)) for b in network.buses]
    c = np.zeros(n)
    c[os_ : os_ + nb] = 1.0

    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    idx = {b.id: k for k, b in enumerate(network.buses)}
    for k, ln in enumerate(network.lines):
        z = statuses[ln.id]
        fr, to = ot + idx[ln.from_bus], ot + idx[ln.to_bus]
        row = np.zeros(n)
        row[of + k] = 1.0
        a_ub.append(row), b_ub.append(ln.flow_limit * z)
        a_ub.append(-row), b_ub.append(ln.flow_limit * z)
        d = np.zeros(n)
        d[fr], d[to] = 1.0, -1.0
        a_ub.append(-d), b_ub.append(-(ln.angle_min * z + big_m_lower * (1 - z)))
        a_ub.append(d), b_ub.append(ln.angle_max * z + big_m_upper * (1 - z))
        # f + b*dtheta within |b| * M * (1 - z)
        g = row + ln.susceptance_b * d
        a_ub.append(-g), b_ub.append(-abs(ln.susceptance_b) * big_m_lower * (1 - z))
        a_ub.append(g), b_ub.append(abs(ln.susceptance_b) * big_m_upper * (1 - z))
    for kb, bus in enumerate(network.buses):
        row = np.zeros(n)
        for k, ln in enumerate(network.lines):
            if ln.from_bus == bus.id:
                row[of + k] += 1.0
            if ln.to_bus == bus.id:
                row[of + k] -= 1.0
        for j, gen in enumerate(network.generators):
            if gen.bus == bus.id:
                row[og + j] -= 1.0
        row[os_ + kb] -= 1.0
        a_eq.append(row), b_eq.append(-pd[kb])
    res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub), A_eq=np.array(a_eq), b_eq=np.array(b_eq), bounds=bounds, method="highs")
    if res.status != 0:
        raise InternalSolverError(f"reference LP failed: {res.message}")
    return float(res.fun)


@dataclass
class EnumerationResult:
    statuses: dict[int, int]
    objective: float
    evaluations: int


def enumerate_ops(network: Network, instance) -> EnumerationResult:
    """Exhaustive search over the switchable statuses of an OPS instance.

    Each budget-feasible status vector is scored as reference shed plus
    ``epsilon_switch`` per de-energized line; ties keep the
    lexicographically first vector.
    """
    switch = sorted(lid for lid, r in instance.risk_values.items() if r > 0)
    if len(switch) > MAX_ENUMERATION:
        raise OracleCapError(f"{len(switch)} switchable lines exceeds the enumeration cap of {MAX_ENUMERATION}")
    best: EnumerationResult | None = None
    evaluations = 0
    for combo in itertools.product((0, 1), repeat=len(switch)):
        z = dict(zip(switch, combo))
        risk = math.fsum(instance.risk_values[lid] for lid in switch if z[lid])
        if risk > instance.risk_budget:
            continue
        statuses = {ln.id: z.get(ln.id, 1) for ln in network.lines}
        shed = reference_dispatch_shed(network, statuses, instance.demand_mw, instance.big_m_upper, instance.big_m_lower)
        evaluations += 1
        obj = shed + instance.epsilon_switch * (len(switch) - sum(combo))
        if best is None or obj < best.objective - 1e-9:
            best = EnumerationResult(statuses, obj, evaluations)
    if best is None:
        raise InternalSolverError("no budget-feasible status vector")
    best.evaluations = evaluations
    return best


def naive_metrics(values: Sequence[float], count: int, thr: HighRiskThreshold | float) -> dict[MetricKind, float]:
    """All six metrics straight from their definitions."""
    cut = thr.threshold if isinstance(thr, HighRiskThreshold) else float(thr)
    vals = [float(v) for v in values]
    high = [v for v in vals if v >= cut]
    out = dict.fromkeys(ALL_METRICS, 0.0)
    if count == 0:
        return out
    if vals:
        out[MetricKind.MA] = max(vals)
        out[MetricKind.CU] = sum(vals)
        out[MetricKind.ME] = sum(vals) / count
    if high:
        out[MetricKind.HRMA] = max(high)
        out[MetricKind.HRCU] = sum(high)
        out[MetricKind.HRME] = sum(high) / count
    return out


def streaming_stats(values: Iterable[float]) -> tuple[float, float, int]:
    """Welford's one-pass population mean and standard deviation."""
    n, mean, m2 = 0, 0.0, 0.0
    for v in values:
        n += 1
        delta = v - mean
        mean += delta / n
        m2 += delta * (v - mean)
    if n == 0:
        raise ValueError("no values")
    return mean, math.sqrt(m2 / n), n


def sampled_cells(p0, p1, grid: GridGeometry, samples: int = 10_000) -> set[PixelRef]:
    """Cells containing any of ``samples`` evenly spaced points on a segment.

    A point on a cell edge or corner belongs to every cell sharing it.
    """
    (x0, y0), (x1, y1) = p0, p1
    t = np.linspace(0.0, 1.0, samples)
    u = (x0 + (x1 - x0) * t - grid.x_origin) / grid.cell_size
    v = (y0 + (y1 - y0) * t - grid.y_origin) / grid.cell_size
    fu, fv = np.floor(u), np.floor(v)
    cols = [fu, np.where(u == fu, fu - 1, fu)]
    vrows = [fv, np.where(v == fv, fv - 1, fv)]
    c = np.concatenate([c for c in cols for _ in vrows]).astype(np.int64)
    r = np.concatenate([r for _ in cols for r in vrows]).astype(np.int64)
    keep = (c >= 0) & (c < grid.n_cols) & (r >= 0) & (r < grid.n_rows)
    keys = np.unique(c[keep] * grid.n_rows + r[keep])
    top = grid.n_rows - 1
    return {PixelRef(int(k // grid.n_rows), top - int(k % grid.n_rows)) for k in keys}


def random_network(rng: random.Random, n_buses: int, n_lines: int) -> Network:
    """Connected random network with straight-line geometry.  Line flow
    limits are drawn tight enough that switching changes load shed."""
    buses = tuple(Bus(i + 1, f"b{i + 1}") for i in range(n_buses))
    pairs = [(rng.randrange(i) + 1, i + 1) for i in range(1, n_buses)]
    while len(pairs) < n_lines:
        a, b = rng.sample(range(1, n_buses + 1), 2)
        pairs.append((a, b))
    pos = {b.id: (rng.uniform(0, 10), rng.uniform(0, 10)) for b in buses}
    lines = []
    for k, (a, b) in enumerate(pairs):
        geom = (pos[a], pos[b]) if pos[a] != pos[b] else (pos[a], (pos[a][0] + 1.0, pos[a][1]))
        lines.append(
            Line(k + 1, a, b, -rng.uniform(5, 20), rng.uniform(0.2, 1.0), -0.5236, 0.5236, geom)
        )
    n_gen = rng.randint(1, max(1, n_buses // 2))
    gen_buses = rng.sample(range(1, n_buses + 1), n_gen)
    gens = tuple(Generator(i + 1, bus, rng.uniform(0, 0.2), rng.uniform(0.5, 2.0)) for i, bus in enumerate(gen_buses))
    return Network(100.0, buses, gens, tuple(lines))


def random_ops_instance(rng: random.Random, max_buses: int = 10, max_switchable: int = 12):
    """Random small OPS instance with a budget between zero and the total risk."""
    from .ops import OpsInstance

    n_buses = rng.randint(3, max_buses)
    n_lines = rng.randint(n_buses - 1, max(n_buses - 1, max_switchable))
    net = random_network(rng, n_buses, n_lines)
    gen_buses = {g.bus for g in net.generators}
    demand = [0.0 if b.id in gen_buses else rng.uniform(0, 80) for b in net.buses]
    n_switch = min(len(net.lines), rng.randint(0, max_switchable))
    switch = set(rng.sample([ln.id for ln in net.lines], n_switch))
    risks = {ln.id: (rng.uniform(1, 100) if ln.id in switch else 0.0) for ln in net.lines}
    total = math.fsum(risks.values())
    budget = rng.uniform(0, total)
    return OpsInstance(
        network=net,
        day=None,
        metric=MetricKind.CU,
        hour=0,
        risk_values=risks,
        risk_budget=budget,
        demand_mw=demand,
        mip_gap=0.0,
    )
