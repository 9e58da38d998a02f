"""Solver-neutral linear model description with a HiGHS backend.

Planners build a :class:`LinearModel` (bounded columns, ranged rows,
integrality marks, an optional start hint) and hand it to :func:`solve` or a
:class:`HighsSession`.  Only this module imports the backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import highspy
import numpy as np

from .errors import InternalSolverError, NoIncumbentError, SolverError

INF = math.inf

#: Feasibility tolerance requested from the backend.
FEAS_TOL = 1e-9


@dataclass
class LinearModel:
    """Minimization model ``min c.x  s.t.  rl <= A x <= ru,  l <= x <= u``."""

    name: str = "model"
    col_names: list[str] = field(default_factory=list)
    col_lower: list[float] = field(default_factory=list)
    col_upper: list[float] = field(default_factory=list)
    col_cost: list[float] = field(default_factory=list)
    col_integer: list[bool] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    row_lower: list[float] = field(default_factory=list)
    row_upper: list[float] = field(default_factory=list)
    row_index: list[list[int]] = field(default_factory=list)
    row_value: list[list[float]] = field(default_factory=list)
    objective_offset: float = 0.0

    @property
    def num_cols(self) -> int:
        return len(self.col_names)

    @property
    def num_rows(self) -> int:
        return len(self.row_names)

    @property
    def num_integer(self) -> int:
        return sum(self.col_integer)

    def add_var(self, name: str, lower: float = 0.0, upper: float = INF, cost: float = 0.0, integer: bool = False) -> int:
        self.col_names.append(name)
        self.col_lower.append(float(lower))
        self.col_upper.append(float(upper))
        self.col_cost.append(float(cost))
        self.col_integer.append(bool(integer))
        return len(self.col_names) - 1

    def add_binary(self, name: str, cost: float = 0.0) -> int:
        return self.add_var(name, 0.0, 1.0, cost, integer=True)

    def add_row(self, name: str, coeffs: Mapping[int, float], lower: float = -INF, upper: float = INF) -> int:
        """Add ``lower <= sum(coeffs[j] * x[j]) <= upper``; zero coefficients are dropped."""
        merged: dict[int, float] = {}
        for j, a in coeffs.items():
            merged[j] = merged.get(j, 0.0) + a
        idx = [j for j in sorted(merged) if merged[j] != 0.0]
        self.row_names.append(name)
        self.row_lower.append(float(lower))
        self.row_upper.append(float(upper))
        self.row_index.append(idx)
        self.row_value.append([merged[j] for j in idx])
        return len(self.row_names) - 1

    def row_activity(self, x: Sequence[float]) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([float(np.dot(v, x[i])) if i else 0.0 for i, v in zip(self.row_index, self.row_value)])

    def max_violation(self, x: Sequence[float]) -> float:
        """Largest bound or row violation of a point (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        lo, hi = np.asarray(self.col_lower), np.asarray(self.col_upper)
        worst = float(max(np.max(lo - x, initial=0.0), np.max(x - hi, initial=0.0)))
        act = self.row_activity(x)
        rl, ru = np.asarray(self.row_lower), np.asarray(self.row_upper)
        worst = max(worst, float(np.max(rl - act, initial=0.0)), float(np.max(act - ru, initial=0.0)))
        ints = np.asarray(self.col_integer, dtype=bool)
        if ints.any():
            worst = max(worst, float(np.max(np.abs(x[ints] - np.round(x[ints])))))
        return worst

    def objective(self, x: Sequence[float]) -> float:
        return float(np.dot(self.col_cost, x)) + self.objective_offset

    def to_lp_text(self) -> str:
        """Render in CPLEX LP format for debugging with external tools."""

        def term(a, j, first):
            sign = "-" if a < 0 else ("" if first else "+")
            return f"{sign} {abs(a)!r} {self.col_names[j]}".strip()

        def expr(idx, val):
            if not idx:
                return "0 " + self.col_names[0] if self.col_names else "0"
            return " ".join(term(a, j, k == 0) for k, (j, a) in enumerate(zip(idx, val)))

        out = [f"\\ {self.name}", "Minimize"]
        obj = [(j, c) for j, c in enumerate(self.col_cost) if c != 0]
        objective = expr([j for j, _ in obj], [c for _, c in obj]) if obj else "0"
        if self.objective_offset:
            objective += f" {'-' if self.objective_offset < 0 else '+'} {abs(self.objective_offset)!r}"
        out.append(" obj: " + objective)
        out.append("Subject To")
        for name, idx, val, lo, hi in zip(self.row_names, self.row_index, self.row_value, self.row_lower, self.row_upper):
            body = expr(idx, val)
            if lo == hi:
                out.append(f" {name}: {body} = {lo!r}")
            else:
                if lo > -INF:
                    out.append(f" {name}_lo: {body} >= {lo!r}")
                if hi < INF:
                    out.append(f" {name}_hi: {body} <= {hi!r}")
        out.append("Bounds")
        for name, lo, hi, integer in zip(self.col_names, self.col_lower, self.col_upper, self.col_integer):
            if integer and lo == 0 and hi == 1:
                continue
            lo_s = "-inf" if lo == -INF else repr(lo)
            hi_s = "+inf" if hi == INF else repr(hi)
            out.append(f" {lo_s} <= {name} <= {hi_s}")
        bins = [n for n, i, lo, hi in zip(self.col_names, self.col_integer, self.col_lower, self.col_upper) if i and lo == 0 and hi == 1]
        gens = [n for n, i, lo, hi in zip(self.col_names, self.col_integer, self.col_lower, self.col_upper) if i and not (lo == 0 and hi == 1)]
        if bins:
            out.append("Binaries")
            out.append(" " + " ".join(bins))
        if gens:
            out.append("Generals")
            out.append(" " + " ".join(gens))
        out.append("End")
        return "\n".join(out) + "\n"


@dataclass
class SolveOutcome:
    status: str
    x: np.ndarray
    objective: float
    gap: float
    timed_out: bool
    hint_accepted: bool | None = None


class HighsSession:
    """A HiGHS instance loaded with one model; bounds can be updated between
    solves so a sequence of related LPs reuses the previous basis."""

    def __init__(self, model: LinearModel, *, time_limit: float | None = None, mip_gap: float = 1e-4, seed: int = 0):
        self.model = model
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("random_seed", int(seed))
        h.setOptionValue("primal_feasibility_tolerance", FEAS_TOL)
        h.setOptionValue("dual_feasibility_tolerance", FEAS_TOL)
        h.setOptionValue("mip_feasibility_tolerance", FEAS_TOL)
        h.setOptionValue("mip_rel_gap", float(mip_gap))
        h.setOptionValue("mip_abs_gap", 1e-9)
        if time_limit is not None:
            h.setOptionValue("time_limit", float(time_limit))
        inf = h.getInfinity()

        def clip(v):
            return max(min(v, inf), -inf)

        n = model.num_cols
        h.addVars(n, np.array([clip(v) for v in model.col_lower]), np.array([clip(v) for v in model.col_upper]))
        h.changeColsCost(n, np.arange(n, dtype=np.int32), np.array(model.col_cost, dtype=float))
        if model.num_rows:
            starts = np.zeros(model.num_rows, dtype=np.int32)
            acc = 0
            for r, idx in enumerate(model.row_index):
                starts[r] = acc
                acc += len(idx)
            index = np.array([j for idx in model.row_index for j in idx], dtype=np.int32)
            value = np.array([a for val in model.row_value for a in val], dtype=float)
            h.addRows(
                model.num_rows,
                np.array([clip(v) for v in model.row_lower]),
                np.array([clip(v) for v in model.row_upper]),
                len(index),
                starts,
                index,
                value,
            )
        ints = [j for j, flag in enumerate(model.col_integer) if flag]
        if ints:
            h.changeColsIntegrality(
                len(ints), np.array(ints, dtype=np.int32), np.array([highspy.HighsVarType.kInteger] * len(ints))
            )
        h.changeObjectiveOffset(model.objective_offset)
        self._h = h

    def set_col_bounds(self, cols: Sequence[int], lower: Sequence[float], upper: Sequence[float]) -> None:
        self._h.changeColsBounds(len(cols), np.asarray(cols, dtype=np.int32), np.asarray(lower, float), np.asarray(upper, float))
        for j, lo, hi in zip(cols, lower, upper):
            self.model.col_lower[j] = float(lo)
            self.model.col_upper[j] = float(hi)

    def set_row_bounds(self, rows: Sequence[int], lower: Sequence[float], upper: Sequence[float]) -> None:
        self._h.changeRowsBounds(len(rows), np.asarray(rows, dtype=np.int32), np.asarray(lower, float), np.asarray(upper, float))
        for r, lo, hi in zip(rows, lower, upper):
            self.model.row_lower[r] = float(lo)
            self.model.row_upper[r] = float(hi)

    def solve(self, hint: Sequence[float] | None = None) -> SolveOutcome:
        h = self._h
        hint_ok = None
        if hint is not None:
            sol = highspy.HighsSolution()
            sol.col_value = [float(v) for v in hint]
            sol.value_valid = True
            hint_ok = h.setSolution(sol) == highspy.HighsStatus.kOk
        h.run()
        status = h.getModelStatus()
        info = h.getInfo()
        ms = highspy.HighsModelStatus
        timed_out = status == ms.kTimeLimit
        has_point = info.primal_solution_status == 2  # kSolutionStatusFeasible
        if status == ms.kOptimal:
            name = "optimal"
        elif timed_out:
            if not has_point:
                raise NoIncumbentError(f"{self.model.name}: time limit reached without a feasible solution")
            name = "time_limit"
        elif status in (ms.kInfeasible, ms.kUnboundedOrInfeasible, ms.kUnbounded):
            raise InternalSolverError(
                f"{self.model.name}: solver reported {h.modelStatusToString(status)}",
                model_dump=self.model.to_lp_text(),
            )
        else:
            raise SolverError(f"{self.model.name}: solver stopped with status {h.modelStatusToString(status)}")
        x = np.array(h.getSolution().col_value, dtype=float)
        if self.model.num_integer:
            gap = float(info.mip_gap)
            if not math.isfinite(gap):
                gap = INF
        else:
            gap = 0.0
        return SolveOutcome(name, x, float(info.objective_function_value), gap, timed_out, hint_ok)


def solve(
    model: LinearModel,
    *,
    hint: Sequence[float] | None = None,
    time_limit: float | None = None,
    mip_gap: float = 1e-4,
    seed: int = 0,
) -> SolveOutcome:
    """Solve ``model`` once in a fresh backend instance."""
    return HighsSession(model, time_limit=time_limit, mip_gap=mip_gap, seed=seed).solve(hint)
