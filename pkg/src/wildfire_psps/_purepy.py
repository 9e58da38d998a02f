"""Reference (uncompiled) implementations of the hot kernels.

Signatures mirror ``_speedups.pyx`` exactly; :mod:`wildfire_psps.kernels`
picks one of the two at import time.
"""

from __future__ import annotations

import math

import numpy as np


#: Edge-contact tolerance in cell units.
SNAP = 1e-9


def segment_cells(u0, v0, u1, v1, ncols, nrows):
    """Cells whose closed unit square meets the segment (u0, v0)-(u1, v1).

    Coordinates are in cell units relative to the grid's lower-left corner.
    Contacts within ``SNAP`` of a cell edge count, so corner passes survive
    rounding in the coordinate transform.  Cells are returned as
    ``(col, row_from_bottom)`` in order of travel and clipped to the grid.

    Returns:
        int64 array of shape (k, 2).
    """
    out = []
    step_u = 1 if u1 >= u0 else -1
    step_v = 1 if v1 >= v0 else -1
    umin, umax = min(u0, u1), max(u0, u1)
    i_lo = max(math.ceil(umin - SNAP) - 1, 0)
    i_hi = min(math.floor(umax + SNAP), ncols - 1)
    cols = range(i_lo, i_hi + 1) if step_u > 0 else range(i_hi, i_lo - 1, -1)
    vertical = u0 == u1
    slope = 0.0 if vertical else (v1 - v0) / (u1 - u0)
    for i in cols:
        if vertical:
            va, vb = v0, v1
        else:
            a = max(float(i), umin)
            b = min(float(i + 1), umax)
            va = v0 if a == u0 else (v1 if a == u1 else v0 + (a - u0) * slope)
            vb = v0 if b == u0 else (v1 if b == u1 else v0 + (b - u0) * slope)
        vlo, vhi = (va, vb) if va <= vb else (vb, va)
        j_lo = max(math.ceil(vlo - SNAP) - 1, 0)
        j_hi = min(math.floor(vhi + SNAP), nrows - 1)
        js = range(j_lo, j_hi + 1) if step_v > 0 else range(j_hi, j_lo - 1, -1)
        for j in js:
            out.append((i, j))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def line_day_metrics(stack, rows, cols, threshold):
    """Six aggregated metrics per day for one pixel set.

    Args:
        stack: float64 array (days, nrows, ncols); NaN marks no-data.
        rows, cols: int64 pixel indices (same length).
        threshold: High-risk pixel threshold (inclusive).

    Returns:
        ``(metrics, counts)`` with metrics of shape (days, 6) ordered
        MA, ME, CU, HRMA, HRME, HRCU and counts of burnable pixels per day.
    """
    vals = np.asarray(stack)[:, rows, cols]
    ndays = vals.shape[0]
    burnable = ~np.isnan(vals)
    counts = burnable.sum(axis=1).astype(np.int64)
    clean = np.where(burnable, vals, 0.0)
    high = np.where(burnable & (vals >= threshold), vals, 0.0)
    out = np.zeros((ndays, 6))
    if vals.shape[1]:
        out[:, 0] = clean.max(axis=1, initial=0.0)
        out[:, 3] = high.max(axis=1, initial=0.0)
    out[:, 2] = clean.sum(axis=1)
    out[:, 5] = high.sum(axis=1)
    nz = counts > 0
    out[nz, 1] = out[nz, 2] / counts[nz]
    out[nz, 4] = out[nz, 5] / counts[nz]
    return out, counts


def pixel_moments(stack, rows, cols, center):
    """Count, sum, and sum of squared deviations from ``center`` over the
    burnable pixels of one pixel set across all days."""
    vals = np.asarray(stack)[:, rows, cols]
    vals = vals[~np.isnan(vals)]
    dev = vals - center
    return int(vals.size), float(vals.sum()), float((dev * dev).sum())
