# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Semantics match ``_purepy.py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport ceil, floor, isnan

cnp.import_array()


cdef inline Py_ssize_t _imax(Py_ssize_t a, Py_ssize_t b) nogil:
    return a if a > b else b


cdef inline Py_ssize_t _imin(Py_ssize_t a, Py_ssize_t b) nogil:
    return a if a < b else b


cdef double SNAP = 1e-9


def segment_cells(double u0, double v0, double u1, double v1, Py_ssize_t ncols, Py_ssize_t nrows):
    cdef double umin = u0 if u0 < u1 else u1
    cdef double umax = u1 if u0 < u1 else u0
    cdef Py_ssize_t i_lo = _imax(<Py_ssize_t>ceil(umin - SNAP) - 1, 0)
    cdef Py_ssize_t i_hi = _imin(<Py_ssize_t>floor(umax + SNAP), ncols - 1)
    cdef int step_u = 1 if u1 >= u0 else -1
    cdef int step_v = 1 if v1 >= v0 else -1
    cdef bint vertical = u0 == u1
    cdef double slope = 0.0 if vertical else (v1 - v0) / (u1 - u0)
    cdef Py_ssize_t cap = 16, n = 0, i, j, k, j_lo, j_hi, ncol_iter
    cdef double a, b, va, vb, vlo, vhi
    cdef cnp.ndarray[cnp.int64_t, ndim=2] buf = np.empty((cap, 2), dtype=np.int64)

    if i_hi < i_lo:
        return buf[:0]
    ncol_iter = i_hi - i_lo + 1
    for k in range(ncol_iter):
        i = i_lo + k if step_u > 0 else i_hi - k
        if vertical:
            va = v0
            vb = v1
        else:
            a = <double>i if <double>i > umin else umin
            b = <double>(i + 1) if <double>(i + 1) < umax else umax
            if a == u0:
                va = v0
            elif a == u1:
                va = v1
            else:
                va = v0 + (a - u0) * slope
            if b == u0:
                vb = v0
            elif b == u1:
                vb = v1
            else:
                vb = v0 + (b - u0) * slope
        if va <= vb:
            vlo = va
            vhi = vb
        else:
            vlo = vb
            vhi = va
        j_lo = _imax(<Py_ssize_t>ceil(vlo - SNAP) - 1, 0)
        j_hi = _imin(<Py_ssize_t>floor(vhi + SNAP), nrows - 1)
        if j_hi < j_lo:
            continue
        if n + (j_hi - j_lo + 1) > cap:
            while n + (j_hi - j_lo + 1) > cap:
                cap *= 2
            buf = np.resize(buf, (cap, 2))
        if step_v > 0:
            for j in range(j_lo, j_hi + 1):
                buf[n, 0] = i
                buf[n, 1] = j
                n += 1
        else:
            for j in range(j_hi, j_lo - 1, -1):
                buf[n, 0] = i
                buf[n, 1] = j
                n += 1
    return buf[:n].copy()


def line_day_metrics(const double[:, :, ::1] stack, const cnp.int64_t[::1] rows,
                     const cnp.int64_t[::1] cols, double threshold):
    cdef Py_ssize_t ndays = stack.shape[0], npix = rows.shape[0]
    cdef Py_ssize_t d, p, cnt
    cdef double v, mx, sm, hmx, hsm
    out_arr = np.zeros((ndays, 6), dtype=np.float64)
    counts_arr = np.zeros(ndays, dtype=np.int64)
    cdef double[:, ::1] out = out_arr
    cdef cnp.int64_t[::1] counts = counts_arr
    with nogil:
        for d in range(ndays):
            cnt = 0
            mx = 0.0
            sm = 0.0
            hmx = 0.0
            hsm = 0.0
            for p in range(npix):
                v = stack[d, rows[p], cols[p]]
                if isnan(v):
                    continue
                cnt += 1
                sm += v
                if v > mx:
                    mx = v
                if v >= threshold:
                    hsm += v
                    if v > hmx:
                        hmx = v
            counts[d] = cnt
            out[d, 0] = mx
            out[d, 2] = sm
            out[d, 3] = hmx
            out[d, 5] = hsm
            if cnt > 0:
                out[d, 1] = sm / cnt
                out[d, 4] = hsm / cnt
    return out_arr, counts_arr


def pixel_moments(const double[:, :, ::1] stack, const cnp.int64_t[::1] rows,
                  const cnp.int64_t[::1] cols, double center):
    cdef Py_ssize_t ndays = stack.shape[0], npix = rows.shape[0]
    cdef Py_ssize_t d, p, cnt = 0
    cdef double v, sm = 0.0, sq = 0.0, dev
    with nogil:
        for d in range(ndays):
            for p in range(npix):
                v = stack[d, rows[p], cols[p]]
                if isnan(v):
                    continue
                cnt += 1
                sm += v
                dev = v - center
                sq += dev * dev
    return cnt, sm, sq
