# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Semantics (including accumulation order) match _fallback.py exactly so the
two backends agree to float round-off.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport M_PI, cos, exp, sqrt

cdef double DEG_KM = 6371.0088 * M_PI / 180.0


def grid_index_batch(cnp.float64_t[::1] lon, cnp.float64_t[::1] lat,
                     double lon_min, double lat_min, double size,
                     Py_ssize_t cols, Py_ssize_t rows):
    cdef Py_ssize_t n = lon.shape[0]
    col_arr = np.empty(n, dtype=np.int64)
    row_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] col = col_arr
    cdef cnp.int64_t[::1] row = row_arr
    cdef Py_ssize_t i
    cdef cnp.int64_t c, r
    for i in range(n):
        c = <cnp.int64_t>((lon[i] - lon_min) / size)
        r = <cnp.int64_t>((lat[i] - lat_min) / size)
        if c > cols - 1:
            c = cols - 1
        if r > rows - 1:
            r = rows - 1
        col[i] = c
        row[i] = r
    return col_arr, row_arr


def kde_accumulate(cnp.float64_t[:, ::1] grid,
                   cnp.float64_t[::1] lon, cnp.float64_t[::1] lat,
                   double lon0, double lat0, double size_deg,
                   double h_km, double cutoff=4.0):
    cdef Py_ssize_t rows = grid.shape[0]
    cdef Py_ssize_t cols = grid.shape[1]
    cdef Py_ssize_t n = lon.shape[0]
    cdef double norm = 1.0 / (2.0 * M_PI * h_km * h_km)
    cdef double inv2h2 = 1.0 / (2.0 * h_km * h_km)
    cdef double reach = cutoff * h_km
    cdef double reach2 = reach * reach
    cdef double plon, plat, kx, clon, clat, dx, dy, d2, coslat
    cdef Py_ssize_t i, pc, pr, c0, c1, r0, r1, hw_c, hw_r, rr, cc
    for i in range(n):
        plon = lon[i]
        plat = lat[i]
        kx = DEG_KM * cos(plat * M_PI / 180.0)
        if kx > 0:
            hw_c = <Py_ssize_t>(reach / (size_deg * kx)) + 1
        else:
            hw_c = cols
        hw_r = <Py_ssize_t>(reach / (size_deg * DEG_KM)) + 1
        pc = <Py_ssize_t>((plon - lon0) / size_deg)
        pr = <Py_ssize_t>((plat - lat0) / size_deg)
        c0 = pc - hw_c
        if c0 < 0:
            c0 = 0
        c1 = pc + hw_c
        if c1 > cols - 1:
            c1 = cols - 1
        r0 = pr - hw_r
        if r0 < 0:
            r0 = 0
        r1 = pr + hw_r
        if r1 > rows - 1:
            r1 = rows - 1
        if c0 > c1 or r0 > r1:
            continue
        for rr in range(r0, r1 + 1):
            clat = lat0 + (rr + 0.5) * size_deg
            dy = (clat - plat) * DEG_KM
            coslat = cos(0.5 * (clat + plat) * M_PI / 180.0)
            for cc in range(c0, c1 + 1):
                clon = lon0 + (cc + 0.5) * size_deg
                dx = (clon - plon) * DEG_KM * coslat
                d2 = dx * dx + dy * dy
                if d2 <= reach2:
                    grid[rr, cc] += norm * exp(-d2 * inv2h2)
    return np.asarray(grid)


def fdeb_iterate(cnp.float64_t[:, :, ::1] pos, cnp.float64_t[::1] kp,
                 cnp.int64_t[:, ::1] pairs, cnp.float64_t[::1] compat,
                 cnp.uint8_t[::1] reverse, double step):
    cdef Py_ssize_t E = pos.shape[0]
    cdef Py_ssize_t P = pos.shape[1]
    cdef Py_ssize_t M = pairs.shape[0]
    force_arr = np.zeros((E, P, 2), dtype=np.float64)
    cdef cnp.float64_t[:, :, ::1] force = force_arr
    cdef Py_ssize_t e, i, m, a, b, j
    cdef double fx, fy, dxp, dyp, d2, w, mag, scale

    # ((p[i+1]-p[i]) - (p[i]-p[i-1])) * kp, in this exact order, to match
    # the fallback's np.diff-based evaluation bit for bit
    for e in range(E):
        for i in range(1, P - 1):
            force[e, i, 0] = ((pos[e, i + 1, 0] - pos[e, i, 0]) - (pos[e, i, 0] - pos[e, i - 1, 0])) * kp[e]
            force[e, i, 1] = ((pos[e, i + 1, 1] - pos[e, i, 1]) - (pos[e, i, 1] - pos[e, i - 1, 1])) * kp[e]

# two passes (all adds, then all subtracts) to match the fallback's
    # np.add.at / np.subtract.at accumulation order exactly
    for m in range(M):
        a = pairs[m, 0]
        b = pairs[m, 1]
        w = compat[m]
        for i in range(1, P - 1):
            if reverse[m]:
                j = P - 1 - i
            else:
                j = i
            dxp = pos[b, j, 0] - pos[a, i, 0]
            dyp = pos[b, j, 1] - pos[a, i, 1]
            d2 = dxp * dxp + dyp * dyp
            if d2 < 1e-12:
                d2 = 1e-12
            force[a, i, 0] += w * dxp / d2
            force[a, i, 1] += w * dyp / d2
    for m in range(M):
        a = pairs[m, 0]
        b = pairs[m, 1]
        w = compat[m]
        for i in range(1, P - 1):
            if reverse[m]:
                j = P - 1 - i
            else:
                j = i
            dxp = pos[b, j, 0] - pos[a, i, 0]
            dyp = pos[b, j, 1] - pos[a, i, 1]
            d2 = dxp * dxp + dyp * dyp
            if d2 < 1e-12:
                d2 = 1e-12
            force[b, j, 0] -= w * dxp / d2
            force[b, j, 1] -= w * dyp / d2

    out_arr = np.empty((E, P, 2), dtype=np.float64)
    cdef cnp.float64_t[:, :, ::1] out = out_arr
    for e in range(E):
        out[e, 0, 0] = pos[e, 0, 0]
        out[e, 0, 1] = pos[e, 0, 1]
        out[e, P - 1, 0] = pos[e, P - 1, 0]
        out[e, P - 1, 1] = pos[e, P - 1, 1]
        for i in range(1, P - 1):
            fx = force[e, i, 0]
            fy = force[e, i, 1]
            mag = sqrt(fx * fx + fy * fy)
            if mag > step:
                scale = step / mag
            else:
                scale = 1.0
            out[e, i, 0] = pos[e, i, 0] + fx * scale
            out[e, i, 1] = pos[e, i, 1] + fy * scale
    return out_arr
