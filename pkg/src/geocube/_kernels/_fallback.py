"""Numpy reference implementations of the hot kernels.

These define the semantics; the compiled core in _core.pyx performs the
same arithmetic in the same accumulation order so both backends agree to
float round-off.
"""

from __future__ import annotations

import math

import numpy as np

DEG_KM = 6371.0088 * math.pi / 180.0


def grid_index_batch(lon, lat, lon_min, lat_min, size, cols, rows):
    """Cell indices for in-bbox coordinate arrays; outer boundary clamps inward."""
    col = np.minimum(((lon - lon_min) / size).astype(np.int64), cols - 1)
    row = np.minimum(((lat - lat_min) / size).astype(np.int64), rows - 1)
    return col, row


def kde_accumulate(grid, lon, lat, lon0, lat0, size_deg, h_km, cutoff=4.0):
    """Add truncated Gaussian kernels (density per km^2) onto a lon/lat grid.

    grid is indexed [row, col] with cell centers at
    (lon0 + (col+0.5)*size_deg, lat0 + (row+0.5)*size_deg).  Distances use a
    per-pair equirectangular approximation; kernels are cut off at
    `cutoff` standard deviations.
    """
    rows, cols = grid.shape
    norm = 1.0 / (2.0 * math.pi * h_km * h_km)
    inv2h2 = 1.0 / (2.0 * h_km * h_km)
    reach = cutoff * h_km
    for plon, plat in zip(lon, lat):
        kx = DEG_KM * math.cos(math.radians(plat))
        hw_c = int(reach / (size_deg * kx)) + 1 if kx > 0 else cols
        hw_r = int(reach / (size_deg * DEG_KM)) + 1
        pc = int((plon - lon0) / size_deg)
        pr = int((plat - lat0) / size_deg)
        c0, c1 = max(0, pc - hw_c), min(cols - 1, pc + hw_c)
        r0, r1 = max(0, pr - hw_r), min(rows - 1, pr + hw_r)
        if c0 > c1 or r0 > r1:
            continue
        clon = lon0 + (np.arange(c0, c1 + 1) + 0.5) * size_deg
        clat = lat0 + (np.arange(r0, r1 + 1) + 0.5) * size_deg
        dy = (clat - plat) * DEG_KM
        coslat = np.cos(np.radians(0.5 * (clat + plat)))
        dx = (clon[None, :] - plon) * DEG_KM * coslat[:, None]
        d2 = dx * dx + (dy * dy)[:, None]
        patch = norm * np.exp(-d2 * inv2h2)
        patch[d2 > reach * reach] = 0.0
        grid[r0 : r1 + 1, c0 : c1 + 1] += patch
    return grid


def fdeb_iterate(pos, kp, pairs, compat, reverse, step):
    """One force-directed bundling iteration over edge control points.

    pos: (E, P, 2) control point coordinates; endpoints are pinned.
    kp: (E,) per-edge spring constant (already divided by segment count).
    pairs: (M, 2) indices of compatible edge pairs; compat: (M,) weights;
    reverse: (M,) uint8 flags marking pairs bundled tail-to-head.
    Each control point moves along its net force, capped at `step`.
    """
    force = np.zeros_like(pos)
    diff = np.diff(pos, axis=1)
    force[:, 1:-1] = diff[:, 1:] - diff[:, :-1]
    force *= kp[:, None, None]

    if len(pairs):
        rev = reverse.astype(bool)
        p = pos[pairs[:, 0]]
        q = pos[pairs[:, 1]]
        q = np.where(rev[:, None, None], q[:, ::-1], q)
        delta = q - p
        d2 = delta[..., 0] ** 2 + delta[..., 1] ** 2
        np.maximum(d2, 1e-12, out=d2)
        disp = compat[:, None, None] * delta / d2[..., None]
        disp[:, 0] = 0.0
        disp[:, -1] = 0.0
        np.add.at(force, pairs[:, 0], disp)
        back = np.where(rev[:, None, None], disp[:, ::-1], disp)
        np.subtract.at(force, pairs[:, 1], back)

    mag = np.sqrt(force[..., 0] ** 2 + force[..., 1] ** 2)
    scale = np.where(mag > step, step / np.maximum(mag, 1e-300), 1.0)
    out = pos + force * scale[..., None]
    out[:, 0] = pos[:, 0]
    out[:, -1] = pos[:, -1]
    return out
