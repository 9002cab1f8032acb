"""Gaussian kernel density risk surface over pyramid-level grids."""

from __future__ import annotations

import math

import numpy as np

from geocube import _kernels, grid
from geocube.geo import DEG_KM
from geocube.trajectory import TrajectoryStore


def flu_points(store: TrajectoryStore, t0: int | None = None, t1: int | None = None):
    """(lon, lat) arrays of flu-flagged footprints with t0 <= ts < t1."""
    lon, lat = [], []
    for traj in store:
        for flon, flat, ts, flag in traj.footprints:
            if not flag:
                continue
            if t0 is not None and ts < t0:
                continue
            if t1 is not None and ts >= t1:
                continue
            lon.append(flon)
            lat.append(flat)
    return np.asarray(lon, dtype=np.float64), np.asarray(lat, dtype=np.float64)


def flu_risk_surface(lon, lat, bandwidth_km: float, out_level: int) -> np.ndarray:
    """Evaluate a Gaussian KDE of the given points at the cell centers of a
    pyramid level.

    Returns a (rows, cols) density array in points per km^2; the grid mass
    (density x cell area) matches the point count away from the bbox
    boundary.  Zero points give an all-zero surface.  Memory scales with
    the full level grid, so prefer levels >= 3.
    """
    if bandwidth_km <= 0:
        raise ValueError("bandwidth_km must be positive")
    cols, rows = grid.level_dims(out_level)
    out = np.zeros((rows, cols), dtype=np.float64)
    lon = np.ascontiguousarray(lon, dtype=np.float64)
    lat = np.ascontiguousarray(lat, dtype=np.float64)
    if len(lon):
        _kernels.kde_accumulate(
            out, lon, lat, grid.LON_MIN, grid.LAT_MIN,
            grid.cell_size_deg(out_level), bandwidth_km,
        )
    return out


def cell_areas_km2(out_level: int) -> np.ndarray:
    """Approximate cell area per grid row (equirectangular, cos-lat scaled)."""
    cols, rows = grid.level_dims(out_level)
    size = grid.cell_size_deg(out_level)
    lat_centers = grid.LAT_MIN + (np.arange(rows) + 0.5) * size
    return (size * DEG_KM) ** 2 * np.cos(np.radians(lat_centers))


def total_mass(surface: np.ndarray, out_level: int) -> float:
    """Integral of a density surface over the grid (should equal the point
    count when kernels sit away from the boundary)."""
    return float((surface * cell_areas_km2(out_level)[:, None]).sum())
