"""Shared geographic numerics: great-circle distances and local projections."""

from __future__ import annotations

import math

import numpy as np

EARTH_RADIUS_KM = 6371.0088
DEG_KM = EARTH_RADIUS_KM * math.pi / 180.0  # km per degree of latitude


def haversine_km(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    """Great-circle distance between two WGS84 points, in km."""
    rlat1 = math.radians(lat1)
    rlat2 = math.radians(lat2)
    dlat = rlat2 - rlat1
    dlon = math.radians(lon2 - lon1)
    a = math.sin(dlat / 2.0) ** 2 + math.cos(rlat1) * math.cos(rlat2) * math.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def haversine_km_arr(lon: np.ndarray, lat: np.ndarray, lon0: float, lat0: float) -> np.ndarray:
    """Vectorized great-circle distance from many points to one reference point."""
    rlat = np.radians(lat)
    rlat0 = math.radians(lat0)
    dlat = rlat - rlat0
    dlon = np.radians(lon - lon0)
    a = np.sin(dlat / 2.0) ** 2 + np.cos(rlat) * math.cos(rlat0) * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(a)))


class LocalProjection:
    """Equirectangular km-plane centred on a reference point.

    Adequate for layout work at city to continental extents; not a geodesy
    product.  x grows east, y grows north.
    """

    def __init__(self, lon0: float, lat0: float):
        self.lon0 = lon0
        self.lat0 = lat0
        self._kx = DEG_KM * math.cos(math.radians(lat0))
        self._ky = DEG_KM

    def to_xy(self, lon, lat):
        return (np.asarray(lon) - self.lon0) * self._kx, (np.asarray(lat) - self.lat0) * self._ky

    def to_lonlat(self, x, y):
        return self.lon0 + np.asarray(x) / self._kx, self.lat0 + np.asarray(y) / self._ky
