"""Dyadic space-time grid pyramid.

The study area is a fixed WGS84 bounding box over North America divided into
a 13312 x 9216 lattice of 0.008333-degree (~1 km) base cells.  Cell size
doubles per level up to level 10 (26 x 18 cells).  Time is divided into
1-hour base intervals from a configurable epoch, with the same dyadic
doubling per temporal level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

LON_MIN = -167.276413
LON_MAX = -56.347517
LAT_MIN = 5.499550
LAT_MAX = 82.296478
BASE_CELL_DEG = 0.008333
BASE_COLS = 13312
BASE_ROWS = 9216
MAX_LEVEL = 10

BASE_INTERVAL_S = 3600
DEFAULT_EPOCH = int(datetime(2014, 1, 1, tzinfo=timezone.utc).timestamp())


class OutOfBounds(ValueError):
    """Coordinate outside the study bounding box."""


def in_bbox(lon: float, lat: float) -> bool:
    return LON_MIN <= lon <= LON_MAX and LAT_MIN <= lat <= LAT_MAX


def level_dims(level: int) -> tuple[int, int]:
    """(cols, rows) of the spatial grid at a pyramid level."""
    if not 1 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in 1..{MAX_LEVEL}, got {level}")
    f = 1 << (level - 1)
    return BASE_COLS // f, BASE_ROWS // f


def cell_size_deg(level: int) -> float:
    return BASE_CELL_DEG * (1 << (level - 1))


def grid_index(lon: float, lat: float, level: int = 1) -> tuple[int, int]:
    """Map a coordinate to its (col, row) cell at the given level.

    Points on the east/north outer boundary clamp into the last cell.
    """
    if not in_bbox(lon, lat):
        raise OutOfBounds(f"({lon}, {lat}) outside study bbox")
    cols, rows = level_dims(level)
    size = cell_size_deg(level)
    col = min(int((lon - LON_MIN) / size), cols - 1)
    row = min(int((lat - LAT_MIN) / size), rows - 1)
    return col, row


def grid_index_batch(lon: np.ndarray, lat: np.ndarray, level: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized grid_index over coordinate arrays (all points must be in bbox)."""
    from geocube import _kernels

    cols, rows = level_dims(level)
    return _kernels.grid_index_batch(
        np.ascontiguousarray(lon, dtype=np.float64),
        np.ascontiguousarray(lat, dtype=np.float64),
        LON_MIN, LAT_MIN, cell_size_deg(level), cols, rows,
    )


def parent_cell(col: int, row: int) -> tuple[int, int]:
    """Cell index at level L+1 containing cell (col, row) at level L."""
    return col >> 1, row >> 1


def cell_at_level(col: int, row: int, from_level: int, to_level: int) -> tuple[int, int]:
    """Re-index a cell to a coarser (or equal) level."""
    if to_level < from_level:
        raise ValueError("cell_at_level only coarsens")
    shift = to_level - from_level
    return col >> shift, row >> shift


def cell_bounds(col: int, row: int, level: int) -> tuple[float, float, float, float]:
    """(lon_min, lat_min, lon_max, lat_max) of a cell."""
    size = cell_size_deg(level)
    x0 = LON_MIN + col * size
    y0 = LAT_MIN + row * size
    return x0, y0, x0 + size, y0 + size


def cell_center(col: int, row: int, level: int) -> tuple[float, float]:
    size = cell_size_deg(level)
    return LON_MIN + (col + 0.5) * size, LAT_MIN + (row + 0.5) * size


def children_cells(col: int, row: int) -> list[tuple[int, int]]:
    """The 2x2 cells at level L-1 nested inside (col, row) at level L."""
    return [(2 * col + dc, 2 * row + dr) for dr in (0, 1) for dc in (0, 1)]


@dataclass(frozen=True)
class TimeGrid:
    """Dyadic 1-hour interval hierarchy anchored at an epoch."""

    epoch: int = DEFAULT_EPOCH

    def interval_index(self, ts: int, t_level: int = 1) -> int:
        """Index of the interval containing a UTC timestamp (epoch seconds)."""
        span = BASE_INTERVAL_S * (1 << (t_level - 1))
        return (ts - self.epoch) // span

    def interval_bounds(self, index: int, t_level: int = 1) -> tuple[int, int]:
        span = BASE_INTERVAL_S * (1 << (t_level - 1))
        start = self.epoch + index * span
        return start, start + span

    def interval_at_level(self, index: int, from_level: int, to_level: int) -> int:
        if to_level < from_level:
            raise ValueError("interval_at_level only coarsens")
        return index >> (to_level - from_level)

    def base_range(self, t0: int, t1: int) -> tuple[int, int]:
        """Base interval indices [first, last) covering [t0, t1)."""
        first = (t0 - self.epoch) // BASE_INTERVAL_S
        if t1 <= t0:
            return first, first
        last = -((self.epoch - t1) // BASE_INTERVAL_S)  # ceil division
        return first, last


def parse_utc(text: str) -> int:
    """ISO-8601 UTC timestamp to epoch seconds."""
    t = text.strip()
    if t.endswith("Z"):
        t = t[:-1] + "+00:00"
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def format_utc(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def cell_id(level: int, col: int, row: int) -> str:
    """Cell address in the external "L{level}:{col}:{row}" form."""
    return f"L{level}:{col}:{row}"


def parse_cell_id(text: str) -> tuple[int, int, int]:
    try:
        lvl, col, row = text.split(":")
        if not lvl.startswith("L"):
            raise ValueError
        level, col, row = int(lvl[1:]), int(col), int(row)
    except (ValueError, AttributeError):
        raise ValueError(f"bad cell address {text!r}, expected L<level>:<col>:<row>") from None
    cols, rows = level_dims(level)
    if not (0 <= col < cols and 0 <= row < rows):
        raise OutOfBounds(f"cell {text} outside grid")
    return level, col, row


def check_geometry() -> None:
    """Internal consistency of the pyramid constants."""
    assert math.isclose(LON_MIN + BASE_COLS * BASE_CELL_DEG, LON_MAX, abs_tol=1e-9)
    assert math.isclose(LAT_MIN + BASE_ROWS * BASE_CELL_DEG, LAT_MAX, abs_tol=1e-9)
    for level in range(1, MAX_LEVEL + 1):
        cols, rows = level_dims(level)
        assert cols * (1 << (level - 1)) == BASE_COLS
        assert rows * (1 << (level - 1)) == BASE_ROWS
