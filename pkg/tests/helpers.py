"""Shared test fixtures: compact post construction on the base grid."""

from __future__ import annotations

from geocube.ingest import Post

LON_MIN = -167.276413
LAT_MIN = 5.499550
DEG = 0.008333
EPOCH = 1388534400  # 2014-01-01T00:00:00Z


def hours(h: float) -> int:
    return EPOCH + int(h * 3600)


def cell_lonlat(col: int, row: int, fx: float = 0.5, fy: float = 0.5) -> tuple[float, float]:
    """Coordinate inside base cell (col, row) at fractional offset (fx, fy)."""
    return LON_MIN + (col + fx) * DEG, LAT_MIN + (row + fy) * DEG


def post_at(
    user: str,
    col: int,
    row: int,
    ts: int,
    flu: bool = False,
    fx: float = 0.5,
    fy: float = 0.5,
    text: str | None = None,
) -> Post:
    lon, lat = cell_lonlat(col, row, fx, fy)
    if text is None:
        text = "down with the flu" if flu else "hello world"
    return Post(user, lon, lat, ts, text, flu)
