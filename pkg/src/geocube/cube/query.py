"""Aggregate and flow queries over the materialized cube.

Regions are either uniform cell sets at some pyramid level or polygons
resolved to base cells by cell-center containment.  Time windows decompose
into the largest aligned dyadic intervals; polygon regions additionally
coalesce into maximal dyadic cell blocks so queries touch as few
materialized cuboids as possible.
"""

from __future__ import annotations

import numpy as np
import shapely

from geocube import grid
from geocube.cube.core import Cube
from geocube.cube.facts import EmptyRegion, Fact, merge_cuboids

Cell = tuple[int, int]


def dyadic_time_blocks(first: int, last: int, max_t_level: int) -> tuple[int, list[int]]:
    """Largest temporal level whose intervals tile [first, last) exactly,
    plus the block indices at that level."""
    span = last - first
    if span <= 0:
        return 1, []
    width, t_level = 1, 1
    while (
        t_level < max_t_level
        and first % (2 * width) == 0
        and span % (2 * width) == 0
        and span >= 2 * width
    ):
        width *= 2
        t_level += 1
    return t_level, list(range(first // width, last // width))


def dyadic_spatial_blocks(cells: set[Cell]) -> list[tuple[int, int, int]]:
    """Greedy coalescing of base cells into maximal fully-covered dyadic
    blocks; returns (level, col, row) triples."""
    blocks: list[tuple[int, int, int]] = []
    current = set(cells)
    level = 1
    while level < grid.MAX_LEVEL and len(current) >= 4:
        by_parent: dict[Cell, list[Cell]] = {}
        for cell in current:
            by_parent.setdefault((cell[0] >> 1, cell[1] >> 1), []).append(cell)
        nxt = set()
        for parent, kids in by_parent.items():
            if len(kids) == 4:
                nxt.add(parent)
            else:
                blocks.extend((level, c, r) for (c, r) in kids)
        current = nxt
        level += 1
    blocks.extend((level, c, r) for (c, r) in current)
    return blocks


def polygon_to_base_cells(cube: Cube, polygon) -> set[Cell]:
    """Base cells whose centers fall inside the polygon.

    Only cells carrying facts are returned (empty cells contribute zeros);
    EmptyRegion is raised when the polygon covers no cell center at all.
    Accepts a shapely geometry or GeoJSON-style mapping.
    """
    if not isinstance(polygon, shapely.Geometry):
        polygon = shapely.geometry.shape(polygon)
    bbox = shapely.box(grid.LON_MIN, grid.LAT_MIN, grid.LON_MAX, grid.LAT_MAX)
    if not polygon.intersects(bbox):
        raise EmptyRegion("polygon does not intersect the study bbox")

    occupied = sorted(cube.occupied_base_cells("all"))
    selected: set[Cell] = set()
    if occupied:
        lon = np.array([grid.cell_center(c, r, 1)[0] for c, r in occupied])
        lat = np.array([grid.cell_center(c, r, 1)[1] for c, r in occupied])
        inside = shapely.contains_xy(polygon, lon, lat)
        selected = {cell for cell, ok in zip(occupied, inside) if ok}
    if selected:
        return selected

    # nothing with data inside; decide between a legitimately empty result
    # and a polygon too small to contain any cell center
    minx, miny, maxx, maxy = polygon.bounds
    c0 = max(0, int((minx - grid.LON_MIN) / grid.BASE_CELL_DEG) - 1)
    c1 = min(grid.BASE_COLS - 1, int((maxx - grid.LON_MIN) / grid.BASE_CELL_DEG) + 1)
    r0 = max(0, int((miny - grid.LAT_MIN) / grid.BASE_CELL_DEG) - 1)
    r1 = min(grid.BASE_ROWS - 1, int((maxy - grid.LAT_MIN) / grid.BASE_CELL_DEG) + 1)
    n_candidates = (c1 - c0 + 1) * (r1 - r0 + 1)
    if n_candidates <= 2_000_000:
        cols = grid.LON_MIN + (np.arange(c0, c1 + 1) + 0.5) * grid.BASE_CELL_DEG
        rows = grid.LAT_MIN + (np.arange(r0, r1 + 1) + 0.5) * grid.BASE_CELL_DEG
        cc, rr = np.meshgrid(cols, rows)
        if not shapely.contains_xy(polygon, cc.ravel(), rr.ravel()).any():
            raise EmptyRegion("polygon contains no base cell center")
    return selected


def region_aggregate(
    cube: Cube,
    *,
    cells: set[Cell] | None = None,
    level: int = 1,
    polygon=None,
    t0: int,
    t1: int,
    group: str = "all",
) -> tuple[Fact, dict]:
    """Aggregate all measures over a region and time window.

    Returns (fact, meta).  The region is a uniform cell set at `level`, or
    a polygon resolved to base cells.  Measures merge via the cube's
    aggregation functions using the largest aligned cuboids available.
    """
    if t0 > t1:
        raise ValueError("t0 must be <= t1")
    first, last = cube.time_grid.base_range(t0, t1)

    if polygon is not None:
        base_cells = polygon_to_base_cells(cube, polygon)
        return _aggregate_blocks(cube, base_cells, first, last, group)

    if not cells:
        raise EmptyRegion("no cells given")
    cols, rows = grid.level_dims(level)
    for c, r in cells:
        if not (0 <= c < cols and 0 <= r < rows):
            raise EmptyRegion(f"cell ({c}, {r}) outside level {level} grid")

    t_level, tblocks = dyadic_time_blocks(first, last, cube.MAX_T_LEVEL)
    tbl = cube.table(group, level, t_level)
    cuboids = {(c, r, tb) for (c, r) in cells for tb in tblocks}
    facts = [tbl.facts[k] for k in cuboids if k in tbl.facts]
    f_int = f_flu_int = mig_int = 0
    for key in cuboids:
        for dest, f, ff in tbl.origin_moves(key):
            if dest in cuboids:
                f_int += f
                f_flu_int += ff
        for dest, n in tbl.origin_migs(key):
            if dest in cuboids:
                mig_int += n
    fact = merge_cuboids(facts, f_int, f_flu_int, mig_int, cube.diagnostics)
    meta = {
        "n_cells": len(cells),
        "level": level,
        "t_level": t_level,
        "n_cuboids": len(facts),
        "intervals": [first, last],
    }
    return fact, meta


def _aggregate_blocks(cube, base_cells, first, last, group):
    """Polygon path: mixed-level dyadic blocks with base-level corrections."""
    t_level, tblocks = dyadic_time_blocks(first, last, cube.MAX_T_LEVEL)
    blocks = dyadic_spatial_blocks(base_cells)
    block_of: dict[Cell, int] = {}
    for idx, (lv, c, r) in enumerate(blocks):
        if lv == 1:
            block_of[(c, r)] = idx
        else:
            shift = lv - 1
            for dc in range(1 << shift):
                for dr in range(1 << shift):
                    block_of[((c << shift) + dc, (r << shift) + dr)] = idx

    facts = []
    for lv, c, r in blocks:
        tbl = cube.table(group, lv, t_level)
        for tb in tblocks:
            fact = tbl.facts.get((c, r, tb))
            if fact is not None:
                facts.append(fact)

    shift_t = t_level - 1
    f_int = f_flu_int = mig_int = 0
    base = cube.table(group, 1, 1)
    for (oc, orow, ot, dc, drow, dt), (f, ff) in base.moves.items():
        if not (first <= ot < last and first <= dt < last):
            continue
        bo = block_of.get((oc, orow))
        if bo is None:
            continue
        bd = block_of.get((dc, drow))
        if bd is None:
            continue
        if bo == bd and (ot >> shift_t) == (dt >> shift_t):
            continue  # internal to one block cuboid: already corrected
        f_int += f
        f_flu_int += ff
    for (oc, orow, ot, dc, drow, dt), n in base.migs.items():
        if not (first <= ot < last and first <= dt < last):
            continue
        bo = block_of.get((oc, orow))
        if bo is None:
            continue
        bd = block_of.get((dc, drow))
        if bd is None:
            continue
        if bo == bd and (ot >> shift_t) == (dt >> shift_t):
            continue
        mig_int += n

    fact = merge_cuboids(facts, f_int, f_flu_int, mig_int, cube.diagnostics)
    meta = {
        "n_cells": len(base_cells),
        "level": 1,
        "t_level": t_level,
        "n_blocks": len(blocks),
        "intervals": [first, last],
    }
    return fact, meta


def flow_query(
    cube: Cube,
    src: set[Cell],
    level: int,
    dst: set[Cell] | None = None,
    *,
    t0: int,
    t1: int,
    group: str = "all",
) -> list[tuple[Cell, Cell, int, int, int]]:
    """Aggregated (origin, dest, F, F_flu, F_migration) rows at one level.

    Flows are attributed to their arrival interval; self-pairs are excluded;
    dst=None means "all destinations".  Sorted by F descending.
    """
    if t0 > t1:
        raise ValueError("t0 must be <= t1")
    first, last = cube.time_grid.base_range(t0, t1)
    tbl = cube.table(group, level, 1)
    agg: dict[tuple[Cell, Cell], list[int]] = {}
    for (oc, orow, ot, dc, drow, dt), (f, ff) in tbl.moves.items():
        o_cell, d_cell = (oc, orow), (dc, drow)
        if o_cell == d_cell or o_cell not in src:
            continue
        if dst is not None and d_cell not in dst:
            continue
        if not first <= dt < last:
            continue
        entry = agg.setdefault((o_cell, d_cell), [0, 0, 0])
        entry[0] += f
        entry[1] += ff
    for (oc, orow, ot, dc, drow, dt), n in tbl.migs.items():
        o_cell, d_cell = (oc, orow), (dc, drow)
        if o_cell == d_cell or o_cell not in src:
            continue
        if dst is not None and d_cell not in dst:
            continue
        if not first <= dt < last:
            continue
        agg.setdefault((o_cell, d_cell), [0, 0, 0])[2] += n
    rows = [(o, d, v[0], v[1], v[2]) for (o, d), v in agg.items()]
    rows.sort(key=lambda r: (-r[2], r[0], r[1]))
    return rows
