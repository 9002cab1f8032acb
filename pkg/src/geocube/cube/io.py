"""CSV export of the cube's dimension and fact tables.

The exported schema mirrors the star layout of the persisted cube: a
spatial dimension table (cell, level, WKT geometry), a temporal dimension
table (interval, level, ISO bounds), a cuboid fact table and a flow fact
table.  Flow rows carry the arrival interval; same-cell flow rows are
never written.
"""

from __future__ import annotations

import csv
from pathlib import Path

from geocube import grid
from geocube.cube.core import Cube


def export_csv(cube: Cube, out_dir) -> dict[str, str]:
    """Write the four snapshot tables; returns {table: filename}."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "spatial": "spatial_dimension.csv",
        "temporal": "temporal_dimension.csv",
        "cuboid_facts": "cuboid_facts.csv",
        "flow_facts": "flow_facts.csv",
    }

    cells: set[tuple[int, int]] = set()
    intervals: set[int] = set()

    with open(out / files["cuboid_facts"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell_id", "interval_id", "group", "R", "V", "A", "O", "I", "S_lon", "S_lat", "V_flu"])
        for group in ("all", "ili"):
            tbl = cube.table(group, 1, 1)
            for (c, r, t), f in sorted(tbl.facts.items()):
                cells.add((c, r))
                intervals.add(t)
                w.writerow([
                    grid.cell_id(1, c, r), t, group, f.R, f.V, f.A, f.O, f.I,
                    "" if f.S_lon is None else f"{f.S_lon:.9f}",
                    "" if f.S_lat is None else f"{f.S_lat:.9f}",
                    f.V_flu,
                ])

    with open(out / files["flow_facts"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["origin_cell", "dest_cell", "interval_id", "group", "F", "F_flu", "F_migration"])
        for group in ("all", "ili"):
            tbl = cube.table(group, 1, 1)
            rows: dict[tuple, list[int]] = {}
            for (oc, orow, ot, dc, drow, dt), (f, ff) in tbl.moves.items():
                if (oc, orow) == (dc, drow):
                    continue  # interval hand-offs in place are not flow rows
                rows.setdefault((oc, orow, dc, drow, dt), [0, 0, 0])
                rows[(oc, orow, dc, drow, dt)][0] += f
                rows[(oc, orow, dc, drow, dt)][1] += ff
            for (oc, orow, ot, dc, drow, dt), n in tbl.migs.items():
                if (oc, orow) == (dc, drow):
                    continue
                rows.setdefault((oc, orow, dc, drow, dt), [0, 0, 0])
                rows[(oc, orow, dc, drow, dt)][2] += n
            for (oc, orow, dc, drow, dt), (f, ff, fm) in sorted(rows.items()):
                cells.add((oc, orow))
                cells.add((dc, drow))
                intervals.add(dt)
                w.writerow([grid.cell_id(1, oc, orow), grid.cell_id(1, dc, drow), dt, group, f, ff, fm])

    with open(out / files["spatial"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell_id", "level", "geometry"])
        for c, r in sorted(cells):
            x0, y0, x1, y1 = grid.cell_bounds(c, r, 1)
            wkt = f"POLYGON(({x0} {y0},{x1} {y0},{x1} {y1},{x0} {y1},{x0} {y0}))"
            w.writerow([grid.cell_id(1, c, r), 1, wkt])

    with open(out / files["temporal"], "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["interval_id", "level", "start", "end"])
        for t in sorted(intervals):
            start, end = cube.time_grid.interval_bounds(t)
            w.writerow([t, 1, grid.format_utc(start), grid.format_utc(end)])

    return files
