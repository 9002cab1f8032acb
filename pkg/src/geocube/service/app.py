"""HTTP API over a published snapshot.

Read-only: every request binds to the snapshot version current at its
start; a new published version is picked up on the next request.  All
timestamps are ISO-8601 UTC and all cells are addressed as
"L{level}:{col}:{row}".  Errors come back as {code, message}.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pathlib import Path

from geocube import grid
from geocube.cube import (
    Cube,
    EmptyRegion,
    Fact,
    build_base,
    flow_query,
    flu_points,
    flu_risk_surface,
    region_aggregate,
)
from geocube.flowmap import (
    FdebParams,
    FlowGraph,
    critical_nodes,
    fdeb_bundle,
    feature_collection,
    single_source_tree,
    straight_polylines,
)
from geocube.service.snapshot import SnapshotMissing, SnapshotStore


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


class SnapshotState:
    """Mounted snapshot with hot reload on version changes."""

    def __init__(self, snapshot_root):
        self.store = SnapshotStore(snapshot_root)
        self._lock = threading.Lock()
        self._version: int | None = None
        self._cube: Cube | None = None
        self._manifest = None

    def current(self):
        version = self.store.current_version()
        if version is None:
            raise ApiError(503, "snapshot_missing", "no snapshot has been published")
        with self._lock:
            if version != self._version:
                manifest = self.store.manifest(version)
                trajectories = self.store.load_trajectories(version)
                self._cube = build_base(trajectories)
                self._trajectories = trajectories
                self._manifest = manifest
                self._version = version
            return self._version, self._manifest, self._cube, self._trajectories


def _parse_ts(value: str, name: str) -> int:
    try:
        return grid.parse_utc(value)
    except ValueError:
        raise ApiError(400, "bad_timestamp", f"{name} is not an ISO-8601 UTC timestamp") from None


def _parse_cell(value: str) -> tuple[int, int, int]:
    try:
        return grid.parse_cell_id(value)
    except grid.OutOfBounds:
        raise ApiError(404, "unknown_cell", f"cell {value} outside the grid") from None
    except ValueError as exc:
        raise ApiError(400, "bad_cell", str(exc)) from None


def _parse_bbox(value: str | None):
    if value is None:
        return None
    try:
        lon0, lat0, lon1, lat1 = (float(x) for x in value.split(","))
    except ValueError:
        raise ApiError(400, "bad_bbox", "bbox must be lon0,lat0,lon1,lat1") from None
    return min(lon0, lon1), min(lat0, lat1), max(lon0, lon1), max(lat0, lat1)


def _check_group(group: str) -> str:
    if group not in ("all", "ili"):
        raise ApiError(400, "bad_group", "group must be 'all' or 'ili'")
    return group


def _check_level(level: int) -> int:
    if not 1 <= level <= grid.MAX_LEVEL:
        raise ApiError(400, "bad_level", f"level must be in 1..{grid.MAX_LEVEL}")
    return level


def _fact_dict(fact: Fact) -> dict:
    return {
        "R": fact.R,
        "V": fact.V,
        "A": fact.A,
        "O": fact.O,
        "I": fact.I,
        "V_flu": fact.V_flu,
        "S_lon": fact.S_lon,
        "S_lat": fact.S_lat,
    }


def create_app(snapshot_root, static_dir=None) -> FastAPI:
    app = FastAPI(title="geocube", version="0.1.0")
    state = SnapshotState(snapshot_root)
    app.state.snapshots = state

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(EmptyRegion)
    async def empty_region_handler(_request: Request, exc: EmptyRegion):
        return JSONResponse(status_code=400, content={"code": "empty_region", "message": str(exc)})

    @app.get("/healthz")
    def healthz():
        try:
            version, manifest, _cube, _store = state.current()
        except ApiError:
            return {"status": "empty", "version": None}
        return {"status": "ok", "version": version, "post_count": manifest.post_count}

    @app.get("/cube/cells")
    def cube_cells(
        level: int = Query(...),
        t0: str = Query(...),
        t1: str = Query(...),
        group: str = "all",
        bbox: str | None = None,
    ):
        version, _m, cube, _s = state.current()
        _check_level(level)
        _check_group(group)
        ts0, ts1 = _parse_ts(t0, "t0"), _parse_ts(t1, "t1")
        if ts0 > ts1:
            raise ApiError(400, "bad_window", "t0 must be <= t1")
        box = _parse_bbox(bbox)
        cells = set()
        for c, r in cube.occupied_base_cells(group):
            cc, rr = grid.cell_at_level(c, r, 1, level)
            if box is not None:
                lon, lat = grid.cell_center(cc, rr, level)
                if not (box[0] <= lon <= box[2] and box[1] <= lat <= box[3]):
                    continue
            cells.add((cc, rr))
        out = []
        for cc, rr in sorted(cells):
            fact, _meta = region_aggregate(cube, cells={(cc, rr)}, level=level, t0=ts0, t1=ts1, group=group)
            if fact.A == 0 and fact.R == 0 and fact.V == 0:
                continue
            row = {"cell": grid.cell_id(level, cc, rr), "col": cc, "row": rr}
            row.update(_fact_dict(fact))
            out.append(row)
        return {"version": version, "level": level, "group": group, "cells": out}

    @app.post("/cube/region")
    def cube_region(body: dict):
        version, _m, cube, _s = state.current()
        for key in ("polygon", "t0", "t1"):
            if key not in body:
                raise ApiError(400, "missing_field", f"body must include {key}")
        group = _check_group(body.get("group", "all"))
        ts0 = _parse_ts(str(body["t0"]), "t0")
        ts1 = _parse_ts(str(body["t1"]), "t1")
        if ts0 > ts1:
            raise ApiError(400, "bad_window", "t0 must be <= t1")
        try:
            fact, meta = region_aggregate(cube, polygon=body["polygon"], t0=ts0, t1=ts1, group=group)
        except (ValueError, TypeError) as exc:
            if isinstance(exc, EmptyRegion):
                raise
            raise ApiError(400, "bad_polygon", str(exc)) from None
        return {"version": version, "group": group, "fact": _fact_dict(fact), "meta": meta}

    @app.get("/flows")
    def flows(
        src: str = Query(...),
        level: int = Query(...),
        t0: str = Query(...),
        t1: str = Query(...),
        dst: str = "all",
        group: str = "all",
    ):
        version, _m, cube, _s = state.current()
        _check_level(level)
        _check_group(group)
        ts0, ts1 = _parse_ts(t0, "t0"), _parse_ts(t1, "t1")
        src_cells = _cells_from_param(src, level)
        dst_cells = None if dst == "all" else _cells_from_param(dst, level)
        rows = flow_query(cube, src_cells, level, dst_cells, t0=ts0, t1=ts1, group=group)
        return {
            "version": version,
            "level": level,
            "group": group,
            "flows": [
                {
                    "origin": grid.cell_id(level, o[0], o[1]),
                    "dest": grid.cell_id(level, d[0], d[1]),
                    "F": f,
                    "F_flu": ff,
                    "F_migration": fm,
                }
                for o, d, f, ff, fm in rows
            ],
        }

    @app.get("/flows/single-source")
    def flows_single_source(
        cell: str = Query(...),
        t0: str = Query(...),
        t1: str = Query(...),
        level: int | None = None,
        group: str = "all",
        angle: float = 25.0,
    ):
        version, _m, cube, _s = state.current()
        _check_group(group)
        lvl, col, row = _parse_cell(cell)
        if level is not None and level != lvl:
            raise ApiError(400, "bad_level", "level conflicts with the cell address")
        if not 0 < angle < 90:
            raise ApiError(400, "bad_angle", "angle must be in (0, 90)")
        ts0, ts1 = _parse_ts(t0, "t0"), _parse_ts(t1, "t1")
        rows = flow_query(cube, {(col, row)}, lvl, None, t0=ts0, t1=ts1, group=group)
        source = grid.cell_center(col, row, lvl)
        if not rows:
            return {"version": version, "total_flow": 0, "tree": feature_collection([])}
        dests = [
            (grid.cell_id(lvl, d[0], d[1]), grid.cell_center(d[0], d[1], lvl), f)
            for _o, d, f, _ff, _fm in rows
            if f > 0
        ]
        if not dests:
            return {"version": version, "total_flow": 0, "tree": feature_collection([])}
        tree = single_source_tree(source, dests, angle, source_id=cell)
        return {
            "version": version,
            "total_flow": sum(f for _i, _c, f in dests),
            "tree": feature_collection(tree),
        }

    @app.get("/flows/multi")
    def flows_multi(
        level: int = Query(...),
        t0: str = Query(...),
        t1: str = Query(...),
        bbox: str | None = None,
        group: str = "all",
        global_fraction: float = 0.2,
        local_k: int = 1,
        neighbor_radius: int = 2,
    ):
        version, _m, cube, _s = state.current()
        _check_level(level)
        _check_group(group)
        if not 0 < global_fraction <= 1:
            raise ApiError(400, "bad_fraction", "global_fraction must be in (0, 1]")
        ts0, ts1 = _parse_ts(t0, "t0"), _parse_ts(t1, "t1")
        box = _parse_bbox(bbox)
        cells = set()
        for c, r in cube.occupied_base_cells(group):
            cc, rr = grid.cell_at_level(c, r, 1, level)
            if box is not None:
                lon, lat = grid.cell_center(cc, rr, level)
                if not (box[0] <= lon <= box[2] and box[1] <= lat <= box[3]):
                    continue
            cells.add((cc, rr))
        if not cells:
            return {"version": version, "layout": feature_collection([])}
        rows = flow_query(cube, cells, level, cells, t0=ts0, t1=ts1, group=group)
        graph = FlowGraph.from_flow_rows(rows, level)
        keep = critical_nodes(graph, global_fraction, neighbor_radius, local_k)
        if not keep:
            keep = set(graph.nodes)
        pair_f = {(o, d): f for o, d, f, _ff, _fm in rows}
        specs = []
        labels = []
        seen_pairs = set()
        for o, d, f, ff, _fm in rows:
            if o not in keep or d not in keep:
                continue
            if (d, o) in seen_pairs:
                continue
            seen_pairs.add((o, d))
            specs.append(
                (
                    grid.cell_id(level, o[0], o[1]),
                    grid.cell_id(level, d[0], d[1]),
                    grid.cell_center(o[0], o[1], level),
                    grid.cell_center(d[0], d[1], level),
                    f,
                    ff,
                )
            )
            labels.append({"label": f"Flow#: ({f}, {pair_f.get((d, o), 0)})"})
        bundled = fdeb_bundle(straight_polylines(specs), FdebParams())
        return {"version": version, "layout": feature_collection(bundled, labels)}

    @app.get("/risk")
    def risk(
        level: int = Query(...),
        t0: str = Query(...),
        t1: str = Query(...),
        bandwidth_km: float = Query(...),
    ):
        version, _m, _cube, trajectories = state.current()
        if not 3 <= level <= grid.MAX_LEVEL:
            raise ApiError(400, "bad_level", "risk level must be in 3..10")
        if bandwidth_km <= 0:
            raise ApiError(400, "bad_bandwidth", "bandwidth_km must be positive")
        ts0, ts1 = _parse_ts(t0, "t0"), _parse_ts(t1, "t1")
        lon, lat = flu_points(trajectories, ts0, ts1)
        surface = flu_risk_surface(lon, lat, bandwidth_km, level)
        rows, cols = surface.shape
        nz = surface.nonzero()
        cells = [
            [int(c), int(r), float(surface[r, c])]
            for r, c in zip(nz[0].tolist(), nz[1].tolist())
        ]
        return {
            "version": version,
            "level": level,
            "cols": cols,
            "rows": rows,
            "n_points": int(len(lon)),
            "cells": cells,
        }

    def _cells_from_param(param: str, level: int) -> set[tuple[int, int]]:
        cells = set()
        for token in param.split(","):
            lvl, col, row = _parse_cell(token.strip())
            if lvl != level:
                raise ApiError(400, "bad_cell", f"cell {token} is not at level {level}")
            cells.add((col, row))
        if not cells:
            raise ApiError(400, "bad_cell", "no cells given")
        return cells

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
