"""Base cube construction and dyadic roll-ups.

The base cube holds, per population group, one fact table at (spatial level
1, temporal level 1) plus dual-keyed transition tables: `moves` counts
consecutive-footprint transitions between distinct base cuboids (weighted
by total and by flu-related count) and `migs` counts per-user home
hand-offs between consecutive interval ends (a home that stays put still
hands off to the next interval; a cell change is a migration).  Coarser
levels are materialized lazily by merging 2x2 cell blocks or adjacent
interval pairs, turning transitions that fall inside a merged cuboid into
the internal-flow corrections of the aggregation functions.
"""

from __future__ import annotations

from dataclasses import dataclass

from geocube import grid
from geocube.cube.facts import (
    GROUPS,
    CuboidKey,
    Diagnostics,
    Fact,
    FlowKey,
    MissingChildren,
    merge_cuboids,
)
from geocube.trajectory import TrajectoryStore


class LevelTable:
    """Facts and transition tables at one (spatial level, temporal level)."""

    __slots__ = ("level", "t_level", "facts", "moves", "migs", "_origin_moves", "_origin_migs")

    def __init__(self, level: int, t_level: int):
        self.level = level
        self.t_level = t_level
        self.facts: dict[CuboidKey, Fact] = {}
        self.moves: dict[FlowKey, list[int]] = {}  # [F, F_flu]
        self.migs: dict[FlowKey, int] = {}
        self._origin_moves: dict[CuboidKey, list] | None = None
        self._origin_migs: dict[CuboidKey, list] | None = None

    def origin_moves(self, key: CuboidKey) -> list:
        """[(dest_key, F, F_flu)] for transitions departing a cuboid."""
        if self._origin_moves is None:
            idx: dict[CuboidKey, list] = {}
            for (oc, orow, ot, dc, drow, dt), (f, ff) in self.moves.items():
                idx.setdefault((oc, orow, ot), []).append(((dc, drow, dt), f, ff))
            self._origin_moves = idx
        return self._origin_moves.get(key, [])

    def origin_migs(self, key: CuboidKey) -> list:
        if self._origin_migs is None:
            idx: dict[CuboidKey, list] = {}
            for (oc, orow, ot, dc, drow, dt), n in self.migs.items():
                idx.setdefault((oc, orow, ot), []).append(((dc, drow, dt), n))
            self._origin_migs = idx
        return self._origin_migs.get(key, [])


def _bump(moves: dict[FlowKey, list[int]], key: FlowKey, flu: bool) -> None:
    entry = moves.get(key)
    if entry is None:
        moves[key] = [1, 1 if flu else 0]
    else:
        entry[0] += 1
        if flu:
            entry[1] += 1


def build_base(
    store: TrajectoryStore,
    time_grid: grid.TimeGrid | None = None,
    window: tuple[int, int] | None = None,
) -> "Cube":
    """Fill base cuboids and transition tables from all trajectories.

    window is (t0, t1) in epoch seconds; when omitted it covers every
    footprint, aligned to hour boundaries.  The "ili" group restricts every
    count to users infected at the underlying event's timestamp.
    """
    tg = time_grid or grid.TimeGrid()
    all_ts = [f[2] for traj in store for f in traj.footprints]
    if window is None:
        if all_ts:
            first = tg.interval_index(min(all_ts))
            last = tg.interval_index(max(all_ts)) + 1
        else:
            first = last = 0
    else:
        first, last = tg.base_range(window[0], window[1])

    tables = {g: LevelTable(1, 1) for g in GROUPS}
    # per-group staging: key -> [A, sum_lon, sum_lat], visitor/infected sets
    acts = {g: {} for g in GROUPS}
    users = {g: {} for g in GROUPS}
    flu_users = {g: {} for g in GROUPS}
    residents = {g: {} for g in GROUPS}

    for traj in store:
        uid = traj.user_id
        fps = traj.footprints
        if not fps:
            continue
        keys = []
        infected = []
        for lon, lat, ts, _flag in fps:
            col, row = grid.grid_index(lon, lat, 1)
            keys.append((col, row, tg.interval_index(ts)))
            infected.append(traj.is_infected(ts))

        for i, (lon, lat, ts, _flag) in enumerate(fps):
            key = keys[i]
            if not first <= key[2] < last:
                continue
            sel = ("all", "ili") if infected[i] else ("all",)
            for g in sel:
                a = acts[g].get(key)
                if a is None:
                    acts[g][key] = [1, lon, lat]
                else:
                    a[0] += 1
                    a[1] += lon
                    a[2] += lat
                users[g].setdefault(key, set()).add(uid)
                if infected[i]:
                    flu_users[g].setdefault(key, set()).add(uid)

        for i in range(len(fps) - 1):
            o, d = keys[i], keys[i + 1]
            if o == d:
                continue
            if not (first <= o[2] < last or first <= d[2] < last):
                continue
            flu_rel = infected[i] or infected[i + 1]
            _bump(tables["all"].moves, o + d, flu_rel)
            # the ili sub-population needs infection at both endpoints so
            # every counted transition starts and ends at an ili footprint
            if infected[i] and infected[i + 1]:
                _bump(tables["ili"].moves, o + d, True)

        # residency: home cell as of each interval end, plus hand-offs
        timeline = traj.home_timeline()
        if timeline:
            t_start = max(first, tg.interval_index(fps[0][2]))
            ptr = 0
            prev = None  # (key, infected_at_end)
            for t in range(t_start, last):
                end = tg.interval_bounds(t)[1] - 1
                while ptr + 1 < len(timeline) and timeline[ptr + 1][0] <= end:
                    ptr += 1
                home = timeline[ptr][1]
                key = (home[0], home[1], t)
                residents["all"][key] = residents["all"].get(key, 0) + 1
                inf = traj.is_infected(end)
                if inf:
                    residents["ili"][key] = residents["ili"].get(key, 0) + 1
                if prev is not None:
                    flow_key = prev[0] + key
                    tables["all"].migs[flow_key] = tables["all"].migs.get(flow_key, 0) + 1
                    if prev[1] and inf:
                        tables["ili"].migs[flow_key] = tables["ili"].migs.get(flow_key, 0) + 1
                prev = (key, inf)

    diagnostics = Diagnostics()
    for g in GROUPS:
        tbl = tables[g]
        for key, (a, s_lon, s_lat) in acts[g].items():
            tbl.facts[key] = Fact(
                A=a,
                V=len(users[g].get(key, ())),
                V_flu=len(flu_users[g].get(key, ())),
                S_lon=s_lon / a,
                S_lat=s_lat / a,
            )
        for key, count in residents[g].items():
            fact = tbl.facts.get(key)
            if fact is None:
                fact = Fact()
                tbl.facts[key] = fact
            fact.R = count
        for (oc, orow, ot, _dc, _drow, _dt), (f, _ff) in tbl.moves.items():
            if first <= ot < last:
                tbl.facts[(oc, orow, ot)].O += f
        for (_oc, _orow, _ot, dc, drow, dt), (f, _ff) in tbl.moves.items():
            if first <= dt < last:
                fact = tbl.facts.get((dc, drow, dt))
                if fact is None:
                    # arrivals from before the window may land on quiet cuboids
                    fact = Fact()
                    tbl.facts[(dc, drow, dt)] = fact
                fact.I += f
        # a user re-entering one cuboid pushes exact O/I past the distinct
        # visitor count; publish V raised to the same floor the roll-ups use
        for fact in tbl.facts.values():
            floor = max(fact.O, fact.I, fact.V_flu)
            if fact.V < floor:
                fact.V = floor
                diagnostics.reconciled += 1

    return Cube(tg, (first, last), tables, diagnostics)


def _roll_table(src: LevelTable, spatial: bool, diag: Diagnostics) -> LevelTable:
    """Merge one dyadic step: 2x2 cell blocks (spatial) or adjacent interval
    pairs (temporal)."""
    if spatial:
        dst = LevelTable(src.level + 1, src.t_level)

        def up(key: CuboidKey) -> CuboidKey:
            return (key[0] >> 1, key[1] >> 1, key[2])

    else:
        dst = LevelTable(src.level, src.t_level + 1)

        def up(key: CuboidKey) -> CuboidKey:
            return (key[0], key[1], key[2] >> 1)

    children: dict[CuboidKey, list[Fact]] = {}
    for key, fact in src.facts.items():
        children.setdefault(up(key), []).append(fact)

    internal: dict[CuboidKey, list[int]] = {}
    for key, (f, ff) in src.moves.items():
        po = up(key[:3])
        pd = up(key[3:])
        if po == pd:
            entry = internal.get(po)
            if entry is None:
                internal[po] = [f, ff]
            else:
                entry[0] += f
                entry[1] += ff
        else:
            entry = dst.moves.get(po + pd)
            if entry is None:
                dst.moves[po + pd] = [f, ff]
            else:
                entry[0] += f
                entry[1] += ff

    internal_mig: dict[CuboidKey, int] = {}
    for key, n in src.migs.items():
        po = up(key[:3])
        pd = up(key[3:])
        if po == pd:
            internal_mig[po] = internal_mig.get(po, 0) + n
        else:
            dst.migs[po + pd] = dst.migs.get(po + pd, 0) + n

    for pkey, kids in children.items():
        fi = internal.get(pkey, (0, 0))
        dst.facts[pkey] = merge_cuboids(kids, fi[0], fi[1], internal_mig.get(pkey, 0), diag)
    return dst


def rollup_flows(src: LevelTable, spatial: bool = True) -> dict[FlowKey, list[int]]:
    """Parent-level flow facts: sums over child cuboid pairs whose parents
    differ; pairs merging into one parent become internal and are dropped."""
    return _roll_table(src, spatial, Diagnostics()).moves


def rollup_cell(
    children: list[Fact],
    internal_f: int = 0,
    internal_f_flu: int = 0,
    internal_f_migration: int = 0,
    diagnostics: Diagnostics | None = None,
) -> Fact:
    """Merge explicit child cuboids into their parent (see merge_cuboids)."""
    if not children:
        raise MissingChildren("no child cuboids supplied")
    return merge_cuboids(children, internal_f, internal_f_flu, internal_f_migration, diagnostics)


class Cube:
    """Materialized base cube plus lazily rolled-up coarser tables."""

    MAX_T_LEVEL = 16

    def __init__(
        self,
        time_grid: grid.TimeGrid,
        window: tuple[int, int],
        base_tables,
        diagnostics: Diagnostics | None = None,
    ):
        self.time_grid = time_grid
        self.window = window  # [first, last) base interval indices
        self.diagnostics = diagnostics or Diagnostics()
        self._tables: dict[tuple[str, int, int], LevelTable] = {
            (g, 1, 1): t for g, t in base_tables.items()
        }

    def table(self, group: str, level: int = 1, t_level: int = 1) -> LevelTable:
        if group not in GROUPS:
            raise ValueError(f"unknown group {group!r}")
        if not 1 <= level <= grid.MAX_LEVEL or not 1 <= t_level <= self.MAX_T_LEVEL:
            raise ValueError(f"bad level ({level}, {t_level})")
        key = (group, level, t_level)
        tbl = self._tables.get(key)
        if tbl is None:
            if (group, 1, 1) not in self._tables:
                raise MissingChildren("base tables missing; build the cube first")
            if t_level > 1:
                tbl = _roll_table(self.table(group, level, t_level - 1), False, self.diagnostics)
            else:
                tbl = _roll_table(self.table(group, level - 1, 1), True, self.diagnostics)
            self._tables[key] = tbl
        return tbl

    def materialize(self, levels: range | list[int] | None = None) -> None:
        """Eagerly roll up the spatial pyramid (all groups)."""
        for g in GROUPS:
            for level in levels or range(1, grid.MAX_LEVEL + 1):
                self.table(g, level, 1)

    def total_activities(self, group: str = "all") -> int:
        return sum(f.A for f in self.table(group, 1, 1).facts.values())

    def occupied_base_cells(self, group: str = "all") -> set[tuple[int, int]]:
        return {(c, r) for (c, r, _t) in self.table(group, 1, 1).facts}
