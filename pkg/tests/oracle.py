"""Brute-force reference implementation used to check the cube engine.

Everything here is recomputed from the raw post list by definition
scanning: trajectories are replayed with a full argmax recount per post,
infection checks scan the flu timestamps, and every measure for a
(region, window, group) compartment is counted directly.  Nothing imports
the engine's cube machinery.
"""

from __future__ import annotations

from collections import defaultdict

LON_MIN = -167.276413
LAT_MIN = 5.499550
DEG = 0.008333
WEEK = 7 * 86400
HOUR = 3600


def base_cell(lon: float, lat: float) -> tuple[int, int]:
    return int((lon - LON_MIN) / DEG), int((lat - LAT_MIN) / DEG)


class UserReplay:
    def __init__(self, posts):
        # (lon, lat, ts, flu) ordered by ts
        self.posts = sorted(posts, key=lambda p: p[2])
        self.flu_ts = [p[2] for p in self.posts if p[3]]
        self.home_changes: list[tuple[int, tuple[int, int]]] = []
        counts: dict[tuple[int, int], int] = {}
        first_seen: dict[tuple[int, int], int] = {}
        home = None
        for i, (lon, lat, ts, _flu) in enumerate(self.posts):
            cell = base_cell(lon, lat)
            counts[cell] = counts.get(cell, 0) + 1
            first_seen.setdefault(cell, i)
            best = min(counts.items(), key=lambda kv: (-kv[1], first_seen[kv[0]]))[0]
            if best != home:
                self.home_changes.append((ts, best))
                home = best

    def infected(self, ts: int) -> bool:
        return any(ts - WEEK <= ft <= ts for ft in self.flu_ts)

    def home_at(self, ts: int):
        home = None
        for t, cell in self.home_changes:
            if t <= ts:
                home = cell
            else:
                break
        return home


class StreamOracle:
    def __init__(self, posts, epoch: int):
        by_user = defaultdict(list)
        for p in posts:
            by_user[p.user_id].append((p.lon, p.lat, p.ts, p.flu_flag))
        self.users = {u: UserReplay(ps) for u, ps in by_user.items()}
        self.epoch = epoch

    def interval(self, ts: int) -> int:
        return (ts - self.epoch) // HOUR

    def interval_end(self, t: int) -> int:
        return self.epoch + (t + 1) * HOUR - 1

    # -- event streams ------------------------------------------------------

    def footprints(self, group: str):
        """(user, cell, t_index, ts, infected) for the group's activities."""
        for uid, rep in self.users.items():
            for lon, lat, ts, _flu in rep.posts:
                inf = rep.infected(ts)
                if group == "ili" and not inf:
                    continue
                yield uid, base_cell(lon, lat), self.interval(ts), ts, inf, lon, lat

    def transitions(self, group: str):
        """(user, o_cell, o_t, d_cell, d_t, flu_related) cuboid transitions."""
        for uid, rep in self.users.items():
            for a, b in zip(rep.posts, rep.posts[1:]):
                o = (base_cell(a[0], a[1]), self.interval(a[2]))
                d = (base_cell(b[0], b[1]), self.interval(b[2]))
                if o == d:
                    continue
                inf_a, inf_b = rep.infected(a[2]), rep.infected(b[2])
                if group == "ili" and not (inf_a and inf_b):
                    continue
                yield uid, o[0], o[1], d[0], d[1], inf_a or inf_b

    def residencies(self, group: str, first: int, last: int):
        """(user, home_cell, t_index) for each interval end in [first, last)."""
        for uid, rep in self.users.items():
            for t in range(first, last):
                end = self.interval_end(t)
                home = rep.home_at(end)
                if home is None:
                    continue
                if group == "ili" and not rep.infected(end):
                    continue
                yield uid, home, t

    # -- measures -----------------------------------------------------------

    def all_base_facts(self, group: str, window) -> dict:
        """One-pass reference facts for every base cuboid in the window."""
        first, last = window
        facts: dict[tuple, dict] = {}

        def entry(cell, t):
            key = (cell[0], cell[1], t)
            if key not in facts:
                facts[key] = {
                    "A": 0, "O": 0, "I": 0, "R": 0,
                    "visitors": set(), "flu_visitors": set(),
                    "s_lon": 0.0, "s_lat": 0.0,
                }
            return facts[key]

        for uid, cell, t, _ts, inf, lon, lat in self.footprints(group):
            if not first <= t < last:
                continue
            e = entry(cell, t)
            e["A"] += 1
            e["s_lon"] += lon
            e["s_lat"] += lat
            e["visitors"].add(uid)
            if inf:
                e["flu_visitors"].add(uid)
        for _uid, oc, ot, dc, dt, _flu in self.transitions(group):
            if first <= ot < last:
                entry(oc, ot)["O"] += 1
            if first <= dt < last:
                entry(dc, dt)["I"] += 1
        for uid, home, t in self.residencies(group, first, last):
            entry(home, t)["R"] += 1

        out = {}
        for key, e in facts.items():
            a = e["A"]
            out[key] = {
                "A": a,
                "V": len(e["visitors"]),
                "V_flu": len(e["flu_visitors"]),
                "R": e["R"],
                "O": e["O"],
                "I": e["I"],
                "S_lon": e["s_lon"] / a if a else None,
                "S_lat": e["s_lat"] / a if a else None,
            }
        return out

    def level_facts(self, level: int, t_level: int, group: str, window) -> tuple[dict, dict, dict]:
        """Reference tables at one (level, t_level) by direct bucketing.

        Returns (facts, moves, migs): facts[key] has exact A/V/V_flu/R/O/I/S
        from definition scanning (V by distinct sets, no flow corrections);
        moves[key] = [F, F_flu] and migs[key] = count for cuboid pairs,
        transitions internal to one cuboid dropped.
        """
        shift, tshift = level - 1, t_level - 1
        first, last = window
        acc: dict[tuple, dict] = {}

        def entry(key):
            if key not in acc:
                acc[key] = {
                    "A": 0, "O": 0, "I": 0, "R": 0,
                    "visitors": set(), "flu_visitors": set(), "residents": set(),
                    "s_lon": 0.0, "s_lat": 0.0,
                }
            return acc[key]

        for uid, cell, t, _ts, inf, lon, lat in self.footprints(group):
            if not first <= t < last:
                continue
            key = (cell[0] >> shift, cell[1] >> shift, t >> tshift)
            e = entry(key)
            e["A"] += 1
            e["s_lon"] += lon
            e["s_lat"] += lat
            e["visitors"].add(uid)
            if inf:
                e["flu_visitors"].add(uid)

        moves: dict[tuple, list[int]] = {}
        for _uid, oc, ot, dc, dt, flu in self.transitions(group):
            okey = (oc[0] >> shift, oc[1] >> shift, ot >> tshift)
            dkey = (dc[0] >> shift, dc[1] >> shift, dt >> tshift)
            if okey == dkey:
                continue
            if first <= ot < last:
                entry(okey)["O"] += 1
            if first <= dt < last:
                entry(dkey)["I"] += 1
            if first <= ot < last or first <= dt < last:
                m = moves.setdefault(okey + dkey, [0, 0])
                m[0] += 1
                if flu:
                    m[1] += 1

        migs: dict[tuple, int] = {}
        res_series: dict[str, dict[int, tuple]] = defaultdict(dict)
        for uid, home, t in self.residencies(group, first, last):
            key = (home[0] >> shift, home[1] >> shift, t >> tshift)
            entry(key)["residents"].add(uid)
            res_series[uid][t] = key
        for uid, series in res_series.items():
            for t, key in series.items():
                nxt = series.get(t + 1)
                if nxt is not None and nxt != key:
                    migs[key + nxt] = migs.get(key + nxt, 0) + 1

        facts = {}
        for key, e in acc.items():
            a = e["A"]
            facts[key] = {
                "A": a,
                "V": len(e["visitors"]),
                "V_flu": len(e["flu_visitors"]),
                "R": len(e["residents"]),
                "O": e["O"],
                "I": e["I"],
                "S_lon": e["s_lon"] / a if a else None,
                "S_lat": e["s_lat"] / a if a else None,
            }
        return facts, moves, migs

    def cuboid(self, cells, intervals, group: str = "all", window=None) -> dict:
        """All measures for the union of (cells x intervals) base cuboids."""
        cells = set(cells)
        intervals = set(intervals)
        a = 0
        s_lon = s_lat = 0.0
        visitors = set()
        flu_visitors = set()
        for uid, cell, t, ts, inf, lon, lat in self.footprints(group):
            if cell in cells and t in intervals:
                a += 1
                s_lon += lon
                s_lat += lat
                visitors.add(uid)
                if inf:
                    flu_visitors.add(uid)
        out_moves = in_moves = 0
        for _uid, oc, ot, dc, dt, _flu in self.transitions(group):
            o_in = oc in cells and ot in intervals
            d_in = dc in cells and dt in intervals
            if o_in and not d_in:
                out_moves += 1
            if d_in and not o_in:
                in_moves += 1
        if window is None:
            window = (min(intervals), max(intervals) + 1) if intervals else (0, 0)
        residents = set()
        for uid, home, t in self.residencies(group, window[0], window[1]):
            if home in cells and t in intervals:
                residents.add(uid)
        return {
            "A": a,
            "V": len(visitors),
            "V_flu": len(flu_visitors),
            "R": len(residents),
            "O": out_moves,
            "I": in_moves,
            "S_lon": s_lon / a if a else None,
            "S_lat": s_lat / a if a else None,
        }

    def flow(self, cells_a, intervals_a, cells_b, intervals_b, group: str = "all") -> tuple[int, int]:
        """(F, F_flu) from cuboid-set A to cuboid-set B."""
        cells_a, cells_b = set(cells_a), set(cells_b)
        intervals_a, intervals_b = set(intervals_a), set(intervals_b)
        f = f_flu = 0
        for _uid, oc, ot, dc, dt, flu in self.transitions(group):
            if oc in cells_a and ot in intervals_a and dc in cells_b and dt in intervals_b:
                f += 1
                if flu:
                    f_flu += 1
        return f, f_flu

    def migration_flow(self, cells_a, intervals_a, cells_b, intervals_b, group, window) -> int:
        """Home hand-offs between consecutive interval ends crossing the two
        cuboid sets."""
        cells_a, cells_b = set(cells_a), set(cells_b)
        intervals_a, intervals_b = set(intervals_a), set(intervals_b)
        res = defaultdict(dict)
        for uid, home, t in self.residencies(group, window[0], window[1]):
            res[uid][t] = home
        n = 0
        for uid, series in res.items():
            for t, home in series.items():
                nxt = series.get(t + 1)
                if nxt is None:
                    continue
                if home in cells_a and t in intervals_a and nxt in cells_b and (t + 1) in intervals_b:
                    n += 1
        return n

    def cell_flows(self, level: int, first: int, last: int, group: str = "all") -> dict:
        """flow_query reference: {(o_cell, d_cell): [F, F_flu]} at a level,
        arrival-attributed window filter, self-pairs excluded."""
        shift = level - 1
        agg: dict[tuple, list[int]] = {}
        for _uid, oc, ot, dc, dt, flu in self.transitions(group):
            po = (oc[0] >> shift, oc[1] >> shift)
            pd = (dc[0] >> shift, dc[1] >> shift)
            if po == pd or not first <= dt < last:
                continue
            entry = agg.setdefault((po, pd), [0, 0])
            entry[0] += 1
            if flu:
                entry[1] += 1
        return agg
