"""Per-user space-time trajectories.

A trajectory is the time-ordered footprint list of one user plus derived
state: visit counts per base cell, home cell (most-visited, earliest-first-
visit tie-break), radius of gyration, home migration log, and the 7-day
ILI infection window.
"""

from __future__ import annotations

import json
import math
import threading
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from geocube import grid
from geocube.geo import haversine_km, haversine_km_arr

INFECTION_WINDOW_S = 7 * 86400

Cell = tuple[int, int]


class OutOfOrderPost(ValueError):
    """Post timestamp precedes the trajectory's latest footprint."""


class EmptyTrajectory(ValueError):
    """Operation requires at least one footprint."""


@dataclass
class Move:
    """One consecutive-footprint transition."""

    user_id: str
    from_lon: float
    from_lat: float
    to_lon: float
    to_lat: float
    depart: int
    arrive: int
    flu_related: bool


class Trajectory:
    """Footprint sequence and derived measures for one user."""

    __slots__ = (
        "user_id", "footprints", "visit_counts", "_first_visit", "home_cell",
        "migration_log", "flu_times", "_sum_lon", "_sum_lat", "_gyr_cache",
        "lock",
    )

    def __init__(self, user_id: str):
        self.user_id = user_id
        self.footprints: list[tuple[float, float, int, bool]] = []
        self.visit_counts: dict[Cell, int] = {}
        self._first_visit: dict[Cell, int] = {}
        self.home_cell: Cell | None = None
        self.migration_log: list[tuple[Cell, Cell, int]] = []
        self.flu_times: list[int] = []
        self._sum_lon = 0.0
        self._sum_lat = 0.0
        self._gyr_cache: tuple[int, float] | None = None
        self.lock = threading.Lock()

    def __len__(self) -> int:
        return len(self.footprints)

    @property
    def infection_until(self) -> int | None:
        if not self.flu_times:
            return None
        return self.flu_times[-1] + INFECTION_WINDOW_S

    def append(self, lon: float, lat: float, ts: int, flu_flag: bool) -> None:
        if self.footprints and ts < self.footprints[-1][2]:
            raise OutOfOrderPost(
                f"user {self.user_id}: {ts} < last footprint {self.footprints[-1][2]}"
            )
        self.footprints.append((lon, lat, ts, flu_flag))
        self._sum_lon += lon
        self._sum_lat += lat
        if flu_flag:
            self.flu_times.append(ts)

        cell = grid.grid_index(lon, lat, 1)
        n = self.visit_counts.get(cell, 0) + 1
        self.visit_counts[cell] = n
        self._first_visit.setdefault(cell, len(self.footprints))

        # running argmax over (count, earliest first visit); only the
        # incremented cell can displace the current home
        home = self.home_cell
        if home is None:
            self.home_cell = cell
        elif cell != home:
            hc = self.visit_counts[home]
            if n > hc or (n == hc and self._first_visit[cell] < self._first_visit[home]):
                self.home_cell = cell
                self.migration_log.append((home, cell, ts))

    def is_infected(self, ts: int) -> bool:
        """True iff a flu-flagged footprint exists in [ts - 7d, ts]."""
        i = bisect_right(self.flu_times, ts)
        return i > 0 and self.flu_times[i - 1] >= ts - INFECTION_WINDOW_S

    def radius_of_gyration(self) -> float:
        """RMS great-circle distance (km) of footprints from their centroid.

        The centroid is the plain degree mean of the footprint cloud.  The
        value is cached per footprint count, so repeated reads between
        appends are O(1).
        """
        n = len(self.footprints)
        if n == 0:
            raise EmptyTrajectory(self.user_id)
        if self._gyr_cache is not None and self._gyr_cache[0] == n:
            return self._gyr_cache[1]
        clon = self._sum_lon / n
        clat = self._sum_lat / n
        lon = np.fromiter((f[0] for f in self.footprints), dtype=np.float64, count=n)
        lat = np.fromiter((f[1] for f in self.footprints), dtype=np.float64, count=n)
        d = haversine_km_arr(lon, lat, clon, clat)
        r = math.sqrt(float(np.mean(d * d)))
        self._gyr_cache = (n, r)
        return r

    def home_location(self) -> Cell:
        if self.home_cell is None:
            raise EmptyTrajectory(self.user_id)
        return self.home_cell

    def extract_moves(self) -> list[Move]:
        """One Move per consecutive footprint pair; flu_related when the
        user was infected at either endpoint."""
        out = []
        fps = self.footprints
        for a, b in zip(fps, fps[1:]):
            out.append(
                Move(
                    self.user_id, a[0], a[1], b[0], b[1], a[2], b[2],
                    self.is_infected(a[2]) or self.is_infected(b[2]),
                )
            )
        return out

    def home_timeline(self) -> list[tuple[int, Cell]]:
        """(effective_ts, home_cell) changes, earliest first."""
        if not self.footprints:
            return []
        first_ts = self.footprints[0][2]
        timeline: list[tuple[int, Cell]] = []
        if self.migration_log:
            timeline.append((first_ts, self.migration_log[0][0]))
            for _, to_cell, ts in self.migration_log:
                timeline.append((ts, to_cell))
        else:
            timeline.append((first_ts, self.home_cell))  # type: ignore[arg-type]
        return timeline

    # -- snapshot round trip -------------------------------------------------

    def to_record(self) -> dict:
        return {
            "user_id": self.user_id,
            "footprints": [[f[0], f[1], f[2], f[3]] for f in self.footprints],
            "home_cell": list(self.home_cell) if self.home_cell else None,
            "gyration_km": self.radius_of_gyration() if self.footprints else 0.0,
            "migrations": [[list(a), list(b), ts] for a, b, ts in self.migration_log],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Trajectory":
        t = cls(rec["user_id"])
        for lon, lat, ts, flu in rec["footprints"]:
            t.append(lon, lat, ts, bool(flu))
        return t


class TrajectoryStore:
    """All trajectories, partitioned by user.  Appends to distinct users are
    independent; appends to one user serialize on the trajectory lock."""

    def __init__(self):
        self._traj: dict[str, Trajectory] = {}
        self._lock = threading.Lock()
        self.accepted = 0

    def __len__(self) -> int:
        return len(self._traj)

    def __iter__(self):
        return iter(self._traj.values())

    def get(self, user_id: str) -> Trajectory | None:
        return self._traj.get(user_id)

    def append_post(self, post) -> Trajectory:
        with self._lock:
            traj = self._traj.get(post.user_id)
            if traj is None:
                traj = Trajectory(post.user_id)
                self._traj[post.user_id] = traj
        with traj.lock:
            traj.append(post.lon, post.lat, post.ts, post.flu_flag)
        self.accepted += 1
        return traj

    def total_posts(self) -> int:
        return sum(len(t) for t in self._traj.values())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for user_id in sorted(self._traj):
                fh.write(json.dumps(self._traj[user_id].to_record()) + "\n")

    @classmethod
    def load(cls, path) -> "TrajectoryStore":
        store = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    store._traj[rec["user_id"]] = Trajectory.from_record(rec)
        store.accepted = store.total_posts()
        return store


def append_post(store: TrajectoryStore, post) -> TrajectoryStore:
    """Functional wrapper over TrajectoryStore.append_post."""
    store.append_post(post)
    return store


def radius_of_gyration(traj: Trajectory) -> float:
    return traj.radius_of_gyration()


def home_location(traj: Trajectory) -> Cell:
    return traj.home_location()


def is_infected(traj: Trajectory, ts: int) -> bool:
    return traj.is_infected(ts)


def extract_moves(traj: Trajectory) -> list[Move]:
    return traj.extract_moves()
