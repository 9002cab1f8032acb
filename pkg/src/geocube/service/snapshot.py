"""Versioned snapshot store with atomic publish.

A snapshot directory holds immutable versions (v1, v2, ...) and a CURRENT
pointer file.  Each version contains the manifest, the trajectory store and
the exported cube fact tables.  Writers stage into a temp directory and
rename, so readers always see a complete version.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from geocube import grid
from geocube.cube import Cube, build_base
from geocube.cube.io import export_csv
from geocube.ingest import (
    IliDictionary,
    MalformedRecord,
    OutOfBounds,
    Post,
    iter_records,
    parse_record,
)
from geocube.trajectory import TrajectoryStore


class UnreadableInput(ValueError):
    pass


class UnsortedInput(ValueError):
    """Input records are not in timestamp order; re-run with sort enabled."""


class SnapshotMissing(RuntimeError):
    pass


@dataclass
class IngestReport:
    accepted: int = 0
    malformed: int = 0
    out_of_bounds: int = 0
    duplicates: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class SnapshotManifest:
    version: int
    created_at: str
    post_count: int
    user_count: int
    files: dict = field(default_factory=dict)
    last_ingest: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


class SnapshotStore:
    TRAJ_FILE = "trajectories.jsonl"

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def current_version(self) -> int | None:
        pointer = self.root / "CURRENT"
        if not pointer.exists():
            return None
        text = pointer.read_text().strip()
        return int(text.lstrip("v")) if text else None

    def manifest(self, version: int | None = None) -> SnapshotManifest:
        version = version if version is not None else self.current_version()
        if version is None:
            raise SnapshotMissing(f"no snapshot published under {self.root}")
        path = self.root / f"v{version}" / "manifest.json"
        if not path.exists():
            raise SnapshotMissing(f"missing manifest for v{version}")
        data = json.loads(path.read_text())
        return SnapshotManifest(**data)

    def load_trajectories(self, version: int | None = None) -> TrajectoryStore:
        version = version if version is not None else self.current_version()
        if version is None:
            return TrajectoryStore()
        return TrajectoryStore.load(self.root / f"v{version}" / self.TRAJ_FILE)

    def publish(self, store: TrajectoryStore, cube: Cube, report: IngestReport) -> SnapshotManifest:
        version = (self.current_version() or 0) + 1
        stage = self.root / f".v{version}.tmp"
        final = self.root / f"v{version}"
        stage.mkdir(parents=True, exist_ok=False)
        try:
            store.save(stage / self.TRAJ_FILE)
            files = export_csv(cube, stage)
            files["trajectories"] = self.TRAJ_FILE
            manifest = SnapshotManifest(
                version=version,
                created_at=grid.format_utc(int(time.time())),
                post_count=store.total_posts(),
                user_count=len(store),
                files=files,
                last_ingest=report.as_dict(),
            )
            (stage / "manifest.json").write_text(json.dumps(manifest.as_dict(), indent=2))
            os.rename(stage, final)
        except BaseException:
            for p in sorted(stage.rglob("*"), reverse=True):
                p.unlink()
            if stage.exists():
                stage.rmdir()
            raise
        pointer_tmp = self.root / ".CURRENT.tmp"
        pointer_tmp.write_text(f"v{version}\n")
        os.replace(pointer_tmp, self.root / "CURRENT")
        return manifest


def ingest_file(
    snapshot_root,
    path,
    fmt: str = "jsonl",
    dictionary: IliDictionary | None = None,
    sort: bool = False,
    time_grid: grid.TimeGrid | None = None,
) -> tuple[IngestReport, SnapshotManifest | None]:
    """Parse, classify and append a post file, then publish a new snapshot.

    Posts must arrive in timestamp order unless sort=True.  Records are
    deduplicated on (user_id, timestamp); when nothing new is accepted the
    current snapshot version is left untouched.
    """
    snap = SnapshotStore(snapshot_root)
    store = snap.load_trajectories()
    dictionary = dictionary or IliDictionary()
    report = IngestReport()

    seen = {
        (traj.user_id, f[2]) for traj in store for f in traj.footprints
    }
    posts: list[Post] = []
    last_ts = None
    unsorted = False
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UnreadableInput(str(exc)) from None
    with fh:
        try:
            records = iter_records(fh, fmt)
            for rec in records:
                try:
                    post = parse_record(rec, fmt)
                except MalformedRecord:
                    report.malformed += 1
                    continue
                except OutOfBounds:
                    report.out_of_bounds += 1
                    continue
                if last_ts is not None and post.ts < last_ts:
                    unsorted = True
                last_ts = post.ts
                posts.append(post)
        except (OSError, UnicodeDecodeError, csv.Error) as exc:
            raise UnreadableInput(str(exc)) from None

    if unsorted:
        if not sort:
            raise UnsortedInput("records are not sorted by timestamp; pass --sort")
        posts.sort(key=lambda p: (p.ts, p.user_id))

    for post in posts:
        key = (post.user_id, post.ts)
        if key in seen:
            report.duplicates += 1
            continue
        seen.add(key)
        store.append_post(post.classified(dictionary))
        report.accepted += 1

    if report.accepted == 0:
        return report, None
    cube = build_base(store, time_grid)
    manifest = snap.publish(store, cube, report)
    return report, manifest
