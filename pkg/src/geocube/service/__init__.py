"""HTTP API, CLI and snapshot persistence."""

from geocube.service.snapshot import (
    IngestReport,
    SnapshotManifest,
    SnapshotMissing,
    SnapshotStore,
    UnreadableInput,
    UnsortedInput,
    ingest_file,
)

__all__ = [
    "IngestReport",
    "SnapshotManifest",
    "SnapshotMissing",
    "SnapshotStore",
    "UnreadableInput",
    "UnsortedInput",
    "ingest_file",
]
