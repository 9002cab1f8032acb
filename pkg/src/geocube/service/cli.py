"""geocube command line: ingest, synth, rollup, serve, query."""

from __future__ import annotations

import json
import sys

import click

from geocube import grid
from geocube.cube import build_base, flow_query
from geocube.ingest import IliDictionary, SynthConfig, serialize_post, synth_stream
from geocube.service.snapshot import (
    SnapshotStore,
    UnreadableInput,
    UnsortedInput,
    ingest_file,
)


@click.group()
def main():
    """Spatiotemporal data cube over geotagged post streams."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["jsonl", "csv"]), default="jsonl")
@click.option("--sort", is_flag=True, help="Sort records by timestamp before appending.")
@click.option("--dict", "dict_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Keyword file, one ILI stem per line.")
@click.option("--snapshot", "snapshot_dir", default="snapshots", show_default=True)
def ingest(input_path, fmt, sort, dict_path, snapshot_dir):
    """Ingest a post file and publish a new snapshot version."""
    dictionary = IliDictionary.from_file(dict_path) if dict_path else None
    try:
        report, manifest = ingest_file(snapshot_dir, input_path, fmt, dictionary, sort)
    except UnsortedInput as exc:
        raise click.ClickException(str(exc))
    except UnreadableInput as exc:
        raise click.ClickException(f"cannot read input: {exc}")
    out = {"report": report.as_dict()}
    if manifest is None:
        out["version"] = SnapshotStore(snapshot_dir).current_version()
        out["note"] = "nothing new accepted; snapshot unchanged"
    else:
        out["version"] = manifest.version
        out["post_count"] = manifest.post_count
        out["user_count"] = manifest.user_count
    click.echo(json.dumps(out, indent=2))


@main.command()
@click.option("--users", default=100, show_default=True)
@click.option("--days", default=7.0, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--rate", default=8.0, show_default=True, help="Posts per user per day.")
@click.option("--travel", default=0.05, show_default=True, help="Long-jump probability per post.")
@click.option("--ili", default=0.02, show_default=True, help="Symptom-text probability per post.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def synth(users, days, seed, rate, travel, ili, out_path):
    """Write a deterministic synthetic post stream (jsonl)."""
    cfg = SynthConfig(
        n_users=users,
        duration_hours=days * 24.0,
        posts_per_user_per_day=rate,
        travel_probability=travel,
        ili_probability=ili,
        rng_seed=seed,
    )
    posts = synth_stream(cfg)
    with open(out_path, "w", encoding="utf-8") as fh:
        for post in posts:
            fh.write(serialize_post(post) + "\n")
    click.echo(f"wrote {len(posts)} posts from {users} users to {out_path}")


@main.command()
@click.option("--levels", default="1..10", show_default=True, help="Spatial level range, e.g. 1..10.")
@click.option("--snapshot", "snapshot_dir", default="snapshots", show_default=True)
def rollup(levels, snapshot_dir):
    """Materialize the spatial pyramid for the current snapshot."""
    try:
        lo, hi = (int(x) for x in levels.split(".."))
    except ValueError:
        raise click.ClickException("levels must look like 1..10")
    store = SnapshotStore(snapshot_dir).load_trajectories()
    cube = build_base(store)
    cube.materialize(range(lo, hi + 1))
    for level in range(lo, hi + 1):
        tbl = cube.table("all", level, 1)
        click.echo(f"level {level:2d}: {len(tbl.facts):8d} cuboids, {len(tbl.moves):8d} flows")
    click.echo(json.dumps({"diagnostics": cube.diagnostics.as_dict()}))


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--snapshot", "snapshot_dir", default="snapshots", show_default=True)
@click.option("--static", "static_dir", default=None, help="Directory of built UI assets to serve at /.")
def serve(port, host, snapshot_dir, static_dir):
    """Serve the HTTP API against the current snapshot."""
    import uvicorn

    from geocube.service.app import create_app

    app = create_app(snapshot_dir, static_dir)
    try:
        uvicorn.run(app, host=host, port=port)
    except OSError as exc:
        raise click.ClickException(f"cannot bind port {port}: {exc}")


@main.group()
def query():
    """Read-only queries against the current snapshot."""


@query.command("flows")
@click.option("--from", "src", required=True, help="Source cell, e.g. L2:1024:768.")
@click.option("--to", "dst", default="all", show_default=True)
@click.option("--t0", required=True)
@click.option("--t1", required=True)
@click.option("--group", type=click.Choice(["all", "ili"]), default="all", show_default=True)
@click.option("--snapshot", "snapshot_dir", default="snapshots", show_default=True)
def query_flows(src, dst, t0, t1, group, snapshot_dir):
    """Aggregated origin-destination flows from one source cell."""
    level, col, row = grid.parse_cell_id(src)
    dst_cells = None
    if dst != "all":
        dlevel, dcol, drow = grid.parse_cell_id(dst)
        if dlevel != level:
            raise click.ClickException("--from and --to must use the same level")
        dst_cells = {(dcol, drow)}
    store = SnapshotStore(snapshot_dir).load_trajectories()
    cube = build_base(store)
    rows = flow_query(
        cube, {(col, row)}, level, dst_cells,
        t0=grid.parse_utc(t0), t1=grid.parse_utc(t1), group=group,
    )
    for origin, dest, f, ff, fm in rows:
        click.echo(
            f"{grid.cell_id(level, *origin)} -> {grid.cell_id(level, *dest)}"
            f"  F={f} F_flu={ff} F_migration={fm}"
        )
    if not rows:
        click.echo("no flows in window", err=True)


if __name__ == "__main__":
    sys.exit(main())
