import pytest

from geocube.cube import (
    EmptyRegion,
    build_base,
    dyadic_spatial_blocks,
    dyadic_time_blocks,
    flow_query,
    polygon_to_base_cells,
    region_aggregate,
)
from geocube.ingest import SynthConfig, classify_stream, synth_stream
from geocube.trajectory import TrajectoryStore
from helpers import EPOCH, cell_lonlat, hours, post_at
from oracle import StreamOracle


def build_store(posts):
    store = TrajectoryStore()
    for p in posts:
        store.append_post(p)
    return store


def synth_cube(seed=41, users=25, hours_=48, travel=0.15, ili=0.1):
    posts = classify_stream(
        synth_stream(SynthConfig(n_users=users, duration_hours=hours_,
                                 travel_probability=travel, ili_probability=ili, rng_seed=seed))
    )
    cube = build_base(build_store(posts))
    return posts, cube


def test_dyadic_time_blocks():
    assert dyadic_time_blocks(0, 1, 16) == (1, [0])
    assert dyadic_time_blocks(3, 5, 16) == (1, [3, 4])
    assert dyadic_time_blocks(4, 8, 16) == (3, [1])
    assert dyadic_time_blocks(0, 168, 16) == (4, list(range(21)))
    assert dyadic_time_blocks(5, 5, 16) == (1, [])
    t_level, blocks = dyadic_time_blocks(-4, 4, 16)
    assert t_level == 3 and blocks == [-1, 0]


def test_dyadic_spatial_blocks():
    full = {(c, r) for c in (4, 5) for r in (8, 9)}
    assert dyadic_spatial_blocks(full) == [(2, 2, 4)]
    three = {(4, 8), (5, 8), (4, 9)}
    assert sorted(dyadic_spatial_blocks(three)) == [(1, 4, 8), (1, 4, 9), (1, 5, 8)]
    eight = {(c, r) for c in (4, 5) for r in (8, 9)} | {(c, r) for c in (6, 7) for r in (8, 9)}
    assert sorted(dyadic_spatial_blocks(eight)) == [(2, 2, 4), (2, 3, 4)]


def test_region_single_cuboid_verbatim():
    _posts, cube = synth_cube()
    tbl = cube.table("all", 1, 1)
    key = next(k for k, f in tbl.facts.items() if f.A > 0)
    t0, t1 = cube.time_grid.interval_bounds(key[2])
    fact, meta = region_aggregate(cube, cells={key[:2]}, level=1, t0=t0, t1=t1)
    assert fact == tbl.facts[key]
    assert meta["n_cuboids"] == 1


def test_region_two_disjoint_cells_sum():
    posts = [
        post_at("a", 7000, 4000, hours(0.2)),
        post_at("b", 7500, 4500, hours(0.4)),
    ]
    cube = build_base(build_store(posts))
    fact, _ = region_aggregate(
        cube, cells={(7000, 4000), (7500, 4500)}, level=1, t0=EPOCH, t1=EPOCH + 3600
    )
    assert fact.A == 2 and fact.V == 2 and fact.R == 2


def test_region_aggregate_requires_cells():
    _posts, cube = synth_cube()
    with pytest.raises(EmptyRegion):
        region_aggregate(cube, cells=set(), level=1, t0=EPOCH, t1=EPOCH + 3600)
    with pytest.raises(ValueError):
        region_aggregate(cube, cells={(0, 0)}, level=1, t0=EPOCH + 10, t1=EPOCH)


def test_full_domain_aggregate_conserves_activities():
    posts, cube = synth_cube()
    t0 = cube.time_grid.epoch + cube.window[0] * 3600
    t1 = cube.time_grid.epoch + cube.window[1] * 3600
    cells = {(c, r) for c in range(26) for r in range(18)}
    fact, _ = region_aggregate(cube, cells=cells, level=10, t0=t0, t1=t1)
    assert fact.A == len(posts)
    assert fact.V == len({p.user_id for p in posts})
    assert fact.O == 0 and fact.I == 0


@pytest.mark.parametrize("level", [2, 6, 9])
def test_region_aggregate_matches_oracle(level):
    posts, cube = synth_cube(seed=77)
    oracle = StreamOracle(posts, cube.time_grid.epoch)
    shift = level - 1
    occupied = sorted({(c >> shift, r >> shift) for c, r in cube.occupied_base_cells()})
    region = set(occupied[: max(1, len(occupied) // 2)])
    t0 = cube.time_grid.epoch + 5 * 3600
    t1 = cube.time_grid.epoch + 29 * 3600
    fact, _ = region_aggregate(cube, cells=region, level=level, t0=t0, t1=t1)
    base_cells = {
        (c, r)
        for c, r in cube.occupied_base_cells()
        if (c >> shift, r >> shift) in region
    }
    ref = oracle.cuboid(base_cells, set(range(5, 29)), "all", window=cube.window)
    assert fact.A == ref["A"]
    assert fact.O == ref["O"]
    assert fact.I == ref["I"]
    assert fact.R == ref["R"]
    if fact.A:
        assert fact.S_lon == pytest.approx(ref["S_lon"], rel=1e-9)


def test_polygon_region_matches_cell_region():
    posts, cube = synth_cube(seed=7)
    # box polygon over a metro: pick the busiest base cell and surround it
    tbl = cube.table("all", 1, 1)
    busiest = max(tbl.facts.items(), key=lambda kv: kv[1].A)[0]
    west, south = cell_lonlat(busiest[0] - 40, busiest[1] - 40, 0.0, 0.0)
    east, north = cell_lonlat(busiest[0] + 40, busiest[1] + 40, 1.0, 1.0)
    polygon = {
        "type": "Polygon",
        "coordinates": [[[west, south], [east, south], [east, north], [west, north], [west, south]]],
    }
    t0 = cube.time_grid.epoch
    t1 = t0 + 48 * 3600
    fact_poly, meta = region_aggregate(cube, polygon=polygon, t0=t0, t1=t1)
    cells = polygon_to_base_cells(cube, polygon)
    fact_cells, _ = region_aggregate(cube, cells=cells, level=1, t0=t0, t1=t1)
    assert fact_poly.A == fact_cells.A
    assert fact_poly.V == fact_cells.V
    assert fact_poly.O == fact_cells.O
    assert fact_poly.R == fact_cells.R
    assert meta["n_blocks"] >= 1


def test_polygon_outside_bbox_is_empty_region():
    _posts, cube = synth_cube(seed=7, users=5, hours_=12)
    polygon = {"type": "Polygon", "coordinates": [[[10, 10], [11, 10], [11, 11], [10, 11], [10, 10]]]}
    with pytest.raises(EmptyRegion):
        region_aggregate(cube, polygon=polygon, t0=EPOCH, t1=EPOCH + 3600)


def test_polygon_smaller_than_cell_is_empty_region():
    _posts, cube = synth_cube(seed=7, users=5, hours_=12)
    lon, lat = cell_lonlat(7000, 4000, 0.9, 0.9)  # corner pocket, no center
    eps = 0.0004
    polygon = {
        "type": "Polygon",
        "coordinates": [[[lon, lat], [lon + eps, lat], [lon + eps, lat + eps], [lon, lat + eps], [lon, lat]]],
    }
    with pytest.raises(EmptyRegion):
        region_aggregate(cube, polygon=polygon, t0=EPOCH, t1=EPOCH + 3600)


def test_flow_query_empty_window():
    _posts, cube = synth_cube(seed=7, users=5, hours_=12)
    rows = flow_query(cube, {(0, 0)}, 10, None, t0=EPOCH, t1=EPOCH + 3600)
    assert rows == []


def test_flow_query_single_move():
    posts = [post_at("a", 7000, 4000, hours(0.1), flu=True), post_at("a", 7009, 4000, hours(0.6))]
    cube = build_base(build_store(posts))
    rows = flow_query(cube, {(7000, 4000)}, 1, None, t0=EPOCH, t1=EPOCH + 3600)
    assert rows == [((7000, 4000), (7009, 4000), 1, 1, 0)]


def test_flow_query_scripted_od_matrix():
    script = {
        ("x", (7000, 4000), (7020, 4000)): 3,
        ("y", (7020, 4000), (7000, 4000)): 2,
        ("z", (7000, 4000), (7040, 4040)): 1,
    }
    posts = []
    t = 0
    for (user, o, d), n in script.items():
        for i in range(n):
            posts.append(post_at(f"{user}{i}", o[0], o[1], hours(0) + t))
            posts.append(post_at(f"{user}{i}", d[0], d[1], hours(1) + t))
            t += 30
    posts.sort(key=lambda p: (p.ts, p.user_id))
    cube = build_base(build_store(posts))
    rows = flow_query(
        cube, {(7000, 4000), (7020, 4000)}, 1, None, t0=EPOCH, t1=EPOCH + 7200
    )
    got = {(o, d): f for o, d, f, _ff, _fm in rows}
    assert got == {
        ((7000, 4000), (7020, 4000)): 3,
        ((7020, 4000), (7000, 4000)): 2,
        ((7000, 4000), (7040, 4040)): 1,
    }
    assert [r[2] for r in rows] == sorted((r[2] for r in rows), reverse=True)


@pytest.mark.parametrize("level", [1, 4, 8])
def test_flow_query_matches_oracle(level):
    posts, cube = synth_cube(seed=99, travel=0.25)
    oracle = StreamOracle(posts, cube.time_grid.epoch)
    first, last = 3, 40
    t0 = cube.time_grid.epoch + first * 3600
    t1 = cube.time_grid.epoch + last * 3600
    shift = level - 1
    src = {(c >> shift, r >> shift) for c, r in cube.occupied_base_cells()}
    rows = flow_query(cube, src, level, None, t0=t0, t1=t1)
    ref = oracle.cell_flows(level, first, last)
    got = {(o, d): (f, ff) for o, d, f, ff, _fm in rows if f or ff}
    ref_nonzero = {k: tuple(v) for k, v in ref.items() if v[0] or v[1]}
    assert got == ref_nonzero
