import json

import pytest
from fastapi.testclient import TestClient

from geocube import grid
from geocube.ingest import SynthConfig, serialize_post, synth_stream
from geocube.service.app import create_app
from geocube.service.snapshot import SnapshotStore, UnsortedInput, ingest_file
from helpers import EPOCH, hours, post_at


def write_stream(path, posts):
    with open(path, "w", encoding="utf-8") as fh:
        for p in posts:
            fh.write(serialize_post(p) + "\n")


@pytest.fixture(scope="module")
def snapshot_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("snaps")
    stream = root / "stream.jsonl"
    posts = synth_stream(
        SynthConfig(n_users=40, duration_hours=72, posts_per_user_per_day=10,
                    travel_probability=0.12, ili_probability=0.12, rng_seed=19)
    )
    write_stream(stream, posts)
    report, manifest = ingest_file(root / "store", stream)
    assert manifest is not None
    return root / "store", report, manifest


@pytest.fixture(scope="module")
def client(snapshot_dir):
    root, _report, _manifest = snapshot_dir
    return TestClient(create_app(root))


def test_ingest_empty_file(tmp_path):
    f = tmp_path / "empty.jsonl"
    f.write_text("")
    report, manifest = ingest_file(tmp_path / "snap", f)
    assert (report.accepted, report.malformed, report.out_of_bounds) == (0, 0, 0)
    assert manifest is None
    assert SnapshotStore(tmp_path / "snap").current_version() is None


def test_ingest_counts_malformed_and_oob(tmp_path):
    f = tmp_path / "mixed.jsonl"
    lines = [
        serialize_post(post_at("a", 7000, 4000, hours(0))),
        "not json at all",
        serialize_post(post_at("a", 7000, 4000, hours(1))),
        json.dumps({"user_id": "b", "lon": -10.0, "lat": 40.0,
                    "timestamp": "2014-01-01T02:00:00Z", "text": "x"}),
        serialize_post(post_at("b", 7000, 4001, hours(2))),
    ]
    f.write_text("\n".join(lines) + "\n")
    report, manifest = ingest_file(tmp_path / "snap", f)
    assert report.accepted == 3
    assert report.malformed == 1
    assert report.out_of_bounds == 1
    assert manifest.post_count == 3
    assert manifest.user_count == 2


def test_reingest_is_idempotent(tmp_path):
    f = tmp_path / "posts.jsonl"
    write_stream(f, [post_at("a", 7000, 4000, hours(i)) for i in range(4)])
    report1, manifest1 = ingest_file(tmp_path / "snap", f)
    assert report1.accepted == 4
    report2, manifest2 = ingest_file(tmp_path / "snap", f)
    assert report2.accepted == 0
    assert report2.duplicates == 4
    assert manifest2 is None
    assert SnapshotStore(tmp_path / "snap").current_version() == manifest1.version


def test_unsorted_input_needs_flag(tmp_path):
    f = tmp_path / "unsorted.jsonl"
    write_stream(f, [post_at("a", 7000, 4000, hours(5)), post_at("a", 7001, 4000, hours(1))])
    with pytest.raises(UnsortedInput):
        ingest_file(tmp_path / "snap", f)
    report, manifest = ingest_file(tmp_path / "snap", f, sort=True)
    assert report.accepted == 2
    assert manifest.post_count == 2


def test_csv_ingest(tmp_path):
    f = tmp_path / "posts.csv"
    f.write_text(
        "user_id,lon,lat,timestamp,text\n"
        "a,-108.9,38.8,2014-01-01T00:10:00Z,hello\n"
        "a,-108.9,38.8,2014-01-01T01:10:00Z,coughing fit\n"
    )
    report, manifest = ingest_file(tmp_path / "snap", f, fmt="csv")
    assert report.accepted == 2
    snap = SnapshotStore(tmp_path / "snap")
    store = snap.load_trajectories()
    assert store.get("a").flu_times  # classifier ran during ingest


def test_healthz(client, snapshot_dir):
    _root, report, manifest = snapshot_dir
    res = client.get("/healthz")
    assert res.status_code == 200
    body = res.json()
    assert body["status"] == "ok"
    assert body["version"] == manifest.version
    assert body["post_count"] == report.accepted


def test_cube_cells_sum_matches_region(client):
    t0, t1 = "2014-01-01T00:00:00Z", "2014-01-04T00:00:00Z"
    res = client.get("/cube/cells", params={"level": 9, "t0": t0, "t1": t1, "group": "all"})
    assert res.status_code == 200
    cells = res.json()["cells"]
    assert cells
    total_a = sum(c["A"] for c in cells)
    poly = {
        "type": "Polygon",
        "coordinates": [[[-167.27, 5.5], [-56.35, 5.5], [-56.35, 82.29], [-167.27, 82.29], [-167.27, 5.5]]],
    }
    res2 = client.post("/cube/region", json={"polygon": poly, "t0": t0, "t1": t1})
    assert res2.status_code == 200
    assert res2.json()["fact"]["A"] == total_a


def test_api_facts_respect_constraints(client):
    res = client.get(
        "/cube/cells",
        params={"level": 6, "t0": "2014-01-01T00:00:00Z", "t1": "2014-01-04T00:00:00Z"},
    )
    for cell in res.json()["cells"]:
        assert cell["O"] <= cell["V"] <= cell["A"]
        assert cell["I"] <= cell["V"]
        assert cell["V_flu"] <= cell["V"]


def test_flows_endpoint_and_single_source_conservation(client):
    t0, t1 = "2014-01-01T00:00:00Z", "2014-01-04T00:00:00Z"
    res = client.get(
        "/cube/cells", params={"level": 5, "t0": t0, "t1": t1, "group": "all"}
    )
    cells = sorted(res.json()["cells"], key=lambda c: -c["A"])
    source = cells[0]["cell"]
    flows = client.get(
        "/flows", params={"src": source, "level": 5, "t0": t0, "t1": t1}
    ).json()["flows"]
    tree = client.get(
        "/flows/single-source", params={"cell": source, "t0": t0, "t1": t1}
    ).json()
    assert tree["total_flow"] == sum(f["F"] for f in flows)
    if flows:
        root_flow = sum(
            feat["properties"]["flow"]
            for feat in tree["tree"]["features"]
            if feat["properties"]["origin"] == source
        )
        assert root_flow == pytest.approx(tree["total_flow"])


def test_flows_multi_labels(client):
    res = client.get(
        "/flows/multi",
        params={
            "level": 5, "t0": "2014-01-01T00:00:00Z", "t1": "2014-01-04T00:00:00Z",
            "global_fraction": 0.5, "local_k": 2,
        },
    )
    assert res.status_code == 200
    features = res.json()["layout"]["features"]
    for feat in features:
        assert feat["properties"]["label"].startswith("Flow#: (")
        assert len(feat["geometry"]["coordinates"]) >= 2


def test_risk_endpoint(client):
    res = client.get(
        "/risk",
        params={"level": 7, "t0": "2014-01-01T00:00:00Z", "t1": "2014-01-04T00:00:00Z",
                "bandwidth_km": 60.0},
    )
    assert res.status_code == 200
    body = res.json()
    assert body["n_points"] >= 0
    if body["n_points"]:
        assert body["cells"]
        assert all(d > 0 for _c, _r, d in body["cells"])


def test_error_shapes(client):
    res = client.get("/cube/cells", params={"level": 99, "t0": "2014-01-01T00:00:00Z", "t1": "2014-01-02T00:00:00Z"})
    assert res.status_code == 400
    assert set(res.json()) == {"code", "message"}
    res = client.get("/flows", params={"src": "L5:9999:9999", "level": 5, "t0": "2014-01-01T00:00:00Z", "t1": "2014-01-02T00:00:00Z"})
    assert res.status_code == 404
    assert res.json()["code"] == "unknown_cell"
    res = client.get("/flows", params={"src": "junk", "level": 5, "t0": "2014-01-01T00:00:00Z", "t1": "2014-01-02T00:00:00Z"})
    assert res.status_code == 400
    res = client.get("/cube/cells", params={"level": 5, "t0": "noon", "t1": "2014-01-02T00:00:00Z"})
    assert res.status_code == 400


def test_hot_reload_on_new_version(tmp_path):
    f1 = tmp_path / "a.jsonl"
    write_stream(f1, [post_at("a", 7000, 4000, hours(0))])
    ingest_file(tmp_path / "snap", f1)
    app_client = TestClient(create_app(tmp_path / "snap"))
    assert app_client.get("/healthz").json()["version"] == 1
    f2 = tmp_path / "b.jsonl"
    write_stream(f2, [post_at("b", 7005, 4000, hours(1))])
    ingest_file(tmp_path / "snap", f2)
    body = app_client.get("/healthz").json()
    assert body["version"] == 2
    assert body["post_count"] == 2
