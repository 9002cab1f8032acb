import json

from click.testing import CliRunner

from geocube.service.cli import main


def test_synth_ingest_rollup_query_roundtrip(tmp_path):
    runner = CliRunner()
    stream = tmp_path / "stream.jsonl"
    snap = tmp_path / "snaps"

    res = runner.invoke(
        main,
        ["synth", "--users", "12", "--days", "2", "--seed", "3", "--rate", "10",
         "--travel", "0.2", "--out", str(stream)],
    )
    assert res.exit_code == 0, res.output
    assert stream.exists()

    res = runner.invoke(
        main, ["ingest", "--input", str(stream), "--format", "jsonl", "--snapshot", str(snap)]
    )
    assert res.exit_code == 0, res.output
    report = json.loads(res.output)
    assert report["version"] == 1
    assert report["report"]["accepted"] > 0

    res = runner.invoke(main, ["rollup", "--levels", "1..10", "--snapshot", str(snap)])
    assert res.exit_code == 0, res.output
    assert "level 10" in res.output

    res = runner.invoke(
        main,
        ["query", "flows", "--from", "L8:40:17", "--t0", "2014-01-01T00:00:00Z",
         "--t1", "2014-01-08T00:00:00Z", "--snapshot", str(snap)],
    )
    assert res.exit_code == 0, res.output


def test_ingest_missing_file_fails_cleanly(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["ingest", "--input", str(tmp_path / "nope.jsonl")])
    assert res.exit_code != 0


def test_dictionary_option(tmp_path):
    runner = CliRunner()
    stream = tmp_path / "s.jsonl"
    stream.write_text(
        '{"user_id":"a","lon":-108.9,"lat":38.8,"timestamp":"2014-01-01T00:00:00Z","text":"migraine again"}\n'
    )
    kw = tmp_path / "kw.txt"
    kw.write_text("migraine\n")
    res = runner.invoke(
        main,
        ["ingest", "--input", str(stream), "--dict", str(kw), "--snapshot", str(tmp_path / "snap")],
    )
    assert res.exit_code == 0, res.output
    facts = (tmp_path / "snap" / "v1" / "cuboid_facts.csv").read_text()
    sick_rows = [line for line in facts.splitlines() if line.startswith("L1:") and ",ili," in line]
    assert sick_rows
