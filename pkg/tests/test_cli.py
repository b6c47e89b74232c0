import json
from pathlib import Path

import pytest

from hrgsyn.cli import main

DATA = Path(__file__).resolve().parent.parent / "data"
FIXTURE = str(DATA / "two_floor.yaml")


def _run(tmp_path, *extra, name="trace.ndjson"):
    out = tmp_path / name
    assert main(["run", "--scenario", FIXTURE, "--profile", "static", "--out", str(out), *extra]) == 0
    return out


def test_run_writes_ndjson(tmp_path, capsys):
    out = _run(tmp_path)
    assert "DoneAll(38)" in capsys.readouterr().out
    recs = [json.loads(l) for l in out.read_text().splitlines()]
    assert recs[0]["type"] == "header" and recs[0]["seed"] == 0
    assert recs[-1]["type"] == "outcome" and recs[-1]["outcome"] == "DoneAll"
    assert {r["type"] for r in recs[1:-1]} == {"step"}


def test_replay_is_byte_identical(tmp_path):
    a = _run(tmp_path, "--seed", "5", name="a.ndjson")
    b = _run(tmp_path, "--seed", "5", name="b.ndjson")
    assert a.read_bytes() == b.read_bytes()


def test_check_exit_codes(tmp_path, capsys):
    out = _run(tmp_path)
    assert main(["check", "--scenario", FIXTURE, "--trace", str(out)]) == 0
    lines = out.read_text().splitlines()
    outcome = json.loads(lines[-1])
    outcome["trace"] = outcome["trace"][:10]
    short = tmp_path / "short.ndjson"
    short.write_text(json.dumps(outcome) + "\n")
    assert main(["check", "--scenario", FIXTURE, "--trace", str(short)]) == 1
    full = json.loads(lines[-1])["trace"]
    k = next(i for i, (_, y) in enumerate(full) if y == "q6_12.5")
    outcome["trace"] = full[:k + 1] + [[full[k][0], "q5_12.5"]]
    back = tmp_path / "back.ndjson"
    back.write_text(json.dumps(outcome) + "\n")
    assert main(["check", "--scenario", FIXTURE, "--trace", str(back), "--verbose"]) == 2
    assert '"verdict":"Violated"' in capsys.readouterr().out


def test_validate_fixture(capsys):
    assert main(["validate", "--scenario", FIXTURE, "--samples", "10"]) == 0
    assert capsys.readouterr().out.strip().endswith("valid")


def test_validate_lists_locality_triple(tmp_path, capsys):
    bad = tmp_path / "coupled.yaml"
    bad.write_text((DATA / "two_floor.yaml").read_text()
                   + "couplings:\n  - {from: [f5, 3, 3], to: [f5, 4, 3], blocked_by: [f5, 6, 3]}\n")
    assert main(["validate", "--scenario", str(bad), "--samples", "5"]) != 0
    out = capsys.readouterr().out
    assert "locality layer 0: 2 violations" in out
    assert "context=r5_11" in out and "y=q5_33 y'=q5_43" in out
    assert out.strip().endswith("INVALID")


def test_build_agg(tmp_path):
    out = tmp_path / "agg.json"
    assert main(["build-agg", "--scenario", FIXTURE, "--layer", "1", "--out", str(out)]) == 0
    docs = json.loads(out.read_text())
    assert docs[0]["layer"] == 1 and docs[0]["provenance"] == "computed"
    assert repr("r5_21") in {s for row in docs[0]["sys_trans"] for s in row[2]}


def test_render(tmp_path, capsys):
    trace = _run(tmp_path)
    pattern = str(tmp_path / "layer{layer}.svg")
    assert main(["render", "--scenario", FIXTURE, "--trace", str(trace), "--out", pattern]) == 0
    for l in range(3):
        assert (tmp_path / f"layer{l}.svg").read_text().startswith("<svg")


def test_bench(tmp_path, capsys):
    out = tmp_path / "bench.tsv"
    assert main(["bench", "--scenario", FIXTURE, "--profile", "static", "--out", str(out)]) == 0
    rows = [l.split("\t") for l in out.read_text().splitlines()]
    assert rows[0] == ["approach", "outcome", "steps", "solver_calls", "states_explored", "seconds"]
    assert [r[0] for r in rows[1:]] == ["hierarchical", "flat"]
    assert rows[1][1] == "DoneAll" and rows[2][1] == "realizable"
    # frozen: the flat solve explores more positions than all local solves together
    assert int(rows[2][4]) > int(rows[1][4])


def test_errors_exit_nonzero(tmp_path, capsys):
    assert main(["run", "--scenario", str(tmp_path / "missing.yaml")]) == 4
    bad = tmp_path / "bad.yaml"
    bad.write_text("floors: []\n")
    assert main(["validate", "--scenario", str(bad)]) == 4
    assert main(["check", "--scenario", FIXTURE, "--trace", str(bad)]) == 4
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["frobnicate"])
