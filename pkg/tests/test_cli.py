import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from worldmetric import ctm
from worldmetric.cli import dumps_report, format_float, main, scenario_to_json
from worldmetric.ranker import lottery_world, lottery_worlds
from worldmetric.worldstate import WorldState

from corpora import random_bits
from oracles import ctm_oracle

HERE = Path(__file__).parent
SMALL = HERE / "fixtures" / "small"
GOLDEN = HERE / "golden"


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "worldmetric", *map(str, args)],
                          capture_output=True, text=True, cwd=cwd)


def call(capsys, *args):
    """In-process run: (exit code, stdout, stderr)."""
    try:
        code = main([str(a) for a in args])
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def write_world(path: Path, world: WorldState) -> Path:
    path.write_text(json.dumps(scenario_to_json(world)))
    return path


def raw_world(path: Path, label: str, bits) -> Path:
    path.write_text(json.dumps({"label": label, "fields": [
        {"name": "payload", "type": "bits", "value": bits.bits}]}))
    return path


# -- distance --------------------------------------------------------------

def test_distance_identical_files(tmp_path, capsys):
    a = raw_world(tmp_path / "a.json", "a", random_bits(1024, 1))
    b = raw_world(tmp_path / "b.json", "b", random_bits(1024, 1))
    code, out, _ = call(capsys, "distance", a, b)
    report = json.loads(out)
    assert code == 0 and report["distance"] <= 0.05
    assert list(report) == ["estimator", "x", "y", "distance", "k_x", "k_y", "k_x_given_y", "k_y_given_x"]
    code2, out2, _ = call(capsys, "distance", a, a)
    assert code2 == 0 and json.loads(out2)["distance"] == report["distance"]


def test_distance_independent_random(tmp_path, capsys):
    a = raw_world(tmp_path / "a.json", "a", random_bits(1024, 1))
    b = raw_world(tmp_path / "b.json", "b", random_bits(1024, 2))
    code, out, _ = call(capsys, "distance", a, b)
    assert code == 0 and json.loads(out)["distance"] >= 0.9


def test_distance_csv(tmp_path, capsys):
    a = raw_world(tmp_path / "a.json", "a", random_bits(600, 1))
    code, out, _ = call(capsys, "distance", a, a, "--format", "csv", "--estimator", "lz78")
    header, row = out.strip().splitlines()
    assert code == 0 and header.startswith("estimator,x,y,distance") and row.startswith("LZ78/v1,a,a,")


@pytest.mark.parametrize("content,where", [
    ('{"label": "x", "fields": [{"name": "n", "type": "uint", "width": 8, "value": 300}]}', "fields[0]"),
    ('{"label": "x", "fields": [{"name": "n", "type": "uint", "width": 8}]}', "missing 'value'"),
    ('{"label": "x", "fields": [{"name": "n", "type": "float", "value": 1}]}', "unknown type"),
    ('{"label": "x", "fields": [{"name": "e", "type": "enum", "cardinality": 3, "value": 3}]}', "fields[0]"),
    ('{"fields": []}', "label"),
    ('{"label": "x",\n "fields": [,]}', ":2:"),
])
def test_malformed_scenario_exits_2_with_location(tmp_path, capsys, content, where):
    bad = tmp_path / "bad.json"
    bad.write_text(content)
    good = raw_world(tmp_path / "good.json", "g", random_bits(16, 1))
    code, _, err = call(capsys, "distance", good, bad)
    assert code == 2
    assert "bad.json" in err and where in err


def test_missing_file_exits_2(tmp_path, capsys):
    code, _, err = call(capsys, "distance", tmp_path / "nope.json", tmp_path / "nope.json")
    assert code == 2 and "nope.json" in err


def test_unknown_estimator_exits_3(tmp_path, capsys):
    a = raw_world(tmp_path / "a.json", "a", random_bits(64, 1))
    code, _, err = call(capsys, "distance", a, a, "--estimator", "GZIP")
    assert code == 3 and "GZIP" in err


def test_unknown_flag_exits_2(capsys):
    code, _, _ = call(capsys, "distance", "a", "b", "--frobnicate")
    assert code == 2


@pytest.mark.parametrize("flag,value", [("--tau-env", "1.5"), ("--tie-eps", "x"), ("--ctm-states", "0")])
def test_out_of_range_flags_exit_2(tmp_path, capsys, flag, value):
    a = raw_world(tmp_path / "a.json", "a", random_bits(64, 1))
    code, _, _ = call(capsys, "rank", a, a, flag, value)
    assert code == 2


# -- rank ------------------------------------------------------------------

def test_rank_matches_golden(capsys):
    code, out, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates")
    assert code == 0
    assert out == (GOLDEN / "rank_small.json").read_text()


def test_rank_csv_matches_golden(capsys):
    code, out, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates", "--format", "csv")
    assert code == 0 and out == (GOLDEN / "rank_small.csv").read_text()


def test_rank_is_byte_identical_across_processes(tmp_path):
    outs = []
    for i in range(2):
        target = tmp_path / f"r{i}.json"
        proc = run_cli("rank", SMALL / "actual.json", SMALL / "candidates", "--out", target)
        assert proc.returncode == 0, proc.stderr
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_rank_actual_first(capsys):
    code, out, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates", SMALL / "actual.json")
    report = json.loads(out)
    assert code == 0 and report["entries"][0]["label"] == "actual"
    assert report["entries"][0]["distance"] <= 0.05


def test_rank_single_candidate(capsys):
    code, out, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates" / "storm.json")
    assert code == 0 and json.loads(out)["entries"][0]["probability"] == 1


def test_rank_all_incompatible_exits_4(tmp_path, capsys):
    from worldmetric.worldstate import BitString
    actual = raw_world(tmp_path / "a.json", "a", BitString("0" * 64))
    wizard = raw_world(tmp_path / "w.json", "w", random_bits(64, 3))
    code, out, err = call(capsys, "rank", actual, wizard)
    report = json.loads(out)
    assert code == 4 and "incompatible" in err
    assert report["entries"][0]["compatible"] is False and report["plurality_classes"] == []


def test_rank_duplicate_labels_exit_2(capsys):
    storm = SMALL / "candidates" / "storm.json"
    code, _, err = call(capsys, "rank", SMALL / "actual.json", storm, storm)
    assert code == 2 and "storm" in err


def test_rank_lottery_fixture_directory(tmp_path, capsys):
    ticket, drawn = (71, 43, 66, 87, 99), (71, 43, 66, 87, 100)
    worlds = tmp_path / "worlds"
    worlds.mkdir()
    for w in lottery_worlds(ticket, drawn):
        write_world(worlds / f"{w.label}.json", w)
    actual = write_world(tmp_path / "actual.json", lottery_world(ticket, drawn))
    code, out, _ = call(capsys, "rank", actual, worlds)
    report = json.loads(out)
    assert code == 0 and len(report["entries"]) == 252
    assert all(abs(e["probability"] - 1 / 252) <= 0.001 for e in report["entries"])


def test_config_precedence(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"tie_eps": 0.001, "estimator": "RLE"}))
    args = ["rank", SMALL / "actual.json", SMALL / "candidates", "--config", config]
    _, out, _ = call(capsys, *args)
    params = json.loads(out)["parameters"]
    assert params["tie_eps"] == 0.001 and params["estimator"] == "RLE/v1"
    _, out, _ = call(capsys, *args, "--tie-eps", "0.2")
    params = json.loads(out)["parameters"]
    assert params["tie_eps"] == 0.2 and params["estimator"] == "RLE/v1"


def test_config_errors(tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"colour": "blue"}))
    code, _, err = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates", "--config", config)
    assert code == 2 and "colour" in err
    config.write_text(json.dumps({"tau_env": 3}))
    code, _, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates", "--config", config)
    assert code == 2
    config.write_text(json.dumps({"estimator": "ZIP"}))
    code, _, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates", "--config", config)
    assert code == 3


# -- ctm -------------------------------------------------------------------

def test_ctm_n1_cache_matches_oracle(tmp_path, capsys):
    code, out, _ = call(capsys, "ctm", "--ctm-states", 1, "--cache-dir", tmp_path)
    report = json.loads(out)
    assert code == 0 and report["status"] == "written"
    weights, smallest, halting, total = ctm_oracle(1, 1000)
    first = {o: next(i for i in range(total) if ctm.MachineSpec.from_index(1, i).encoding() == c)
             for o, c in smallest.items()}
    oracle_bytes = ctm.dumps(ctm.CtmDistribution(1, 1000, weights, first, total, halting))
    assert Path(report["path"]).read_bytes() == oracle_bytes


def test_ctm_rerun_verifies_without_recompute(tmp_path, capsys):
    call(capsys, "ctm", "--ctm-states", 1, "--cache-dir", tmp_path)
    path = ctm.cache_path(tmp_path, 1, 1000)
    stamp = path.stat().st_mtime_ns
    os.utime(path, ns=(stamp - 10 ** 9, stamp - 10 ** 9))
    stamp = path.stat().st_mtime_ns
    code, out, _ = call(capsys, "ctm", "--ctm-states", 1, "--cache-dir", tmp_path)
    assert code == 0 and json.loads(out)["status"] == "verified"
    assert path.stat().st_mtime_ns == stamp


def test_ctm_truncated_cache_exits_6(tmp_path, capsys):
    call(capsys, "ctm", "--ctm-states", 1, "--cache-dir", tmp_path)
    path = ctm.cache_path(tmp_path, 1, 1000)
    path.write_bytes(path.read_bytes()[:-7])
    code, _, err = call(capsys, "ctm", "--ctm-states", 1, "--cache-dir", tmp_path)
    assert code == 6 and "--rebuild" in err
    code, _, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates",
                      "--ctm-states", 1, "--cache-dir", tmp_path)
    assert code == 6
    code, out, _ = call(capsys, "ctm", "--ctm-states", 1, "--cache-dir", tmp_path, "--rebuild")
    assert code == 0 and json.loads(out)["status"] == "written"


def test_ctm_cap_exits_5(tmp_path, capsys):
    code, _, err = call(capsys, "ctm", "--ctm-states", 2, "--cap", 100, "--cache-dir", tmp_path)
    assert code == 5 and "cap" in err
    code, _, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates", "--ctm-states", 4)
    assert code == 5


def test_rank_uses_cache(tmp_path, capsys):
    call(capsys, "ctm", "--ctm-states", 2, "--cache-dir", tmp_path)
    code, out, _ = call(capsys, "rank", SMALL / "actual.json", SMALL / "candidates", "--cache-dir", tmp_path)
    assert code == 0 and out == (GOLDEN / "rank_small.json").read_text()


# -- demo-lottery ----------------------------------------------------------

@pytest.fixture(scope="module")
def lottery_report():
    proc = run_cli("demo-lottery")
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout)


def test_demo_five_number_table(lottery_report):
    assert [r["value"] for r in lottery_report["numbers"]] == [71, 43, 66, 87, 100]
    assert lottery_report["numbers"][0]["bits"] == "01000111"
    assert all(abs(r["probability"] - 0.2) <= 0.02 for r in lottery_report["numbers"])


def test_demo_world_table(lottery_report):
    entries = lottery_report["worlds"]["entries"]
    assert len(entries) == 252
    assert all(abs(e["probability"] - 1 / 252) <= 0.001 for e in entries)
    assert len(lottery_report["worlds"]["plurality_classes"]) == 1
    assert lottery_report["winning_worlds"] == ["draw-071-043-066-087-099"]


def test_demo_drawn_equals_ticket(capsys):
    code, out, _ = call(capsys, "demo-lottery", "--ticket", "71,43,66,87,99", "--drawn", "71 43 66 87 99")
    report = json.loads(out)
    assert code == 0 and report["actual_is_winning"]
    assert "actual world is the winning world" in report["notes"]


@pytest.mark.parametrize("args", [("--drawn", "1,2,3,4,256"), ("--ticket", "1,2,3"), ("--drawn", "a,b,c,d,e")])
def test_demo_bad_numbers_exit_2(capsys, args):
    code, _, err = call(capsys, "demo-lottery", *args)
    assert code == 2 and err


# -- serialisation ---------------------------------------------------------

def test_float_formatting():
    assert format_float(0.1 + 0.2) == "0.3"
    assert format_float(1.0) == "1"
    assert format_float(1e-12) == "1e-12"
    assert format_float(-0.0) == "0"
    with pytest.raises(ValueError):
        format_float(float("nan"))


def test_dumps_report_is_valid_ordered_json():
    obj = {"b": 1, "a": [0.5, None, True, "x"], "c": {}, "d": []}
    text = dumps_report(obj)
    assert json.loads(text) == obj
    assert text.index('"b"') < text.index('"a"')


def test_subprocess_exit_codes(tmp_path):
    a = raw_world(tmp_path / "a.json", "a", random_bits(64, 1))
    assert run_cli("distance", a, a).returncode == 0
    assert run_cli("distance", a, a, "--estimator", "NOPE").returncode == 3
    assert run_cli("bogus-command").returncode == 2
