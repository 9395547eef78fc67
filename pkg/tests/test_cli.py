import json

import pytest

from bin.run import discover_domains, main

SQUARE = '{"d": 2, "phi": [["00", "11"]]}'


def test_lr_route_inline(capsys):
    assert main(["lr-route", SQUARE]) == 0
    out = capsys.readouterr().out
    assert "vertex-disjoint: OK" in out
    assert out.startswith("00 -> ")


def test_lr_route_from_file_as_json(tmp_path, capsys):
    path = tmp_path / "pair.json"
    path.write_text('{"d": 3, "phi": [["001", "101"], ["010", "011"]]}', encoding="utf-8")
    assert main(["lr-route", str(path), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["paths"]) == 2
    assert doc["check"] == "vertex-disjoint: OK"


def test_lr_route_rejects_incomparable_pairs(capsys):
    assert main(["lr-route", '{"d": 2, "phi": [["01", "10"]]}']) == 2
    assert "not a matched pair" in capsys.readouterr().err


def test_lr_route_rejects_bad_json(capsys):
    assert main(["lr-route", "{nope"]) == 2
    assert "invalid JSON" in capsys.readouterr().err


def test_lr_route2(capsys):
    assert main(["lr-route2", SQUARE, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["first"]) == len(doc["second"]) == 1
    assert doc["check"].endswith("OK")


def test_lr_route2_needs_distance_two(capsys):
    assert main(["lr-route2", '{"d": 2, "phi": [["00", "10"]]}']) == 2
    assert "distance ≥ 2 required" in capsys.readouterr().err


def test_analyze_fn(capsys):
    assert main(["analyze-fn", "1010", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["eps"] == {"num": 1, "den": 2}
    assert doc["influence"] == {"num": 1, "den": 1}


def test_analyze_fn_hex_and_random(capsys):
    assert main(["analyze-fn", "5", "--hex", "--d", "2"]) == 0
    assert "eps: 1/2" in capsys.readouterr().out
    assert main(["analyze-fn", "--random", "--d", "4", "--seed", "3", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("quantity,value")


@pytest.mark.parametrize("mode,exact", [("local-search", False), ("local", False), ("exhaustive", True)])
def test_analyze_fn_modes(mode, exact, capsys):
    assert main(["analyze-fn", "1010", "--mode", mode, "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["min_talagrand_exact"] is exact


@pytest.mark.parametrize("argv", [["analyze-fn", "101"], ["analyze-fn", "--random"], ["analyze-fn"]])
def test_analyze_fn_bad_input(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_check_theorems(capsys):
    assert main(["check-theorems", "--d", "2"]) == 0
    assert "violations: 0" in capsys.readouterr().out


def test_search_list(capsys):
    assert main(["search", "--list"]) == 0
    out = capsys.readouterr().out
    assert "glr" in out and "rout" in out
    assert set(discover_domains()) == {"glr", "rout"}


def test_search_unknown(capsys):
    assert main(["search", "nope"]) == 2


def test_search_bad_dimension(capsys):
    assert main(["search", "rout", "--d", "30"]) == 2
    assert "d must satisfy" in capsys.readouterr().err


def test_search_output_is_deterministic(capsys):
    assert main(["search", "rout", "--d", "2", "--format", "json"]) == 0
    first = capsys.readouterr().out
    assert main(["search", "rout", "--d", "2", "--format", "json"]) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["instances"] == 14


def test_search_report_and_telemetry_roundtrip(tmp_path, capsys):
    report = tmp_path / "rout.json"
    argv = ["search", "rout", "--d", "2", "--format", "json", "--out", str(report), "--telemetry", str(tmp_path)]
    assert main(argv) == 0
    assert (tmp_path / "sweep_telemetry.jsonl").exists()
    assert main(["emit-report", str(report), "--format", "text"]) == 0
    assert "conjecture: rout" in capsys.readouterr().out


def test_emit_report_missing_file(tmp_path, capsys):
    assert main(["emit-report", str(tmp_path / "none.json")]) == 2
