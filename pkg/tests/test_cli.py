from __future__ import annotations

import json

import pytest

from zetameta.cli import main

from conftest import GOLDEN


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_zeta_command(capsys):
    assert main(["zeta", "--sigma", "0.75", "--t", "14"]) == 0
    out = _json(capsys)
    assert out["zeta"][0] == pytest.approx(0.19257624640818594, rel=1e-12)


def test_trig_command(capsys):
    assert main(["trig", "--l", "6", "--U", "0.2"]) == 0
    out = _json(capsys)
    assert out["coefficients"] == ["5/16", "15/32", "3/16", "1/32"]
    assert out["relative_difference"] < 1e-12


def test_ladder_round_trip(tmp_path, capsys):
    path = tmp_path / "l.csv"
    assert main(["ladder", "build", "--t-lo", "1000", "--t-hi", "1050", "--out", str(path)]) == 0
    assert _json(capsys)["label"] == "surrogate"
    assert main(["ladder", "eval", "--table", str(path), "1020.5"]) == 0
    y = _json(capsys)["phi"]
    assert main(["ladder", "inverse", "--table", str(path), str(y)]) == 0
    assert _json(capsys)["t"] == pytest.approx(1020.5, abs=1e-9)


def test_strips(capsys, caplog):
    assert main(["strips", "build"]) == 0
    out = _json(capsys)
    assert out["disjoint"] and len(out["strips"]) == 12
    assert main(["strips", "build", "--delta", "0.02"]) == 2
    assert "need delta <" in caplog.text


def test_graft_command(capsys):
    assert main(["graft", "--strip", "6", "--target", "0.5", "--t-window", "10", "500", "--count", "3"]) == 0
    assert len(_json(capsys)["grafts"]) == 3
    assert main(["graft", "--strip", "1", "--target", "0"]) == 2
    assert main(["graft", "--strip", "12", "--target", "1e-6", "--t-window", "10", "40", "--t-cap", "40"]) == 1


def test_usets(tmp_path, capsys):
    good, bad = tmp_path / "good.json", tmp_path / "bad.txt"
    good.write_text("[0.10, 0.20, 0.25]")
    bad.write_text("0.26 0.10")
    assert main(["usets", "validate", str(good)]) == 0
    capsys.readouterr()
    assert main(["usets", "validate", str(bad)]) == 1
    assert set(_json(capsys)["violations"]) == {"not_increasing", "gap"}


def test_crossbreed_golden(capsys):
    args = ["crossbreed", "derive", "--script", str(GOLDEN / "secondary_k2.dsl")]
    assert main(args + ["--golden", str(GOLDEN / "secondary_k2.txt")]) == 0
    assert capsys.readouterr().out == (GOLDEN / "secondary_k2.txt").read_text()


def test_crossbreed_golden_mismatch(tmp_path, capsys):
    wrong = tmp_path / "wrong.txt"
    wrong.write_text("0 = 0\n")
    assert main(["crossbreed", "derive", "--script", str(GOLDEN / "secondary_k2.dsl"), "--golden", str(wrong)]) == 1


def test_meta_verify_from_bindings(pipeline_run, capsys):
    path = pipeline_run.out / "bindings" / "eq6_k2_n1.json"
    assert main(["meta", "verify", "--eq", "6", "--bindings", str(path), "--table",
                 str(pipeline_run.out / "ladder.csv")]) == 0
    assert _json(capsys)["ok"]
    assert main(["meta", "verify", "--eq", "6", "--form", "asymptotic", "--bindings", str(path)]) == 0
    capsys.readouterr()
    assert main(["meta", "verify", "--eq", "5", "--bindings", str(path)]) == 2


@pytest.mark.parametrize("u_line", ["u_set = 0.1, 0.3", "u_set ="])
def test_run_rejects_bad_u_set(tmp_path, u_line):
    cfg = tmp_path / "run.ini"
    cfg.write_text(f"[run]\nL = 1592\n{u_line}\n")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 2
    assert not (tmp_path / "out").exists()


def test_missing_config_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 2
