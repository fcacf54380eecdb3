from __future__ import annotations

import json

import pytest

from zetameta.errors import ConfigurationError
from zetameta.pipeline import CAVEAT, PipelineConfig, load_config, run_pipeline


def test_default_run_passes(pipeline_run):
    m = pipeline_run.manifest
    assert m.ok, (m.checks, m.errors)
    assert m.ladder["label"] == "surrogate"
    assert "omega_trend" in m.checks


def test_outputs_written(pipeline_run):
    out = pipeline_run.out
    for name in ("manifest.json", "report.md", "report.json", "ladder.csv"):
        assert (out / name).exists()
    assert len(list((out / "bindings").glob("eq*_k2_n1.json"))) == 9
    body = json.loads((out / "manifest.json").read_text())
    assert body["caveat"] == CAVEAT and len(body["manifest_hash"]) == 64


def test_manifest_is_reproducible(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[run]\nL = 1592\nu_set = 0.1\nk_values = 1\n"
        f"[ladder]\ncache = {tmp_path / 'ladder.csv'}\n"
        "[tolerances]\ntrend = false\n"
    )
    a = run_pipeline(ini, tmp_path / "a")
    b = run_pipeline(ini, tmp_path / "b")
    assert a.ok
    assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()


def test_config_parsing(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nL = 2000\nu_set = 0.05, 0.15\nk_values = 1 2 3\n"
                   "[strips]\nsigma1 = 0.6\nsigma2 = 0.9\ndelta = 0.005\n[zeta]\nworking_precision = 20\n")
    cfg = load_config(ini)
    assert cfg.L == 2000 and cfg.u_set == (0.05, 0.15) and cfg.k_values == (1, 2, 3)
    assert cfg.zeta.working_precision == 20 and cfg.sigma1 == 0.6


def test_config_errors(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[run]\nL = lots\n")
    with pytest.raises(ConfigurationError):
        load_config(ini)
    with pytest.raises(ConfigurationError):
        PipelineConfig(u_set=())
    with pytest.raises(ConfigurationError):
        PipelineConfig(t_lo=1000.0)


def test_failed_stage_still_writes_manifest(tmp_path):
    cfg = PipelineConfig(u_set=(0.2,), k_values=(1,), sigma1=0.6, sigma2=0.9, delta=0.02, trend=False)
    m = run_pipeline(cfg, tmp_path)
    assert not m.ok and "ConfigurationError" in m.errors[0]
    assert json.loads((tmp_path / "manifest.json").read_text())["ok"] is False
