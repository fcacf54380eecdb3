from __future__ import annotations

import math
from pathlib import Path
from types import SimpleNamespace

import pytest

from zetameta.grafting import build_strips
from zetameta.ladder import build_ladder, plan_ladder_range
from zetameta.pipeline import PipelineConfig, compute_certificates, compute_grafts, run_pipeline

GOLDEN = Path(__file__).parent / "golden"
L_BASE = 1592  # pi L ~ 5001.4
U_SET = (0.1, 0.2)
K_VALUES = (1, 2)


@pytest.fixture(scope="session")
def table():
    """Surrogate ladder over [2000, 12000]."""
    return build_ladder(2000.0, 12000.0)


@pytest.fixture(scope="session")
def table_4l():
    t_lo, t_hi = plan_ladder_range(math.pi * 4 * L_BASE, max(U_SET), max(K_VALUES))
    return build_ladder(t_lo, t_hi)


@pytest.fixture(scope="session")
def bundle(table):
    """Certificates and grafts for every (l, k, n) at pi L ~ 5000."""
    cfg = PipelineConfig(L=L_BASE, u_set=U_SET, k_values=K_VALUES, t_lo=2000.0, t_hi=12000.0, trend=False)
    certs, cert_summaries, cert_ok, beta_shared = compute_certificates(cfg, table)
    strips = build_strips(cfg.sigma1, cfg.sigma2, cfg.delta)
    grafts, graft_summaries = compute_grafts(cfg, certs, strips)
    return SimpleNamespace(cfg=cfg, certs=certs, grafts=grafts, strips=strips, cert_ok=cert_ok,
                           beta_shared=beta_shared, graft_summaries=graft_summaries)


@pytest.fixture(scope="session")
def pipeline_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = PipelineConfig(L=L_BASE, u_set=(0.2,), k_values=(2,), trend=True)
    return SimpleNamespace(manifest=run_pipeline(cfg, out), out=out, cfg=cfg)
