from __future__ import annotations

import itertools
from decimal import Decimal, localcontext

import pytest
from hypothesis import given, settings, strategies as st

from zetameta.errors import ConfigurationError, DegenerateTargetError, DomainError, NotFoundError
from zetameta.grafting import (
    PI_OVER_12, Strip, build_graft_targets, build_strips, find_graft, iter_grafts, strips_disjoint,
    validate_u_set,
)
from zetameta.zeta_core import zeta, zeta_many


def test_reference_strips():
    strips = build_strips(0.6, 0.9, 0.005)
    assert len(strips) == 12
    assert strips_disjoint(strips)
    assert 0.6 < strips[0].bounds[0] and strips[-1].bounds[1] < 0.9


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5001, 0.95), st.floats(0.01, 0.049), st.floats(0.01, 0.99))
def test_built_strips_always_disjoint(sigma1, span, frac):
    sigma2 = min(sigma1 + span, 0.999)
    delta = frac * (sigma2 - sigma1) / 24
    assert strips_disjoint(build_strips(sigma1, sigma2, delta))


def test_delta_too_large_reports_limit():
    with pytest.raises(ConfigurationError, match="need delta <"):
        build_strips(0.6, 0.9, 0.02)


def test_near_critical_line_layout():
    strips = build_strips(0.5 + 1e-12, 0.5 + 1.3e-11, 2e-13)
    assert strips_disjoint(strips)
    assert all(s.bounds[0] > 0.5 for s in strips)


def test_u_set_cases():
    assert validate_u_set([0.10, 0.20, 0.25]).valid
    bad = validate_u_set([0.26, 0.10])
    assert set(bad.violations) == {"not_increasing", "gap"}
    with localcontext() as ctx:
        ctx.prec = 100
        edge = [Decimal("0.1"), PI_OVER_12 - Decimal("1e-50")]
        inside = [Decimal("0.1"), PI_OVER_12 - Decimal("1e-42")]
    assert validate_u_set(edge).violations == ("right_margin",)
    assert validate_u_set(inside).valid


def test_u_set_other_violations():
    assert validate_u_set([]).violations == ("empty",)
    assert "left_margin" in validate_u_set([Decimal("1e-44"), Decimal("0.1")]).violations
    assert "gap" in validate_u_set([Decimal("0.1"), Decimal("0.1") + Decimal("1e-35")]).violations
    assert "out_of_range" in validate_u_set([0.1, 0.3]).violations


def test_graft_hits_target():
    g = find_graft(Strip(6, 0.75, 0.005), 0.5, (10, 500))
    assert abs(abs(zeta(g.w)) - 0.5) <= 1e-9
    assert Strip(6, 0.75, 0.005).contains(g.w)


def test_graft_on_probed_value():
    sigma, t_probe = 0.7, 123.45
    target = abs(zeta(complex(sigma, t_probe)))
    g = find_graft(Strip(5, sigma, 0.005), target, (100, 200))
    assert g.error <= 1e-9


def test_graft_is_deterministic():
    a = find_graft(Strip(3, 0.65, 0.005), 0.8, (10, 300))
    b = find_graft(Strip(3, 0.65, 0.005), 0.8, (10, 300))
    assert a == b


def test_graft_returns_smallest_t_on_center_line():
    strip = Strip(6, 0.75, 0.005)
    g = find_graft(strip, 0.5, (10, 500))
    t = [10 + 0.001 * i for i in range(int((g.w.imag - 10) / 0.001))]
    vals = abs(zeta_many([complex(0.75, x) for x in t])) - 0.5
    assert (vals > 0).all() or (vals < 0).all()


def test_multiplicity():
    sols = list(itertools.islice(iter_grafts(Strip(6, 0.75, 0.005), 0.5, (10, 500)), 3))
    assert len({g.w for g in sols}) == 3


def test_small_target_near_critical_line():
    strips = build_strips(0.5 + 1e-12, 0.5 + 1.3e-11, 2e-13)
    g = find_graft(strips[4], 5e-8)
    assert g.error <= 1e-9 and abs(g.achieved / 5e-8 - 1) < 1e-5


def test_graft_errors():
    strip = Strip(1, 0.75, 0.005)
    with pytest.raises(DomainError):
        find_graft(strip, 0.0)
    with pytest.raises(DomainError):
        find_graft(strip, 0.5, (20, 10))
    with pytest.raises(NotFoundError, match="enlarge"):
        find_graft(Strip(1, 0.9, 0.005), 1e-6, (10, 40), t_cap=40)


def test_targets():
    assert build_graft_targets({}, [0.2], 10, 1) == pytest.approx(0.9735458557716262, rel=1e-15)

    class Cert:
        alpha = (5001.4155045149507 + 0.1, 0.0)

    t2 = build_graft_targets({(2, 1): Cert()}, [0.2], 2, 1)
    assert 0.98 < t2 < 1

    class AtZero:
        alpha = (0.0,)

    with pytest.raises(DegenerateTargetError):
        build_graft_targets({(1, 1): AtZero()}, [0.2], 1, 1)
    with pytest.raises(DomainError):
        build_graft_targets({}, [0.2], 3, 1)
