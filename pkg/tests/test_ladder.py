from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from zetameta.errors import AnchorError, ConsistencyError, DomainError, RangeError
from zetameta.ladder import (
    IteratedInterval, build_ladder, default_anchor, iterate_forward, load_table, phi1, phi1_inv,
    plan_ladder_range, reverse_interval, save_table,
)
from zetameta.quadrature import adaptive_integrate
from zetameta.zeta_core import z_tilde_sq


@pytest.fixture(scope="module")
def small():
    return build_ladder(1000.0, 1100.0)


def test_table_is_increasing_and_below_diagonal(table):
    assert np.all(np.diff(table.phi) > 0)
    assert np.all(table.phi < table.grid)
    assert table.anchor[0] == 2000.0


def test_table_is_immutable(small):
    with pytest.raises(ValueError):
        small.phi[0] = 0.0


def test_derivative_is_z_tilde_sq(small):
    t, h = 1050.0123, 1e-4
    slope = (phi1(small, t + h) - phi1(small, t - h)) / (2 * h)
    assert slope == pytest.approx(z_tilde_sq(t), rel=1e-6, abs=1e-7)  # O(h^2) difference error


def test_increment_matches_scipy_quad(small):
    a, b = 1003.3, 1047.9
    ref, _ = quad(lambda u: z_tilde_sq(u), a, b, limit=2000, epsabs=1e-13, epsrel=1e-13)
    assert phi1(small, b) - phi1(small, a) == pytest.approx(ref, rel=1e-10)


def test_round_trip(table):
    rng = np.random.default_rng(7)
    lo, hi = table.phi_range
    for y in rng.uniform(lo, hi, 20):
        assert abs(phi1(table, phi1_inv(table, y)) - y) <= 1e-9


def test_default_anchor_formula():
    t0 = 5000.0
    assert default_anchor(t0) == pytest.approx(t0 - (2 + math.log(2 * math.pi) - 2 * 0.5772156649015329) * t0 / math.log(t0))


def test_explicit_anchor_above_diagonal_rejected():
    with pytest.raises(AnchorError):
        build_ladder(1000.0, 1010.0, anchor=1000.5)


def test_build_preconditions():
    with pytest.raises(DomainError):
        build_ladder(1000.0, 1000.0)
    with pytest.raises(DomainError):
        build_ladder(1000.0, 1010.0, resolution=0.1)
    with pytest.raises(DomainError):
        build_ladder(50.0, 200.0)


def test_domain_and_range_errors(small):
    with pytest.raises(DomainError):
        phi1(small, 999.0)
    with pytest.raises(DomainError, match="achievable range"):
        phi1_inv(small, small.phi_range[1] + 1.0)
    base = IteratedInterval(0, 1000.0, 1000.2)
    with pytest.raises(RangeError, match="depth 1"):
        reverse_interval(small, base, 1)


def test_reverse_interval_moves_right(table):
    base = IteratedInterval(0, math.pi * 1592, math.pi * 1592 + 0.2)
    i1 = reverse_interval(table, base, 1)
    i2 = reverse_interval(table, base, 2)
    assert base.hi < i1.lo < i2.lo
    assert iterate_forward(table, i2.lo, 2) == pytest.approx(base.lo, abs=1e-8)


def test_plan_covers_reverse_iterates(table):
    pi_l = math.pi * 1592
    t_lo, t_hi = plan_ladder_range(pi_l, 0.2, 2)
    i2 = reverse_interval(table, IteratedInterval(0, pi_l, pi_l + 0.2), 2)
    assert t_lo <= pi_l and i2.hi < t_hi


@pytest.mark.parametrize("F", [lambda t: np.ones_like(t), lambda t: np.sin(t) ** 2, lambda t: np.cos(2 * t)],
                         ids=["one", "sin2", "cos2t"])
def test_substitution_identity_depth_one(table, F):
    pi_l = math.pi * 1592
    base = IteratedInterval(0, pi_l, pi_l + 0.2)
    i1 = reverse_interval(table, base, 1)
    breaks = table.grid[(table.grid > i1.lo) & (table.grid < i1.hi)]
    lhs, _ = adaptive_integrate(lambda t: F(phi1(table, t)) * z_tilde_sq(t), i1.lo, i1.hi, breaks=breaks,
                                rel_tol=1e-12)
    rhs, _ = quad(lambda t: float(F(np.asarray(t))), base.lo, base.hi, epsabs=1e-300, epsrel=1e-13)
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_save_load_bit_exact(small, tmp_path):
    path = save_table(small, tmp_path / "ladder.csv")
    again = load_table(path)
    assert np.array_equal(again.grid, small.grid)
    assert np.array_equal(again.phi, small.phi)
    assert again.checksum() == small.checksum()
    assert phi1(again, 1033.3) == phi1(small, 1033.3)


def test_load_detects_tampering(small, tmp_path):
    path = save_table(small, tmp_path / "ladder.csv")
    text = path.read_text().replace("1000.05", "1000.06", 1)
    path.write_text(text)
    with pytest.raises(ConsistencyError):
        load_table(path)
