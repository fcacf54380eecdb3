from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetameta.errors import DomainError
from zetameta.trig_library import (
    FUNCTIONS, U_MAX, eval_f, mean_value_closed_form, mean_value_formula, quadrature_mean, sinc,
    sinc_decomposition,
)

F = Fraction
# coefficients (c0, c2, c4, c6) read off the exact meta-functional equations
EXPECTED = {
    1: (F(1, 2), F(-1, 2), F(0), F(0)),
    2: (F(1, 2), F(1, 2), F(0), F(0)),
    3: (F(3, 8), F(-1, 2), F(1, 8), F(0)),
    4: (F(3, 8), F(1, 2), F(1, 8), F(0)),
    5: (F(5, 16), F(-15, 32), F(3, 16), F(-1, 32)),
    6: (F(5, 16), F(15, 32), F(3, 16), F(1, 32)),
    7: (F(0), F(1), F(0), F(0)),
    8: (F(0), F(0), F(1), F(0)),
    9: (F(0), F(0), F(0), F(1)),
}

u_values = st.floats(min_value=1e-6, max_value=U_MAX * (1 - 1e-9))


def test_twelve_functions():
    assert [f.l for f in FUNCTIONS] == list(range(1, 13))
    assert {f.kind for f in FUNCTIONS[9:]} == {"sinc"}


@pytest.mark.parametrize("l", range(1, 10))
def test_decomposition_exact(l):
    assert sinc_decomposition(l).coefficients == EXPECTED[l]


def test_atom_support():
    assert set(sinc_decomposition(8).atom_coefficients()) == {11}
    assert set(sinc_decomposition(6).atom_coefficients()) == {10, 11, 12}
    assert set(sinc_decomposition(1).atom_coefficients()) == {10}


@pytest.mark.parametrize("l", range(1, 10))
def test_closed_form_matches_quadrature(l):
    for U in np.linspace(0.01, 0.26, 6):
        q = quadrature_mean(l, float(U))
        assert abs(mean_value_closed_form(l, float(U)) - q) <= 1e-12 * abs(q)


def test_closed_form_beats_direct_formula_at_small_u():
    U = 1e-3
    q = quadrature_mean(5, U)
    assert abs(mean_value_closed_form(5, U) - q) <= 1e-12 * q
    assert abs(mean_value_formula(5, U) - q) > 1e-6 * q  # naive sines lose everything here


@settings(max_examples=60, deadline=None)
@given(u_values)
def test_mean_identities(U):
    m = {l: mean_value_closed_form(l, U) for l in range(1, 7)}
    assert abs(m[1] + m[2] - 1) <= 1e-14
    assert abs(2 * (m[5] + m[6]) + 1 - 3 * (m[3] + m[4])) <= 1e-14


@settings(max_examples=60, deadline=None)
@given(u_values)
def test_means_in_unit_interval(U):
    for l in range(1, 10):
        assert 0 < mean_value_closed_form(l, U) < 1


def test_closed_form_vectorized():
    U = np.array([0.05, 0.1, 0.2])
    out = mean_value_closed_form(6, U)
    assert out.shape == (3,)
    assert out[1] == mean_value_closed_form(6, 0.1)


def test_eval_f_values():
    assert eval_f(7, 0.3) == pytest.approx(math.cos(0.6))
    assert eval_f(5, 0.3) == pytest.approx(math.sin(0.3) ** 6)
    assert eval_f(10, 0.2) == pytest.approx(math.sin(0.4) / 0.4)
    assert sinc(0.0) == 1.0


def test_domain():
    with pytest.raises(DomainError):
        eval_f(11, 0.3)
    with pytest.raises(DomainError):
        mean_value_closed_form(3, 0.0)
    with pytest.raises(DomainError):
        mean_value_closed_form(3, U_MAX)
    with pytest.raises(DomainError):
        sinc_decomposition(10)
    with pytest.raises(DomainError):
        eval_f(13, 0.1)
