from __future__ import annotations

import dataclasses
import math

import numpy as np
import pytest

from zetameta.errors import DomainError
from zetameta.factorization import (
    FactorizationCertificate, factorize, mean_value_chain, product_identity_residual, verify_certificate,
    weight_wk,
)
from zetameta.quadrature import adaptive_integrate
from zetameta.trig_library import mean_value_closed_form

L = 1592


@pytest.mark.parametrize("l, k, U", [(1, 1, 0.1), (6, 2, 0.2), (9, 2, 0.1), (5, 1, 0.2)])
def test_certificate_residual_and_invariants(table, l, k, U):
    cert = factorize(l, k, U, L, table)
    assert cert.relative_residual <= 1e-6
    assert cert.rhs == mean_value_closed_form(l, U)
    rep = verify_certificate(cert, table)
    assert rep.ok, rep.failures
    assert len(cert.alpha) == k + 1 and len(cert.beta) == k
    assert L * math.pi < cert.alpha[0] < L * math.pi + U


def test_beta_chain_independent_of_integrand(table):
    betas = {factorize(l, 2, 0.2, L, table).beta for l in (1, 4, 8)}
    assert len(betas) == 1


def test_unit_integrand_gives_unit_mean(table):
    # with f = 1 the alpha and beta chains coincide, so the ratio product is 1
    chain = mean_value_chain(lambda x: np.ones_like(x), 2, 0.2, L, table)
    assert chain.j_value == pytest.approx(0.2, rel=1e-8)


def test_weight_integral_equals_base_width(table):
    cert = factorize(3, 2, 0.1, L, table)
    lo, hi = cert.intervals[-1]
    breaks = table.grid[(table.grid > lo) & (table.grid < hi)]
    val, _ = adaptive_integrate(lambda t: np.asarray(weight_wk(table, t, 2)), lo, hi, breaks=breaks, rel_tol=1e-11)
    assert val == pytest.approx(0.1, rel=1e-8)


def test_perturbed_certificate_fails(table):
    cert = factorize(3, 1, 0.2, L, table)
    moved = dataclasses.replace(cert, alpha=(cert.alpha[0], cert.alpha[1] + 1e-3))
    rep = verify_certificate(moved, table)
    assert not rep.ok
    assert "chain_alpha" in rep.failures


def test_serialization_round_trip(table):
    cert = factorize(7, 1, 0.1, L, table)
    again = FactorizationCertificate.from_dict(cert.to_dict())
    assert again == cert
    assert again.content_hash() == cert.content_hash()


def test_deterministic(table):
    a = factorize(2, 1, 0.2, L, table)
    b = factorize(2, 1, 0.2, L, table)
    assert a.content_hash() == b.content_hash()


def test_sum_of_first_two_certificates(table):
    c1, c2 = factorize(1, 2, 0.2, L, table), factorize(2, 2, 0.2, L, table)
    assert product_identity_residual(c1, c2) <= 1e-8


def test_argument_checks(table):
    with pytest.raises(DomainError):
        factorize(1, 0, 0.1, L, table)
    with pytest.raises(DomainError):
        factorize(1, 4, 0.1, L, table)
    with pytest.raises(DomainError):
        factorize(1, 1, 0.3, L, table)
