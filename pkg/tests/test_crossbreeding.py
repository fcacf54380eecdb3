from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from zetameta.crossbreeding import (
    D, G, N, P, LinearRelation, combine, eliminate, numeric_eval, parse_atom, product_identity,
    propagated_tolerance, relation_of, run_script, substitute_denominator, unsubstitute,
)
from zetameta.errors import DomainError, EliminationError, SubstitutionError

from conftest import GOLDEN

F = Fraction


def test_relation_of_third_equation():
    rel = relation_of(3, 2)
    assert rel.coefficients == {P(3, 2): 1, G(10): F(1, 2), G(11): F(-1, 8)}
    assert rel.constant == F(-3, 8)


def test_relation_of_ninth_equation():
    rel = relation_of(9, 1)
    assert rel.coefficients == {P(9, 1): 1, G(12): -1}
    assert rel.constant == 0


def test_first_stage_sums():
    s1 = combine(relation_of(3, 2), relation_of(4, 2), 1, 1)
    s2 = combine(relation_of(5, 2), relation_of(6, 2), 1, 1)
    assert s1.coefficient(G(11)) == F(-1, 4) and s1.constant == F(-3, 4)
    assert s2.coefficient(G(11)) == F(-3, 8) and s2.constant == F(-5, 8)
    assert G(10) not in s1.coefficients and G(12) not in s2.coefficients


def test_sum_of_first_two_is_trivial_up_to_products():
    s = combine(relation_of(1, 1), relation_of(2, 1), 1, 1)
    assert s.coefficients == {P(1, 1): 1, P(2, 1): 1}
    assert s.constant == -1
    zero = combine(relation_of(4, 1), relation_of(4, 1), 1, -1)
    assert zero.is_trivial() and zero.canonical() == "0 = 0"


def test_elimination_coefficients():
    s1 = combine(relation_of(3, 2), relation_of(4, 2), 1, 1)
    s2 = combine(relation_of(5, 2), relation_of(6, 2), 1, 1)
    c = eliminate(G(11), s1, s2)
    assert c.coefficients == {P(3, 2): 3, P(4, 2): 3, P(5, 2): -2, P(6, 2): -2}
    assert c.constant == -1
    assert c.equation_text() == "3*P(3,2) + 3*P(4,2) = 2*P(5,2) + 2*P(6,2) + 1"
    # same relation whichever operand comes first
    assert eliminate(G(11), s2, s1).canonical() == c.canonical()


def test_eliminate_absent_atom():
    with pytest.raises(EliminationError, match="does not occur"):
        eliminate(G(12), relation_of(3, 1), relation_of(5, 1))


def test_golden_derivation():
    result = run_script((GOLDEN / "secondary_k2.dsl").read_text())
    assert result.printed == (GOLDEN / "secondary_k2.txt").read_text().splitlines()


def test_substitution_is_reversible():
    c = run_script((GOLDEN / "secondary_k2.dsl").read_text()).env["C"]
    ident = product_identity(2)
    r = substitute_denominator(c, [ident])
    assert unsubstitute(r, [ident]).canonical() == c.canonical()


def test_mixed_depth_substitution():
    rel = LinearRelation.build({P(3, 1): 1, P(4, 2): -1}, 0)
    idents = [product_identity(1), product_identity(2)]
    r = substitute_denominator(rel, idents)
    text = r.text()
    assert "G(1,1)*N(1,1)" in text and "G(1,2)*N(1,2)" in text
    assert unsubstitute(r, idents).canonical() == rel.canonical()
    with pytest.raises(SubstitutionError, match="k = 2"):
        substitute_denominator(rel, [product_identity(1)])


def test_substitution_rejects_graft_atoms():
    with pytest.raises(SubstitutionError):
        substitute_denominator(relation_of(3, 2), [product_identity(2)])


def _consistent_binding(k, rng):
    g = {l: rng.uniform(0.1, 1.0) for l in range(1, 7)}
    n = {l: rng.uniform(0.5, 2.0) for l in range(1, 7)}
    den = g[1] * n[1] + g[2] * n[2]
    b = {D(k): den}
    for l in range(1, 7):
        b[G(l, k)], b[N(l, k)], b[P(l, k)] = g[l], n[l], g[l] * n[l] / den
    return b


def test_numeric_eval_agrees_between_forms():
    rng = random.Random(3)
    c = run_script((GOLDEN / "secondary_k2.dsl").read_text()).env["C"]
    r = substitute_denominator(c, [product_identity(2)])
    for _ in range(20):
        b = _consistent_binding(2, rng)
        # the substituted form puts the constant on the left, so lhs - rhs flips sign
        assert numeric_eval(r, b) == pytest.approx(-numeric_eval(c, b), abs=1e-12)
        assert numeric_eval(product_identity(2), b) == pytest.approx(0, abs=1e-12)


def test_numeric_eval_errors():
    b = _consistent_binding(2, random.Random(0))
    del b[N(5, 2)]
    r = substitute_denominator(run_script((GOLDEN / "secondary_k2.dsl").read_text()).env["C"],
                               [product_identity(2)])
    with pytest.raises(DomainError, match="not bound"):
        numeric_eval(r, b)
    b = _consistent_binding(2, random.Random(0))
    b[G(1, 2)] = b[G(2, 2)] = 0.0
    with pytest.raises(DomainError, match="numerically zero"):
        numeric_eval(r, b)


def test_propagated_tolerance_weights():
    c = run_script((GOLDEN / "secondary_k2.dsl").read_text()).env["C"]
    assert c.source_weights == {(3, 2): 3, (4, 2): 3, (5, 2): 2, (6, 2): 2}
    res = {(l, 2): 1e-9 for l in range(1, 10)}
    assert propagated_tolerance(c, res) == pytest.approx(10e-9)
    with pytest.raises(DomainError):
        propagated_tolerance(c, {(3, 2): 1.0})


def test_parse_atom():
    assert parse_atom("G11") == G(11) == parse_atom("G(11)")
    assert parse_atom("P(3,2)") == P(3, 2)
    assert parse_atom("D(2)") == D(2)
    for bad in ("P3", "X(1,2)", "D(1,2)"):
        with pytest.raises(DomainError):
            parse_atom(bad)


@pytest.mark.parametrize("script, message", [
    ("A = eq 3 k", "line 1"),
    ("print X", "undefined"),
    ("A = frobnicate 1", "unknown command"),
    ("A = eq 3 k 1\nB = eq 5 k 1\nC = eliminate G12 A B", "line 3"),
])
def test_script_errors(script, message):
    with pytest.raises(DomainError, match=message):
        run_script(script)


atoms = st.sampled_from([P(l, k) for l in range(1, 10) for k in (1, 2)] + [G(10), G(11), G(12)])
fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12).filter(lambda x: x != 0)


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(atoms, fracs, min_size=1, max_size=6), st.fractions(-5, 5, max_denominator=8), fracs)
def test_normalization_invariant_under_scaling(terms, const, factor):
    rel = LinearRelation.build(terms, const)
    norm = rel.normalized()
    assert norm.canonical() == rel.scaled(factor).canonical()
    values = [c for _, c in norm.terms] + [norm.constant]
    assert all(v.denominator == 1 for v in values)
    assert norm.normalized() == norm
