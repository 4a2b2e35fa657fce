import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algebroidkit.exactpoly import (
    DimensionError,
    Polynomial,
    PolynomialSyntaxError,
    monomials,
    poly_arith,
    poly_format,
    poly_parse,
    poly_partial,
    random_poly,
)


def P(text, n=3):
    return poly_parse(text, n)


def test_arith_examples():
    assert poly_arith(P("x0 + 1", 1), P("x0 - 1", 1), "mul") == P("x0^2 - 1", 1)
    p = P("x0*x1 - 3")
    assert poly_arith(p, Polynomial.zero(3), "add") == p
    assert poly_arith(P("3/2*x0", 2), P("2/3*x1", 2), "mul") == P("x0*x1", 2)
    assert poly_arith(p, p, "sub").is_zero()


def test_arith_rejects_mismatched_vars():
    with pytest.raises(DimensionError):
        poly_arith(P("x0", 1), P("x0", 2), "add")
    with pytest.raises(ValueError):
        poly_arith(P("x0", 1), P("x0", 1), "div")


def test_partial_examples():
    assert poly_partial(P("x0^2*x1", 2), 0) == P("2*x0*x1", 2)
    assert poly_partial(P("x1^3", 2), 0).is_zero()
    assert poly_partial(P("3/2*x0^2 + x0*x1", 2), 0) == P("3*x0 + x1", 2)
    with pytest.raises(DimensionError):
        poly_partial(P("x0", 1), 1)


def test_parse_examples():
    p = P("3/2*x0^2*x1 - x2 + 1")
    assert dict(p.items()) == {(2, 1, 0): Fraction(3, 2), (0, 0, 1): -1, (0, 0, 0): 1}
    assert dict(P("0", 2).items()) == {}
    assert P("x0*x0", 1) == Polynomial(1, {(2,): 1})
    assert P("-x0", 1) == -Polynomial.variable(1, 0)


@pytest.mark.parametrize(
    "text, pos",
    [("x0 +", 4), ("x3", 0), ("2*", 2), ("x0^", 3), ("1/0", 2), ("x0 x1", 3)],
)
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(PolynomialSyntaxError) as exc:
        poly_parse(text, 2)
    assert exc.value.position == pos
    assert f"position {pos}" in str(exc.value)


def test_format_is_canonical():
    assert poly_format(P("1 - x2 + 3/2*x1*x0^2")) == "3/2*x0^2*x1 - x2 + 1"
    assert poly_format(Polynomial.zero(2)) == "0"


def test_evaluate_and_degree():
    p = P("x0^2*x1 - 1/2", 2)
    assert p.evaluate([2, 3]) == Fraction(23, 2)
    assert p.total_degree() == 3
    assert Polynomial.zero(2).total_degree() == -1


def test_monomial_count():
    assert len(monomials(2, 2)) == 6
    assert len(monomials(3, 4)) == 35
    assert monomials(0, 3) == [()]


seeds = st.integers(0, 10**6)


def _three(seed, n=3):
    rng = random.Random(seed)
    return tuple(random_poly(n, 3, rng, n_terms=4) for _ in range(3))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_ring_axioms(seed):
    p, q, r = _three(seed)
    assert p + q == q + p
    assert p * q == q * p
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p - p == Polynomial.zero(3)
    assert p * Polynomial.constant(3, 1) == p


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(0, 2))
def test_leibniz_and_commuting_partials(seed, i):
    p, q, _ = _three(seed)
    assert (p * q).partial(i) == p.partial(i) * q + p * q.partial(i)
    j = (i + 1) % 3
    assert p.partial(i).partial(j) == p.partial(j).partial(i)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_parse_format_round_trip(seed):
    p, _, _ = _three(seed)
    assert poly_parse(poly_format(p), 3) == p


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_evaluation_is_a_ring_homomorphism(seed):
    p, q, _ = _three(seed)
    pt = [Fraction(random.Random(seed).randint(-4, 4), 3) for _ in range(3)]
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p - q).evaluate(pt) == p.evaluate(pt) - q.evaluate(pt)
