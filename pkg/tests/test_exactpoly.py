import pytest
from hypothesis import given, strategies as st

from edrc.exactpoly import (MultiPoly, ParseError, exact_quotient, matrix_inverse,
                            monic_division, parse_poly)
from conftest import polys

V = ("x", "y", "z")


@given(polys(V), polys(V), polys(V))
def test_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == a.zero()


@given(polys(V, 4, 6))
def test_print_parse_roundtrip(a):
    assert parse_poly(str(a), V) == a


@given(polys(V), polys(V))
def test_product_rule(a, b):
    for i in range(3):
        assert (a * b).partial(i) == a.partial(i) * b + a * b.partial(i)


@given(polys(V), polys(V))
def test_exact_quotient(a, b):
    if b.is_zero():
        return
    assert exact_quotient(a * b, b) == a


@given(polys(("x", "y"), 4))
def test_monic_division(f):
    g = parse_poly("y^2 - x^3 + x", ("x", "y"))
    q, r = monic_division(f, g, 1)
    assert q * g + r == f
    assert r.degree_in(1) < 2 or r.is_zero()


def test_degree_of_zero_is_minus_infinity():
    assert MultiPoly(V).degree() == float("-inf")


def test_parse_error_position():
    with pytest.raises(ParseError) as e:
        parse_poly("x*y +\n  2*)", ("x", "y"))
    assert (e.value.line, e.value.col) == (2, 5)


def test_unknown_variable():
    with pytest.raises(ParseError):
        parse_poly("x + w", ("x",))


def test_rational_coefficients():
    a = parse_poly("1/2*x - 3/4", ("x",))
    assert a * 4 == parse_poly("2*x - 3", ("x",))


def test_matrix_inverse():
    m = [[2, 1], [1, 1]]
    inv = matrix_inverse(m)
    assert [[sum(m[i][k] * inv[k][j] for k in range(2)) for j in range(2)] for i in range(2)] == [[1, 0], [0, 1]]


@given(st.integers(0, 6))
def test_power(k):
    x = MultiPoly.var(V, 0)
    acc = MultiPoly.const(V, 1)
    for _ in range(k):
        acc = acc * (x + 1)
    assert (x + 1) ** k == acc
    assert ((x + 1) ** k).degree() == k
