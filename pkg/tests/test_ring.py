from hypothesis import given, strategies as st

from edrc.exactpoly import MultiPoly, parse_poly
from edrc.ring import (AffineRing, DiffForm, LocalizedElem, exterior_d, filtration_stamp,
                       format_form, in_stamp, polynomial_ring, poly_d, wedge)
from conftest import forms, polys

V = ("x", "y", "z")
R3 = polynomial_ring(V)
G = parse_poly("x*y - 1", V)
ELL = AffineRing(("x", "y"), [parse_poly("y^2 - x^3 + x", ("x", "y"))])


@given(st.data(), st.integers(0, 2), st.integers(0, 2))
def test_d_squared_zero(data, p, s):
    w = data.draw(forms(R3, p, 3, G, s))
    assert exterior_d(exterior_d(w)).is_zero()


@given(st.data(), st.integers(0, 2), st.integers(0, 1), st.integers(0, 1), st.integers(0, 2))
def test_leibniz(data, p, q, s, t):
    if p + q > 3:
        return
    a = data.draw(forms(R3, p, 2, G, s))
    b = data.draw(forms(R3, q, 2, G, t))
    lhs = exterior_d(wedge(a, b))
    rhs = wedge(exterior_d(a), b) + wedge(a, exterior_d(b)) * (-1) ** p
    assert (lhs - rhs).is_zero()


@given(st.data(), st.integers(0, 3), st.integers(0, 3))
def test_wedge_graded_commutative(data, p, q):
    a = data.draw(forms(R3, p, 2))
    b = data.draw(forms(R3, q, 2))
    assert (wedge(a, b) - wedge(b, a) * (-1) ** (p * q)).is_zero()


@given(st.data(), st.integers(0, 2), st.integers(0, 3))
def test_d_raises_order_by_one_and_keeps_degree(data, p, s):
    w = data.draw(forms(R3, p, 3, G, s))
    st_w = filtration_stamp(w)
    dw = exterior_d(w)
    if w.is_zero():
        return
    assert in_stamp(dw, st_w.order_s + 1, st_w.degree_d)


@given(st.data(), st.integers(0, 2))
def test_stamp_of_sum_and_wedge(data, p):
    a = data.draw(forms(R3, p, 3, G, 1))
    b = data.draw(forms(R3, p, 2, G, 2))
    sa, sb = filtration_stamp(a), filtration_stamp(b)
    # the sum is represented at the larger of the two representative orders
    assert in_stamp(a + b, max(a.order, b.order), max(sa.degree_d, sb.degree_d))
    c = data.draw(forms(R3, 1, 2, G, 1))
    if p + 1 <= 3:
        sc = filtration_stamp(c)
        assert in_stamp(wedge(a, c), sa.order_s + sc.order_s, sa.degree_d + sc.degree_d)


@given(polys(("x", "y"), 3), polys(("x", "y"), 3))
def test_d_respects_the_ideal(h, k):
    f = ELL.generators[0]
    w = poly_d(ELL, {(): f * h})
    assert ELL.form_is_zero(w, 1)
    assert ELL.is_zero(f * k)


def test_localized_arithmetic():
    R = polynomial_ring(("x",))
    x = MultiPoly.var(("x",), 0)
    a = LocalizedElem(R, x, x * x, 1)
    b = LocalizedElem(R, x, x, 0)
    assert (a - b).is_zero()


def test_format_is_canonical():
    R = polynomial_ring(("x", "y"))
    w = DiffForm(R, 1, {(0,): parse_poly("y", R.vars)}, parse_poly("x", R.vars), 1)
    assert format_form(w) == "[(y)*dx] / (x)^1"


def test_dx_dy_sign():
    R = polynomial_ring(("x", "y"))
    assert (DiffForm.dx(R, 1, 0) + DiffForm.dx(R, 0, 1)).is_zero()
