import pytest
from hypothesis import given, strategies as st

from edrc.certificates import (CertificateNotFound, find_certificate, idempotents_jelonek,
                               idempotents_kollar, ns_bound, ns_branches, split_unit,
                               verify_certificate, verify_idempotents)
from edrc.exactpoly import parse_poly
from edrc.ring import AffineRing, polynomial_ring


def P(s, v=("x", "y")):
    return parse_poly(s, v)


def test_branches():
    assert ns_branches(1, 2, 2, 2, 2)["selected"] == 4      # t <= m: D d^t
    assert ns_bound(1, 3, 3, 2, 3) == 9                      # d >= 3, m >= n - 1: D d^m
    assert ns_bound(2, 2, 3, 1, 3) == 7                      # 2 D d^m - 1


def test_simple_certificate():
    R = polynomial_ring(("x", "y"))
    c = find_certificate(R, [P("x"), P("x - 1")], 2)
    assert verify_certificate(R, c) and c.achieved_degree == 1


def test_certificate_on_curve():
    R = AffineRing(("x", "y"), [P("x*y - 1")])
    c = find_certificate(R, [P("x")], 4)
    assert verify_certificate(R, c)
    assert c.cofactors[0] == P("y")


def test_common_zero_fails():
    R = polynomial_ring(("x", "y"))
    with pytest.raises(CertificateNotFound):
        find_certificate(R, [P("x"), P("y")], 5)


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_points_split(a, b):
    if a == b:
        return
    phi, psi, delta = split_unit(("x",), [P(f"x - {a}", ("x",))], [P(f"x - {b}", ("x",))], 2)
    assert phi + psi == P("1", ("x",)) and delta == 1


def test_two_methods_agree_on_identities():
    v = ("x", "y")
    comps = [[P("x")], [P("x - 1")], [P("y - 5"), P("x - 3")]]
    k = idempotents_kollar(comps)
    j = idempotents_jelonek([(c, 1, 1 if len(c) == 1 else 0) for c in comps])
    assert verify_idempotents(v, comps, k.idempotents)
    assert verify_idempotents(v, comps, j.idempotents)


def test_intersecting_components_fail():
    with pytest.raises(CertificateNotFound):
        idempotents_kollar([[P("x")], [P("y")]])
