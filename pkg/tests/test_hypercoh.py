import pytest

from edrc.exactpoly import parse_poly
from edrc.hypercoh import (closed_cohomology, hypersurface_cohomology, rank_mod_exact,
                           thm71_bound)
from edrc.ring import AffineRing, DiffForm, polynomial_ring


def ring(vars, *gens):
    return AffineRing(vars, [parse_poly(g, vars) for g in gens])


@pytest.mark.parametrize("vars,gens,dims", [
    (("x", "y"), [], [1, 0, 0]),
    (("x", "y"), ["x*y - 1"], [1, 1]),
    (("x", "y"), ["y^2 - x^3 + x"], [1, 2]),
    (("x", "y"), ["x^2 + y^2 - 1"], [1, 1]),
    (("x", "y", "z"), ["x", "y*z - 1"], [1, 1]),
])
def test_closed_route(vars, gens, dims):
    res = closed_cohomology(ring(vars, *gens))
    assert res.dims_list() == dims
    assert res.all_certified


@pytest.mark.parametrize("vars,f,g,dims", [
    (("x", "y"), "y", "x", [1, 1]),
    (("x", "y"), "y^2 - x^3 + x", "2*y", [1, 5]),
    (("x", "y", "z"), "x + y + z", "1", [1, 0, 0]),
])
def test_hypersurface_route(vars, f, g, dims):
    res = hypersurface_cohomology(parse_poly(f, vars), parse_poly(g, vars))
    assert res.dims_list() == dims
    for p, checks in res.extra["residue_checks"].items():
        assert checks["closed"] and checks["rank"] == dims[p]
    for p, stamps in res.stamps.items():
        B = res.extra["bounds"][p]
        assert all(s <= B and d <= B for s, d in stamps)


def test_empty_hypersurface():
    v = ("x",)
    res = hypersurface_cohomology(parse_poly("3", v), parse_poly("1", v))
    assert res.dims_list() == [0] and res.extra["empty"]


def test_hypersurface_bound_values():
    assert thm71_bound(1, 3, 1) == 3 * 6 * 2 ** 5


def test_rank_mod_exact():
    v = ("x", "y")
    R = ring(v, "x*y - 1")
    y = parse_poly("y", v)
    w = DiffForm(R, 1, {(0,): y})
    exact = DiffForm(R, 1, {(0,): parse_poly("2*x", v)})   # d(x^2)
    assert rank_mod_exact(R, 1, [w]) == 1
    assert rank_mod_exact(R, 1, [exact]) == 0
    assert rank_mod_exact(R, 1, [w, w + exact]) == 1
