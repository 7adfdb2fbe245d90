import pytest

from edrc.exactpoly import parse_poly
from edrc.resolve import (ProjectionFailed, birational_projection, chart_consistent, patch_cover,
                          transport_forms)
from edrc.hypercoh import hypersurface_cohomology
from edrc.ring import AffineRing, exterior_d


def ring(vars, *gens):
    return AffineRing(vars, [parse_poly(g, vars) for g in gens])


@pytest.mark.parametrize("vars,gens,m,D,charts", [
    (("x", "y"), ["x*y - 1"], 1, 2, 2),
    (("x", "y"), ["y^2 - x^3 + x"], 1, 3, 2),
    (("x", "y"), ["x - 2*y"], 1, 1, 1),
    (("x", "y", "z"), ["x", "y*z - 1"], 1, 2, 2),
])
def test_cover(vars, gens, m, D, charts):
    R = ring(vars, *gens)
    cov = patch_cover(R, m, D)
    assert len(cov.charts) == charts
    assert all(chart_consistent(R, c) for c in cov.charts)
    assert R.is_zero(cov.certificate.combination() - 1)


def test_cover_is_seed_deterministic():
    R = ring(("x", "y"), "x*y - 1")
    a = [c.matrix for c in patch_cover(R, 1, 2, seed=3).charts]
    b = [c.matrix for c in patch_cover(R, 1, 2, seed=3).charts]
    assert a == b


def test_singular_cone_has_no_cover():
    R = ring(("x", "y", "z"), "x*z - y^2")
    with pytest.raises(ProjectionFailed):
        patch_cover(R, 2, 2, max_rounds=2)


def test_transport_keeps_forms_closed():
    R = ring(("x", "y"), "x*y - 1")
    chart = birational_projection(R, 1, 2)
    hr = hypersurface_cohomology(chart.f, chart.g, p_max=1)
    moved = transport_forms(chart, R, hr.representatives[1])
    assert len(moved) == hr.dims[1]
    for w in moved:
        assert exterior_d(w).is_zero()
