import json

import pytest
from hypothesis import given, strategies as st

from edrc.engine import (JobSpec, PreconditionError, bounds_report, closed_variety_cohomology,
                         full_pipeline, main_bound, parse_form, prop32_bound, run_job,
                         same_classes)
from edrc.exactpoly import ParseError, parse_poly
from edrc.ring import DiffForm


def test_bound_examples():
    assert main_bound(1, 1, 2) == 33554436
    assert prop32_bound(3, 4) == 16
    rep = bounds_report(D=1, s=2, d1=3, m=2)
    assert rep.values["lemma51"] == 72


@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 4))
def test_main_bound_formula(p, m, D):
    e = 2 * p * m + 6 * m
    assert main_bound(p, m, D) == 2 ** (e + 2) * p ** (e + 1) * D ** (4 * p * m + 10 * m + 1) + D ** (m + 1)


def test_bounds_missing_inputs():
    rep = bounds_report(p=1)
    assert "main" in rep.missing
    with pytest.raises(PreconditionError):
        bounds_report(require=["main"], p=1)


def test_two_points_pipeline():
    res = full_pipeline(("x",), [["x"], ["x - 1"]])
    assert res.dims_list() == [2]
    e1, e2 = (w.num[()] for w in res.representatives[0])
    assert {str(e1), str(e2)} == {"-x + 1", "x"}


@pytest.mark.parametrize("gens", [["x*y - 1"], ["x - y^2"]])
def test_route_agreement(gens):
    v = ("x", "y")
    a = closed_variety_cohomology(v, gens)
    b = full_pipeline(v, [gens])
    assert a.dims_list() == b.dims_list()
    R = a.representatives[1][0].ring if a.dims[1] else None
    if R is not None:
        assert same_classes(R, 1, a.representatives[1], b.representatives[1])


def test_route_agreement_elliptic():
    v = ("x", "y")
    a = closed_variety_cohomology(v, ["y^2 - x^3 + x"])
    b = full_pipeline(v, [["y^2 - x^3 + x"]])
    assert a.dims_list() == b.dims_list() == [1, 2]
    for p, stamps in b.stamps.items():
        assert all(d <= b.extra["bounds"][p] for _, d in stamps)


def test_empty_variety_rejected():
    with pytest.raises(PreconditionError):
        closed_variety_cohomology(("x",), ["2"])


def test_jobspec_validation():
    with pytest.raises(PreconditionError):
        JobSpec.from_json('{"mode": "hypersurface-cohomology", "vars": ["x"]}')
    with pytest.raises(PreconditionError):
        JobSpec.from_json('{"mode": "cohomology-closed", "vars": ["x"], "bogus": 1}')
    with pytest.raises(json.JSONDecodeError):
        JobSpec.from_json('{"mode": }')
    job = JobSpec.from_json('{"mode": "cohomology-closed", "vars": ["x", "y"], "ideal": ["x*y-1"]}')
    assert run_job(job)["dims"] == [1, 1]


def test_parse_form():
    v = ("X0", "x")
    p, num = parse_form({"dx^dX0": "x"}, v)
    assert p == 2 and num[(0, 1)] == parse_poly("-x", v)
    with pytest.raises(ParseError):
        parse_form({"dq": "1"}, v)


def test_residue_job_inverts_lambda():
    job = JobSpec("residue", vars=["x", "y"], f="y", g="x", form={"dx": "x^2*X0 + 1"},
                  apply_lambda=True)
    out = run_job(job)
    # X0 = 1/x on V
    assert out["representatives"][0]["form"] == "(x + 1)*dx"
