import random

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from edrc.exactpoly import MultiPoly, monomials_up_to
from edrc.ring import DiffForm, all_index_tuples

settings.register_profile("edrc", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("edrc")


@st.composite
def polys(draw, vars, max_degree=3, max_terms=5, coeff=6):
    monos = monomials_up_to(len(vars), max_degree)
    picked = draw(st.lists(st.sampled_from(monos), max_size=max_terms, unique=True))
    terms = {m: draw(st.integers(-coeff, coeff)) for m in picked}
    return MultiPoly(vars, terms)


@st.composite
def forms(draw, ring, p, max_degree=2, divisor=None, order=0):
    n = len(ring.vars)
    idx = all_index_tuples(n, p)
    num = {}
    for I in draw(st.lists(st.sampled_from(idx), max_size=len(idx), unique=True)) if idx else []:
        num[I] = draw(polys(ring.vars, max_degree, 3))
    return DiffForm(ring, p, num, divisor, order)


@pytest.fixture
def rng():
    return random.Random(1234)


# acceptance criteria report: one line per criterion in the terminal summary
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})")
