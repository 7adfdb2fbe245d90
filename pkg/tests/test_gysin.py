import random

import pytest

from edrc.exactpoly import parse_poly
from edrc.gysin import (GysinPrecondition, GysinSetup, b_equal, lambda_map, psihat_inverse,
                        reconstruction_check, residue, verify_lift)
from gysingen import SETUPS, make_setup, random_b_form


@pytest.mark.parametrize("name", sorted(SETUPS))
def test_lift_is_a_lift(name):
    setup = make_setup(name)
    assert verify_lift(setup.lift(3), setup)


@pytest.mark.parametrize("name", sorted(SETUPS))
def test_residue_of_lambda(name, rng):
    setup = make_setup(name)
    for p in range(len(setup.A_vars) - 1):
        for _ in range(4):
            w = random_b_form(rng, setup, p)
            r = residue(setup, lambda_map(setup, w, p))
            assert b_equal(setup, r.form, w, p)


@pytest.mark.parametrize("name", sorted(SETUPS))
def test_psihat_inverse_reconstructs(name, rng):
    setup = make_setup(name)
    for _ in range(5):
        a = random_b_form(rng, setup, 0).get(())
        if a is None:
            continue
        ser = psihat_inverse(a, setup, (2, 2))
        assert reconstruction_check(a, ser, setup)


def test_preconditions():
    v = ("x", "y")
    with pytest.raises(GysinPrecondition):
        GysinSetup(parse_poly("x*y", v), parse_poly("1", v))       # not monic in y
    with pytest.raises(GysinPrecondition):
        GysinSetup(parse_poly("y^2 - x", v), parse_poly("x", v))   # 2y does not divide x
    assert GysinSetup(parse_poly("1", v), parse_poly("1", v)).empty


def test_gamma_violation_recorded_not_raised():
    # psi(X0) = 1/x on Z(y) minus Z(x + y) forces layers X0^(nu + 1)
    v = ("x", "y")
    setup = GysinSetup(parse_poly("y", v), parse_poly("x + y", v))
    lift = setup.lift(5)
    assert verify_lift(lift, setup)
    assert lift.layer_degrees[(0, 4)] == 5 > setup.gamma
    assert setup.violations
    strict = GysinSetup(parse_poly("y", v), parse_poly("x + y", v), strict=True)
    with pytest.raises(AssertionError):
        strict.lift(5)


def test_gamma_violation_on_elliptic_setup():
    v = ("x", "y")
    setup = GysinSetup(parse_poly("y^2 - x^3 + x", v), parse_poly("2*y", v))
    lift = setup.lift(2)
    assert setup.gamma == 2 and lift.layer_degrees[(0, 1)] == 3
