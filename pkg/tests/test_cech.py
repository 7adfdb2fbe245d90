import random

import pytest

from edrc.cech import (NotClosed, cech_d, cocycle_preimage, embed_global, lemma51_N, total_d,
                       zigzag_collapse)
from edrc.exactpoly import parse_poly
from edrc.ring import AffineRing, DiffForm, exterior_d
from edrc.cech import Cover
from cechgen import COVERS, make_cover, random_closed, random_cochain, random_total


@pytest.mark.parametrize("name", sorted(COVERS))
def test_delta_squared_zero(name, rng):
    cover = make_cover(name)
    for q in range(cover.t - 1):
        for p in range(len(cover.ring.vars) + 1):
            c = random_cochain(rng, cover, q, p, 1, 2)
            assert cech_d(cover, cech_d(cover, c)).is_zero()


@pytest.mark.parametrize("name", sorted(COVERS))
def test_total_d_squared_zero(name, rng):
    cover = make_cover(name)
    for level in range(len(cover.ring.vars) + cover.t):
        c = random_total(rng, cover, level, 1, 2)
        assert total_d(cover, total_d(cover, c)).is_zero()


@pytest.mark.parametrize("name", sorted(COVERS))
def test_contract(name, rng):
    cover = make_cover(name)
    for q in range(cover.t + 1):
        w = random_closed(rng, cover, q, 0, 1, 2)
        eta = cocycle_preimage(cover, w, 1)
        if q >= 1:
            assert (cech_d(cover, eta) - w).is_zero()


def test_not_closed_rejected(rng):
    cover = make_cover("A1-3")
    c = random_cochain(rng, cover, 0, 0, 1, 2)
    while cech_d(cover, c).is_zero():
        c = random_cochain(rng, cover, 0, 0, 1, 2)
    with pytest.raises(NotClosed):
        cocycle_preimage(cover, c, 1)


def test_contract_bound_example():
    assert lemma51_N(1, 2, 3, 2) == 72


@pytest.mark.parametrize("name", ["A1-2", "A2-3"])
def test_zigzag_on_coboundary_plus_global(name, rng):
    cover = make_cover(name)
    n = len(cover.ring.vars)
    for level in range(1, n + 1):
        b = random_total(rng, cover, level - 1, 1, 2)
        alpha = exterior_d(DiffForm(cover.ring, level - 1, {
            I: parse_poly("x^2 + 3*x", cover.ring.vars) for I in [tuple(range(level - 1))]}))
        c = total_d(cover, b) + embed_global(cover, alpha)
        z = zigzag_collapse(cover, c)
        assert exterior_d(z.form).is_zero()


def test_zigzag_punctured_line():
    # dx/x on U_x glued with nothing else is already global on Z(xy - 1)
    v = ("x", "y")
    R = AffineRing(v, [parse_poly("x*y - 1", v)])
    cover = Cover(R, [parse_poly("x", v), parse_poly("y", v)], 2, 1)
    w = DiffForm(R, 1, {(0,): parse_poly("y", v)})
    z = zigzag_collapse(cover, embed_global(cover, w))
    assert (z.form - w).is_zero()
