"""Random cochains over small principal-open covers of affine space."""

from edrc.cech import CechCochain, Cover, TotalCochain, cech_d
from edrc.exactpoly import parse_poly, random_poly
from edrc.ring import DiffForm, all_index_tuples, polynomial_ring

COVERS = {
    "A1-2": (("x",), ["x", "1 - x"]),
    "A1-3": (("x",), ["x", "x - 1", "x + 1"]),
    "A2-2": (("x", "y"), ["x", "1 - x"]),
    "A2-3": (("x", "y"), ["x", "y", "1 - x - y"]),
}


def make_cover(name):
    vars, gs = COVERS[name]
    ring = polynomial_ring(vars)
    return Cover(ring, [parse_poly(g, vars) for g in gs], 1, len(vars))


def random_cochain(rng, cover, q, p, s, deg):
    """Entries num / g_I^s with deg num <= deg."""
    n = len(cover.ring.vars)
    out = {}
    for I in cover.simplices(q):
        num = {}
        for J in all_index_tuples(n, p):
            a = random_poly(rng, cover.ring.vars, deg, 0.6, 4)
            if not a.is_zero():
                num[J] = a
        if num:
            out[I] = DiffForm(cover.ring, p, num, cover.divisor(I), s)
    return CechCochain(q, p, out)


def random_closed(rng, cover, q, p, s, deg):
    """A Cech cocycle at level q: top-level cochains, or coboundaries below."""
    if q >= cover.t:
        return random_cochain(rng, cover, q, p, s, deg)
    if q == 0:
        return _global(rng, cover, p, s, deg)
    return cech_d(cover, random_cochain(rng, cover, q - 1, p, s, deg))


def _global(rng, cover, p, s, deg):
    # level 0 cocycle: restrictions of one global form
    n = len(cover.ring.vars)
    num = {}
    for J in all_index_tuples(n, p):
        a = random_poly(rng, cover.ring.vars, deg, 0.6, 4)
        if not a.is_zero():
            num[J] = a
    out = {}
    for i, g in enumerate(cover.divisors):
        f = g ** s
        out[(i,)] = DiffForm(cover.ring, p, {J: a * f for J, a in num.items()}, g, s)
    return CechCochain(0, p, out)


def random_total(rng, cover, level, s, deg):
    n = len(cover.ring.vars)
    cells = {}
    for q in range(0, min(level, cover.t) + 1):
        p = level - q
        if 0 <= p <= n:
            cells[q] = random_cochain(rng, cover, q, p, s, deg)
    return TotalCochain(level, cells)
