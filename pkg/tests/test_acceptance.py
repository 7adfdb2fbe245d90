"""The eleven acceptance criteria, one test each.

Every test records a PASS/FAIL line that is printed in the pytest terminal
summary, together with the measured values.
"""

import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from math import prod

import pytest

import conftest
from cechgen import make_cover, random_closed, random_cochain, random_total
from gysingen import make_setup, random_b_form
from edrc.cech import cech_d, cocycle_preimage, lemma51_N, restrict, total_d
from edrc.certificates import (CertificateNotFound, find_certificate, idempotents_kollar,
                               ns_bound, verify_certificate, verify_idempotents)
from edrc.engine import (bounds_report, closed_variety_cohomology, full_pipeline, same_classes)
from edrc.exactpoly import MultiPoly, parse_poly, random_poly
from edrc.gysin import b_equal, lambda_map, psihat_inverse, residue
from edrc.hypercoh import hypersurface_cohomology, thm71_bound
from edrc.ring import (AffineRing, DiffForm, all_index_tuples, exterior_d, filtration_stamp,
                       in_stamp, polynomial_ring, wedge)


@contextmanager
def criterion(k, title):
    info = {"detail": ""}
    try:
        yield info
    except BaseException:
        conftest.ACCEPTANCE[k] = (False, title, info["detail"] or "see failure above")
        raise
    conftest.ACCEPTANCE[k] = (True, title, info["detail"])


def test_c01_punctured_line_two_routes():
    with criterion(1, "Z(xy-1): both routes give (1,1) with H^1 = [dx/x]") as info:
        v = ("x", "y")
        t0 = time.perf_counter()
        a = closed_variety_cohomology(v, ["x*y - 1"])
        b = full_pipeline(v, [["x*y - 1"]])
        dt = time.perf_counter() - t0
        R = AffineRing(v, [parse_poly("x*y - 1", v)])
        dx_over_x = DiffForm(R, 1, {(0,): parse_poly("y", v)})     # 1/x = y on X
        info["detail"] = f"closed {a.dims_list()}, pipeline {b.dims_list()}, {dt:.2f}s"
        assert a.dims_list() == b.dims_list() == [1, 1]
        for res in (a, b):
            assert same_classes(R, 1, res.representatives[1], [dx_over_x])
        assert dt < 5


def test_c02_elliptic_curve():
    with criterion(2, "Z(y^2-x^3+x): dim H^1 = 2") as info:
        t0 = time.perf_counter()
        res = closed_variety_cohomology(("x", "y"), ["y^2 - x^3 + x"])
        dt = time.perf_counter() - t0
        info["detail"] = f"dims {res.dims_list()}, {dt:.2f}s"
        assert res.dims[1] == 2 and res.all_certified
        assert dt < 60


def test_c03_hypersurface_minus_divisor():
    with criterion(3, "V(y^2-x^3+x) minus V(2y): dims (1,5), stamps within the bound") as info:
        v = ("x", "y")
        t0 = time.perf_counter()
        res = hypersurface_cohomology(parse_poly("y^2 - x^3 + x", v), parse_poly("2*y", v))
        dt = time.perf_counter() - t0
        worst = {p: max((max(s, d) for s, d in st), default=0) for p, st in res.stamps.items()}
        info["detail"] = (f"dims {res.dims_list()}, max stamp {worst}, bounds "
                          f"{res.extra['bounds']}, {dt:.2f}s")
        assert res.dims_list() == [1, 5]
        for p, stamps in res.stamps.items():
            B = thm71_bound(p, 3, 1)
            assert all(s <= B and d <= B for s, d in stamps)
        assert dt < 600


def test_c04_residue_inverts_lambda():
    with criterion(4, "Res o lambda = id on random forms") as info:
        rng = random.Random(4)
        counts = {}
        for name in ("x|1", "y|x"):
            setup = make_setup(name)
            top = len(setup.A_vars) - 2
            n = 0
            while n < 25:
                p = rng.randint(0, top)
                w = random_b_form(rng, setup, p, deg=rng.randint(0, 3))
                r = residue(setup, lambda_map(setup, w, p))
                assert r.p == p and b_equal(setup, r.form, w, p)
                n += 1
            counts[name] = n
        info["detail"] = f"forms checked {counts}"


def test_c05_lift_bounds_on_test_setups():
    with criterion(5, "lift layers <= 2d0-d1+1 and psihat^-1 coefficients <= gamma^(mu+nu) deg a") as info:
        rng = random.Random(5)
        seen = {}
        for name in ("x|1", "y|x"):
            setup = make_setup(name, strict=True)
            lift = setup.lift(4)
            assert all(d <= setup.gamma for d in lift.layer_degrees.values())
            for _ in range(10):
                a = random_poly(rng, setup.A_vars, rng.randint(1, 3), 0.5, 5)
                if a.is_zero() or a.is_constant():
                    continue
                ser = psihat_inverse(a, setup, (2, 2))
                for (mu, nu), c in ser.coeffs.items():
                    assert c.degree() <= setup.gamma ** (mu + nu) * a.degree()
            seen[name] = (setup.gamma, max(lift.layer_degrees.values()))
            assert not setup.violations
        info["detail"] = f"(gamma, max layer degree) {seen}"


def test_c06_cocycle_preimage_contract():
    with criterion(6, "cocycle_preimage: delta eta = w and stamp(eta) <= (s, d + 2D(s d1)^m)") as info:
        rng = random.Random(6)
        names = ["A1-2", "A1-3", "A2-2", "A2-3"]
        done = 0
        while done < 50:
            cover = make_cover(names[done % 4])
            n = len(cover.ring.vars)
            s = rng.randint(1, 2)
            q = rng.randint(0, cover.t)
            p = rng.randint(0, n)
            w = random_closed(rng, cover, q, p, s, rng.randint(0, 2))
            st = w.stamp()
            if w.is_zero() or st.degree_d > 4:
                continue
            eta = cocycle_preimage(cover, w, s)
            if q >= 1:
                assert (cech_d(cover, eta) - w).is_zero()
            else:
                g = eta.entries[()]
                for (i,), x in w.entries.items():
                    assert (restrict(g, cover.divisors[i]) - x).is_zero()
            N = lemma51_N(cover.degree_D, s, cover.d1, cover.dim_m)
            es = eta.stamp()
            assert es.order_s <= s and es.degree_d <= st.degree_d + N
            done += 1
        info["detail"] = f"{done} cochains"


def test_c07_idempotent_family():
    with criterion(7, "idempotents for Z(x1, x2x3-1) u Z(x1x3-x2^2)") as info:
        v = ("x1", "x2", "x3")
        P = lambda s: parse_poly(s, v)
        comps = [[P("x1"), P("x2*x3 - 1")], [P("x1*x3 - x2^2")]]
        t0 = time.perf_counter()
        idem = idempotents_kollar(comps, [2, 2])
        dt = time.perf_counter() - t0
        info["detail"] = f"degrees {idem.degrees}, cap {idem.bound}, {dt:.2f}s"
        assert verify_idempotents(v, comps, idem.idempotents)
        assert 4 <= idem.max_degree <= 16 and idem.bound == 16
        assert dt < 60


def _unit_instance(rng):
    n = rng.randint(1, 3)
    vars = ("x", "y", "z")[:n]
    d = rng.randint(1, 3)
    if rng.random() < 0.5:
        # g and g - 1 plus extra generators
        h = MultiPoly(vars, {})
        while h.degree() < 1:
            h = random_poly(rng, vars, d, 0.6, 4)
        gs = [h, h - 1]
    else:
        # last generator is 1 - sum a_i g_i
        gs = []
        while len(gs) < rng.randint(1, 2):
            g = random_poly(rng, vars, rng.randint(1, d), 0.6, 4)
            if g.degree() >= 1:
                gs.append(g)
        last = MultiPoly.const(vars, 1)
        for g in gs:
            a = random_poly(rng, vars, max(d - int(g.degree()), 0), 0.6, 3)
            last = last - a * g
        if last.degree() < 1:
            return None
        gs.append(last)
    while len(gs) < 3 and rng.random() < 0.3:
        g = random_poly(rng, vars, d, 0.5, 4)
        if g.degree() >= 1:
            gs.append(g)
    return vars, gs


def _zero_instance(rng):
    n = rng.randint(1, 2)
    vars = ("x", "y")[:n]
    pt = [rng.randint(-2, 2) for _ in vars]
    gs = []
    while len(gs) < rng.randint(1, 2):
        g = random_poly(rng, vars, rng.randint(1, 2), 0.6, 4)
        g = g - g.evaluate(pt)
        if g.degree() >= 1:
            gs.append(g)
    return vars, gs


def test_c08_nullstellensatz_battery():
    with criterion(8, "Nullstellensatz certificates within the branch bound") as info:
        rng = random.Random(8)
        ok, worst = 0, []
        while ok < 30:
            inst = _unit_instance(rng)
            if inst is None:
                continue
            vars, gs = inst
            n = len(vars)
            d = max(int(g.degree()) for g in gs)
            bound = ns_bound(1, d, len(gs), n, n)
            R = polynomial_ring(vars)
            cert = find_certificate(R, gs, bound)
            assert verify_certificate(R, cert) and cert.achieved_degree <= bound
            worst.append((cert.achieved_degree, bound))
            ok += 1
        failed = 0
        for _ in range(6):
            vars, gs = _zero_instance(rng)
            n = len(vars)
            d = max(int(g.degree()) for g in gs)
            with pytest.raises(CertificateNotFound):
                find_certificate(polynomial_ring(vars), gs, ns_bound(1, d, len(gs), n, n))
            failed += 1
        info["detail"] = (f"{ok} certified, max achieved/bound "
                          f"{max(a / b for a, b in worst):.2f}, {failed} zero instances rejected")


def _independent(name, g):
    F = Fraction
    if name == "main":
        p, m, D = g["p"], g["m"], g["D"]
        return int(pow(F(2), 2 * p * m + 6 * m + 2) * pow(F(p), 2 * p * m + 6 * m + 1)
                   * pow(F(D), 4 * p * m + 10 * m + 1) + pow(F(D), m + 1))
    if name == "prop31":
        return g["D"] ** (g["m"] + 1)
    if name == "prop32":
        return (g["n"] + 1) * g["D"] ** 2 // 4
    if name == "cor41":
        return min(g["D"] ** (g["m"] + 1), (g["n"] + 1) * g["D"] ** 2 // 4)
    if name == "thm21":
        D, d, t, m, n = g["D"], g["d"], g["t"], g["m"], g["n"]
        sel = D * d ** t if t <= m else (D * d ** m if d >= 3 and m >= n - 1 else 2 * D * d ** m - 1)
        return {"t<=m": D * d ** t, "t>m,d>=3,m>=n-1": D * d ** m, "else": 2 * D * d ** m - 1,
                "selected": sel}
    if name == "thm22":
        return (g["n"] + 1) * prod(g["Ds"])
    if name == "lemma51":
        return 2 * g["D"] * (g["s"] * g["d1"]) ** g["m"]
    if name == "thm53":
        return g["d"] + 2 * g["D"] * (g["l"] + 1) * (g["s"] + g["l"]) ** g["m"] * g["d1"] ** g["m"]
    if name == "thm62":
        return (2 * g["d0"] - g["d1"] + 1) ** (2 * g["s"] - 1) * g["deg_alpha"]
    if name == "thm71":
        return (g["p"] + 2) * (g["d"] + g["dp"] + 2) * (2 * g["dp"] - g["d"] + 3) ** (2 * g["p"] + 3)
    raise KeyError(name)


def test_c09_bounds_calculator():
    with criterion(9, "bounds: main(1,1,2) = 33554436 and every formula re-evaluated") as info:
        t0 = time.perf_counter()
        assert bounds_report(p=1, m=1, D=2).values["main"] == 33554436
        assert bounds_report(n=3, D=4).values["prop32"] == 16
        assert bounds_report(D=1, s=2, d1=3, m=2).values["lemma51"] == 72
        rng = random.Random(9)
        checked = set()
        for _ in range(200):
            g = {"p": rng.randint(1, 4), "m": rng.randint(1, 4), "n": rng.randint(1, 5),
                 "D": rng.randint(1, 9), "d": rng.randint(1, 5), "dp": rng.randint(0, 4),
                 "d0": rng.randint(1, 4), "d1": rng.randint(1, 4), "s": rng.randint(1, 3),
                 "l": rng.randint(0, 3), "t": rng.randint(1, 5), "deg_alpha": rng.randint(1, 9),
                 "Ds": [rng.randint(1, 5) for _ in range(rng.randint(1, 3))]}
            rep = bounds_report(**g)
            assert not rep.missing
            for name, v in rep.values.items():
                assert v == _independent(name, g), name
                checked.add(name)
        dt = time.perf_counter() - t0
        info["detail"] = f"{len(checked)} formulas, {dt:.3f}s"
        assert {"main", "prop31", "prop32", "thm21", "thm22", "lemma51", "thm53", "thm62",
                "thm71"} <= checked
        assert dt < 2


def _rand_form(rng, R, p, deg, div=None, s=0):
    num = {}
    for I in all_index_tuples(len(R.vars), p):
        a = random_poly(rng, R.vars, deg, 0.5, 4)
        if not a.is_zero():
            num[I] = a
    return DiffForm(R, p, num, div, s)


def test_c10_property_suite():
    with criterion(10, "algebra property suite") as info:
        rng = random.Random(10)
        v = ("x", "y", "z")
        R = polynomial_ring(v)
        g = parse_poly("x*y - z + 2", v)
        t0 = time.perf_counter()
        for _ in range(100):
            w = _rand_form(rng, R, rng.randint(0, 1), 3, g, rng.randint(0, 2))
            assert exterior_d(exterior_d(w)).is_zero()
            st = filtration_stamp(w)
            if not w.is_zero():
                assert in_stamp(exterior_d(w), w.order + 1, st.degree_d)
        for _ in range(30):
            p, q = rng.randint(0, 2), rng.randint(0, 1)
            a = _rand_form(rng, R, p, 2, g, rng.randint(0, 1))
            b = _rand_form(rng, R, q, 2, g, rng.randint(0, 1))
            lhs = exterior_d(wedge(a, b))
            assert (lhs - wedge(exterior_d(a), b) - wedge(a, exterior_d(b)) * (-1) ** p).is_zero()
            assert (wedge(a, b) - wedge(b, a) * (-1) ** (p * q)).is_zero()
            sa, sb = filtration_stamp(a), filtration_stamp(b)
            assert in_stamp(wedge(a, b), a.order + b.order, sa.degree_d + sb.degree_d)
        for name in ("A1-3", "A2-3"):
            cover = make_cover(name)
            for _ in range(10):
                c = random_cochain(rng, cover, 0, rng.randint(0, len(cover.ring.vars)), 1, 2)
                assert cech_d(cover, cech_d(cover, c)).is_zero()
                for level in range(len(cover.ring.vars) + cover.t):
                    tc = random_total(rng, cover, level, rng.randint(0, 2), 2)
                    assert total_d(cover, total_d(cover, tc)).is_zero()
        dt = time.perf_counter() - t0
        info["detail"] = f"{dt:.2f}s"
        assert dt < 60


CLI_RUNS = [
    ["bounds", "--p", "1", "--m", "1", "--D", "2"],
    ["certificate", "--vars", "x,y", "--ideal", "x*y - 1", "--gens", "x"],
    ["idempotents", "--vars", "x", "--component", "x", "--component", "x - 1"],
    ["cohomology", "--vars", "x,y", "--ideal", "x*y - 1"],
    ["cohomology", "--vars", "x,y", "--ideal", "x*y - 1", "--route", "pipeline"],
    ["hypersurface", "--vars", "x,y", "--f", "y", "--g", "x"],
    ["residue", "--vars", "x,y", "--f", "y", "--g", "x", "--form", '{"dx": "X0"}', "--lambda"],
    ["resolve", "--vars", "x,y", "--ideal", "x*y - 1"],
]


def test_c11_cli_determinism():
    with criterion(11, "CLI output is bit-identical across runs with a fixed seed") as info:
        same = 0
        for args in CLI_RUNS:
            cmd = [sys.executable, "-m", "edrc.cli"] + args + ["--seed", "11"]
            a = subprocess.run(cmd, capture_output=True)
            b = subprocess.run(cmd, capture_output=True)
            assert a.returncode == 0, a.stderr
            assert a.stdout == b.stdout and a.stdout
            same += 1
        info["detail"] = f"{same} subcommand runs identical"
