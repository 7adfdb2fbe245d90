"""Truncated cohomology of complexes of localized differential forms.

The engine works with the total complex of the Cech-de Rham double complex
of a principal-open cover.  One cell with divisor 1 is the global-section de
Rham complex of an affine ring; one cell with divisor g is the complex of the
principal open X_g.  A cochain is stored at a common order s as numerators
a_I over g_I^s; the total differential raises the order by one:

    delta:  a over g_I^s   ->  +-a g_j^s g_J  over g_J^(s+1)
    d:      a over g_I^s   ->  (-1)^q (g_I da - s dg_I ^ a) over g_I^(s+1)

Equality of numerators is decided by a relation reducer: Kaehler relations
of the ring, or the quotient by forms with a smaller pole (Gysin route).

A truncation (s, d) admits numerators at order s of stamp degree <= d, i.e.
form degree <= d + s deg g_I.  Coboundaries are searched at a margin
(s', d') >= (s, d).  The search has no a priori end: dimensions are reported
once two consecutive margins agree.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from gmpy2 import mpq

from .exactpoly import MultiPoly, NEG_INF
from .linsolve import Echelon
from .ring import (AffineRing, DiffForm, filtration_stamp, form_keyed, form_monomials,
                   poly_d, poly_wedge, polynomial_ring)


# relation reducers


class KahlerRelations:
    """a/g^S = 0 iff a lies in I*Omega + dI ^ Omega (g a non-zerodivisor)."""

    def __init__(self, ring: AffineRing):
        self.ring = ring
        self.caps: dict = {}
        self.slack = 2 * int(ring.max_gen_degree)

    def prepare(self, p: int, degree):
        if degree == NEG_INF or not self.ring.generators:
            return
        c = int(degree) + self.slack
        if c > self.caps.get(p, -1):
            self.caps[p] = c

    def reduce(self, p: int, num: dict, S: int) -> dict:
        keyed = form_keyed(num)
        if not self.ring.generators or not keyed:
            return keyed
        if p == 0 and self.ring.strategy[0] == "monic" and len(self.ring.generators) == 1:
            return form_keyed({(): self.ring.normal_form(num[()])}) if () in num else {}
        idx, e = self.ring.form_slice(p, self.caps[p])
        return idx.unvec(e.reduce(idx.vec(keyed)))


# complex


class FormComplex:
    """Total complex over cells I of a cover {g_0..g_t} of a ring."""

    def __init__(self, ring: AffineRing, divisors: Sequence[MultiPoly] | None = None,
                 relations=None, max_level: int | None = None):
        self.ring = ring
        self.n = len(ring.vars)
        self.divisors = [ring.one()] if not divisors else list(divisors)
        self.t = len(self.divisors) - 1
        self.relations = relations if relations is not None else KahlerRelations(ring)
        self.max_level = self.n + self.t if max_level is None else max_level
        self._div: dict = {}
        self._dg: dict = {}
        self._pow: dict = {}

    def divisor(self, I) -> MultiPoly:
        if I not in self._div:
            acc = self.ring.one()
            for i in I:
                acc = acc * self.divisors[i]
            self._div[I] = acc
        return self._div[I]

    def ddiv(self, I) -> dict:
        if I not in self._dg:
            self._dg[I] = poly_d(self.ring, {(): self.divisor(I)})
        return self._dg[I]

    def power(self, I, k: int) -> MultiPoly:
        key = (I, k)
        if key not in self._pow:
            self._pow[key] = self.divisor(I) ** k
        return self._pow[key]

    def cells(self, level: int) -> list:
        out = []
        for q in range(0, min(level, self.t) + 1):
            p = level - q
            if p > self.n:
                continue
            for I in combinations(range(self.t + 1), q + 1):
                out.append((I, p))
        return out

    def window(self, I, d: int, s: int) -> int:
        return d + s * int(max(self.divisor(I).degree(), 0))

    def differential(self, I, p: int, num: dict, s: int) -> dict:
        """d_tot of num over g_I^s, as {J: numerator over g_J^(s+1)}."""
        out: dict = {}
        q = len(I) - 1
        gI = self.divisor(I)
        if p + 1 <= self.n:
            da = poly_d(self.ring, num)
            if s and not gI.is_constant():
                t = {K: a * gI for K, a in da.items()}
                for K, a in poly_wedge(self.ddiv(I), num).items():
                    t[K] = t[K] - a * s if K in t else -a * s
                da = t
            else:
                da = {K: a * gI for K, a in da.items()}
            if q & 1:
                da = {K: -a for K, a in da.items()}
            da = {K: a for K, a in da.items() if not a.is_zero()}
            if da:
                out[I] = da
        for j in range(self.t + 1):
            if j in I:
                continue
            J = tuple(sorted(I + (j,)))
            sign = -1 if J.index(j) & 1 else 1
            f = self.power((j,), s) * self.divisor(J)
            if sign < 0:
                f = -f
            out[J] = {K: a * f for K, a in num.items()}
        return out

    def lift(self, I, num: dict, s: int, S: int) -> dict:
        if S == s:
            return num
        f = self.power(I, S - s)
        return {K: a * f for K, a in num.items()}

    def candidates(self, level: int, s: int, d: int) -> list:
        """Monomial cochains (I, p, {K: monomial}) inside the truncation, ascending degree."""
        out = []
        for I, p in self.cells(level):
            w = self.window(I, d, s)
            for K, m in form_monomials(self.n, p, w):
                out.append((sum(m) + p - s * max(int(self.divisor(I).degree()), 0), I, p,
                            {K: MultiPoly._raw(self.ring.vars, {m: mpq(1)})}))
        out.sort(key=lambda c: (c[0], c[1], sorted(c[3])[0], _mono(c[3])))
        return out

    def stamp_degree(self, cochain: dict, s: int):
        best = NEG_INF
        for I, (p, num) in cochain.items():
            for a in num.values():
                if a.is_zero():
                    continue
                d = a.degree() + p - s * max(self.divisor(I).degree(), 0)
                best = max(best, d)
        return best


def _mono(num: dict):
    K = sorted(num)[0]
    return tuple(-e for e in sorted(num[K].terms)[0])


def _addto(acc: dict, num: dict, c=1):
    for K, a in num.items():
        t = a * c
        acc[K] = acc[K] + t if K in acc else t


class _Columns:
    def __init__(self):
        self.col: dict = {}

    def vec(self, I, keyed: dict) -> dict:
        out = {}
        for k, c in keyed.items():
            key = (I, k)
            j = self.col.get(key)
            if j is None:
                j = self.col[key] = len(self.col)
            out[j] = c
        return out


@dataclass
class LevelResult:
    level: int
    dim: int
    representatives: list            # cochains {I: (p, num)} at order s
    order: int
    degrees: list
    margins: list                    # (s', d', dim) per margin tried
    certified: bool
    closed_count: int = 0
    exact_count: int = 0
    windows: list = field(default_factory=list)   # (s, d, dim) per degree window


@dataclass
class CohomologyResult:
    dims: dict = field(default_factory=dict)
    representatives: dict = field(default_factory=dict)
    stamps: dict = field(default_factory=dict)
    certified: dict = field(default_factory=dict)
    truncation: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def dims_list(self) -> list:
        if not self.dims:
            return []
        return [self.dims.get(p, 0) for p in range(max(self.dims) + 1)]

    @property
    def all_certified(self) -> bool:
        return all(self.certified.values())


def closed_cochains(cx: FormComplex, level: int, s: int, d: int) -> list:
    """Basis of closed cochains in the (s, d) truncation as [(degree, cochain)]."""
    cands = cx.candidates(level, s, d)
    if not cands:
        return []
    images = []
    for deg, I, p, num in cands:
        images.append(cx.differential(I, p, num, s))
    rel = cx.relations
    for img in images:
        for J, num in img.items():
            p = _p_of(cx, level + 1, J)
            rel.prepare(p, _form_degree(num, p))
    cols = _Columns()
    e = Echelon(track=True)
    for k, img in enumerate(images):
        v = {}
        for J, num in img.items():
            p = _p_of(cx, level + 1, J)
            v.update(cols.vec(J, rel.reduce(p, num, s + 1)))
        e.add(v, k)
    out = []
    for combo in e.kernel:
        top = max(combo)
        coch: dict = {}
        for k, c in combo.items():
            deg, I, p, num = cands[k]
            if I not in coch:
                coch[I] = (p, {})
            _addto(coch[I][1], num, c)
        out.append((cands[top][0], coch))
    return out


def _p_of(cx: FormComplex, level: int, I) -> int:
    return level - (len(I) - 1)


def _form_degree(num: dict, p: int):
    return max((a.degree() for a in num.values() if not a.is_zero()), default=NEG_INF) + p


def truncated_cohomology(cx: FormComplex, level: int, s: int, d: int, margin_start: int = 0,
                         max_margins: int = 4, witness_order: int | None = None) -> LevelResult:
    """H^level in the (s, d) truncation with stabilized coboundary margins.

    Margin k searches coboundaries of witnesses at (s + k, d + k); with
    ``witness_order`` fixed, only the degree margin grows."""
    Z = closed_cochains(cx, level, s, d)
    history = []
    prev = None
    result = None
    for k in range(margin_start, margin_start + max_margins):
        s2 = witness_order if witness_order is not None else s + k
        d2 = d + k
        dim, reps, S, degs, nex = _quotient(cx, level, s, Z, s2, d2)
        history.append((s2, d2, dim))
        result = (dim, reps, S, degs, nex)
        if prev is not None and prev == dim:
            return LevelResult(level, dim, reps, S, degs, history, True, len(Z), nex)
        prev = dim
    dim, reps, S, degs, nex = result
    return LevelResult(level, dim, reps, S, degs, history, False, len(Z), nex)


def _quotient(cx: FormComplex, level: int, s: int, Z: list, s2: int, d2: int):
    rel = cx.relations
    S = max(s, s2 + 1) if level > 0 else s
    exact_raw = []
    if level > 0:
        for deg, I, p, num in cx.candidates(level - 1, s2, d2):
            img = cx.differential(I, p, num, s2)
            exact_raw.append({J: cx.lift(J, a, s2 + 1, S) for J, a in img.items()})
    z_raw = []
    for deg, coch in Z:
        z_raw.append((deg, {I: (p, cx.lift(I, num, s, S)) for I, (p, num) in coch.items()}))
    for img in exact_raw:
        for J, num in img.items():
            p = _p_of(cx, level, J)
            rel.prepare(p, _form_degree(num, p))
    for deg, coch in z_raw:
        for I, (p, num) in coch.items():
            rel.prepare(p, _form_degree(num, p))
    cols = _Columns()
    e = Echelon()
    for img in exact_raw:
        v = {}
        for J, num in img.items():
            v.update(cols.vec(J, rel.reduce(_p_of(cx, level, J), num, S)))
        e.add(v)
    nex = len(e)
    reps, degs = [], []
    for (deg, coch), (_, orig) in zip(z_raw, Z):
        v = {}
        for I, (p, num) in coch.items():
            v.update(cols.vec(I, rel.reduce(p, num, S)))
        if v and e.add(v):
            reps.append(orig)
            degs.append(deg)
    return len(reps), reps, S, degs, nex


def cochain_to_forms(cx: FormComplex, coch: dict, s: int) -> dict:
    """{I: DiffForm over g_I^s} for a cochain produced by the engine."""
    return {I: DiffForm._raw(cx.ring, p, {K: a for K, a in num.items() if not a.is_zero()},
                             cx.divisor(I), s)
            for I, (p, num) in coch.items()}


def is_exact_cochain(cx: FormComplex, level: int, coch: dict, s: int, s2: int, d2: int) -> bool:
    """Membership of a cochain in the coboundaries of the (s2, d2) witness window."""
    if level == 0:
        return all(not cx.relations.reduce(p, num, s) for I, (p, num) in coch.items())
    _, reps, *_ = _quotient(cx, level, s, [(0, coch)], s2, d2)
    return not reps


# routes


def global_complex(ring: AffineRing) -> FormComplex:
    return FormComplex(ring)


def localized_complex(ring: AffineRing, g: MultiPoly) -> FormComplex:
    return FormComplex(ring, [g])


def cech_de_rham_complex(ring: AffineRing, divisors: Sequence[MultiPoly]) -> FormComplex:
    return FormComplex(ring, divisors)


def complex_cohomology(cx: FormComplex, levels: Sequence[int], s: int, d: int,
                       max_margins: int = 4, witness_order: int | None = None) -> CohomologyResult:
    res = CohomologyResult()
    for l in levels:
        t0 = time.perf_counter()
        lr = truncated_cohomology(cx, l, s, d, max_margins=max_margins, witness_order=witness_order)
        res.dims[l] = lr.dim
        res.representatives[l] = [cochain_to_forms(cx, c, s) for c in lr.representatives]
        res.stamps[l] = [(s, dg) for dg in lr.degrees]
        res.certified[l] = lr.certified
        res.truncation[l] = {"s": s, "d": d, "margins": lr.margins}
        res.timings[f"H{l}"] = time.perf_counter() - t0
    return res


def default_dim(ring: AffineRing) -> int:
    return max(len(ring.vars) - len(ring.generators), 0)


def stabilized_cohomology(cx: FormComplex, level: int, s: int, d_start: int, patience: int = 2,
                          max_steps: int = 8, max_margins: int = 4,
                          witness_order: int | None = None) -> LevelResult:
    """Grow the degree window from d_start until the dimension has repeated
    ``patience`` times in a row.  Certified only if that happened and the last
    window's coboundary margins agreed too."""
    windows = []
    run = 0
    lr = None
    for k in range(max_steps):
        d = d_start + k
        cur = truncated_cohomology(cx, level, s, d, max_margins=max_margins, witness_order=witness_order)
        windows.append((s, d, cur.dim))
        run = run + 1 if lr is not None and cur.dim == lr.dim else 0
        lr = cur
        if run >= patience:
            break
    lr.windows = windows
    lr.certified = lr.certified and run >= patience
    return lr


def _record(res: CohomologyResult, key: int, lr: LevelResult, forms: list, t0: float):
    res.dims[key] = lr.dim
    res.representatives[key] = forms
    res.stamps[key] = [(lr.order if lr.level > 0 else 0, dg) for dg in lr.degrees]
    res.certified[key] = lr.certified
    res.truncation[key] = {"margins": lr.margins, "windows": lr.windows}
    res.timings[f"H{key}"] = time.perf_counter() - t0


def closed_cohomology(ring: AffineRing, dim: int | None = None, degree: int | None = None,
                      max_margins: int = 4, patience: int = 2) -> CohomologyResult:
    """H^p of the global-section complex Omega_A for p <= dim.

    With ``degree`` given only that window is used; otherwise windows grow
    from p + 2 until the dimension settles."""
    m = default_dim(ring) if dim is None else dim
    cx = global_complex(ring)
    res = CohomologyResult()
    for p in range(m + 1):
        t0 = time.perf_counter()
        if degree is not None:
            lr = truncated_cohomology(cx, p, 0, degree, max_margins=max_margins)
            lr.windows = [(0, degree, lr.dim)]
        else:
            lr = stabilized_cohomology(cx, p, 0, p + 2, patience=patience, max_margins=max_margins)
        forms = [cochain_to_forms(cx, c, 0)[(0,)] for c in lr.representatives]
        _record(res, p, lr, forms, t0)
        res.stamps[p] = [(0, dg) for dg in lr.degrees]
    return res


# hypersurfaces V = Z(f) minus Z(g) through the quotient complex


def quotient_complex(setup) -> FormComplex:
    """Forms over f0 f1 modulo those with a pole along only one of f0, f1."""
    from .gysin import QuotientRelations
    A = polynomial_ring(setup.A_vars)
    return FormComplex(A, [setup.f0 * setup.f1], relations=QuotientRelations(setup.f0, setup.f1))


def quotient_complex_cohomology(setup, level: int, s: int = 1, d: int | None = None,
                                patience: int = 2, max_margins: int = 4,
                                witness_order: int | None = None) -> LevelResult:
    """Witnesses default to the cochain order s; only their degree grows."""
    cx = quotient_complex(setup)
    wo = s if witness_order is None else witness_order
    if d is not None:
        lr = truncated_cohomology(cx, level, s, d, max_margins=max_margins, witness_order=wo)
        lr.windows = [(s, d, lr.dim)]
        return lr
    return stabilized_cohomology(cx, level, s, 0, patience=patience, max_margins=max_margins,
                                 witness_order=wo)


def thm71_bound(p: int, d: int, dp: int) -> int:
    return (p + 2) * (d + dp + 2) * (2 * dp - d + 3) ** (2 * p + 3)


def _v_rank(cxV: FormComplex, p: int, forms: list, margin: int) -> tuple:
    """(all closed, rank modulo coboundaries) for forms on V at a common order."""
    E = max(w.order for w in forms)
    E = max(E, 1) if p > 0 else E
    Z = []
    closed = True
    rel = cxV.relations
    for w in forms:
        num = w.at_order(E).num if w.order != E else dict(w.num)
        for J, img in cxV.differential((0,), p, num, E).items():
            q = _p_of(cxV, p + 1, J)
            rel.prepare(q, _form_degree(img, q))
            if rel.reduce(q, img, E + 1):
                closed = False
        Z.append((0, {(0,): (p, num)}))
    d2 = int(max(filtration_stamp(w).degree_d for w in forms)) + margin
    rank, *_ = _quotient(cxV, p, E, Z, E + margin, d2)
    return closed, rank


def hypersurface_cohomology(f: MultiPoly, g: MultiPoly, p_max: int | None = None, s: int = 1,
                            degree: int | None = None, patience: int = 2,
                            check_residues: bool = True) -> CohomologyResult:
    """H^p of V = Z(f) minus Z(g): classes of the quotient complex at level p + 2,
    pushed through the residue and pulled back along X0 -> 1/g."""
    from .gysin import GysinSetup, QuotientForm, residue, to_V, v_simplify
    setup = GysinSetup(f, g)
    n = setup.n
    p_max = n - 1 if p_max is None else p_max
    res = CohomologyResult()
    if setup.empty:
        for p in range(p_max + 1):
            res.dims[p] = 0
            res.representatives[p] = []
            res.stamps[p] = []
            res.certified[p] = True
        res.extra["empty"] = True
        return res
    d, dp = int(setup.f.degree()), int(setup.g.degree())
    cxV = FormComplex(setup.Rf, [setup.g])
    res.extra["bounds"] = {}
    res.extra["residue_checks"] = {}
    for p in range(p_max + 1):
        t0 = time.perf_counter()
        lr = quotient_complex_cohomology(setup, p + 2, s, degree, patience)
        forms = []
        for coch in lr.representatives:
            (_, (q, num)), = coch.items()
            r = residue(setup, QuotientForm(q, num, s))
            forms.append(v_simplify(to_V(setup, r.form, p)))
        B = thm71_bound(p, d, dp)
        res.extra["bounds"][p] = B
        _record(res, p, lr, forms, t0)
        res.stamps[p] = [tuple(filtration_stamp(w)) for w in forms]
        for st in res.stamps[p]:
            if st[0] > B or st[1] > B:
                raise AssertionError(f"H^{p} representative stamp {st} exceeds {B}")
        if check_residues and forms:
            closed, rank = _v_rank(cxV, p, forms, 2)
            res.extra["residue_checks"][p] = {"closed": closed, "rank": rank}
            if not closed or rank != len(forms):
                res.certified[p] = False
        elif check_residues:
            res.extra["residue_checks"][p] = {"closed": True, "rank": 0}
    res.extra["gamma_violations"] = list(setup.violations)
    return res


def rank_mod_exact(ring: AffineRing, p: int, forms: Sequence[DiffForm], margin: int = 2) -> int:
    """Rank of global p-forms (divisor 1) modulo d of a degree window
    ``margin`` above the largest form degree."""
    forms = [w for w in forms]
    if not forms:
        return 0
    cx = global_complex(ring)
    Z = [(0, {(0,): (p, dict(w.num))}) for w in forms]
    top = max((filtration_stamp(w).degree_d for w in forms), default=0)
    d2 = int(top) + margin if top != NEG_INF else margin
    rank, *_ = _quotient(cx, p, 0, Z, 0, d2)
    return rank
