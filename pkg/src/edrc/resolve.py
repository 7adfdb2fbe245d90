"""Projections of a variety onto hypersurfaces, patch covers, transport of forms.

For X = Z(I) in affine n-space of dimension m, a coordinate change u = M x
and the minimal monic relation f(u_1..u_{m+1}) of u_{m+1} modulo I give a
hypersurface V' = Z(f).  With g = df/du_{m+1}, each remaining coordinate
satisfies g u_{m+i} + w_i(u_1..u_{m+1}) = 0 on X, so X_g and V'_g are
isomorphic.  Several such charts whose g's generate the unit ideal on X form
a patch cover.

All ideal membership tests are degree-capped linear systems.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .certificates import Certificate, CertificateNotFound, find_certificate, ns_bound
from .exactpoly import MultiPoly, matrix_inverse, monomials_up_to
from .linsolve import Echelon
from .ring import AffineRing, DiffForm, exterior_d, filtration_stamp, poly_wedge


class ProjectionFailed(RuntimeError):
    pass


@dataclass
class PatchChart:
    """u = M x; f monic in u_{m+1}; g u_{m+i} + w_i = 0 on X for i >= 2."""
    matrix: list
    f: MultiPoly                 # in u_1..u_{m+1}
    g: MultiPoly
    w: list                      # w_2..w_r in u_1..u_{m+1}
    x_vars: tuple
    m: int
    attempt: int = 0

    @property
    def u_vars(self) -> tuple:
        return self.f.vars

    @property
    def n(self) -> int:
        return len(self.x_vars)

    def u_in_x(self, j: int) -> MultiPoly:
        return _linear(self.matrix[j], self.x_vars)

    def to_x(self, a: MultiPoly) -> MultiPoly:
        """Pull a polynomial in u_1..u_{m+1} back to x."""
        return a.compose([self.u_in_x(j) for j in range(self.m + 1)])

    @property
    def g_x(self) -> MultiPoly:
        return self.to_x(self.g)

    def x_over_g(self) -> list:
        """P_k with x_k = P_k / g on the patch, P_k in u_1..u_{m+1}."""
        inv = matrix_inverse(self.matrix)
        U = self.u_vars
        us = [MultiPoly.var(U, j) for j in range(self.m + 1)]
        out = []
        for k in range(self.n):
            acc = MultiPoly.const(U, 0)
            for j in range(self.m + 1):
                if inv[k][j]:
                    acc = acc + us[j] * self.g * inv[k][j]
            for i, wi in enumerate(self.w):
                c = inv[k][self.m + 1 + i]
                if c:
                    acc = acc - wi * c
            out.append(acc)
        return out

    def pull_to_patch(self, h: MultiPoly) -> MultiPoly:
        """H in u_1..u_{m+1} with h = H / g^deg h on the patch."""
        P = self.x_over_g()
        dh = max(int(h.degree()), 0)
        acc = MultiPoly.const(self.u_vars, 0)
        gp = {}
        for mono, c in h.terms.items():
            t = MultiPoly.const(self.u_vars, c)
            for k, e in enumerate(mono):
                if e:
                    t = t * P[k] ** e
            k = dh - sum(mono)
            if k not in gp:
                gp[k] = self.g ** k
            acc = acc + t * gp[k]
        return acc


def _linear(row, vars) -> MultiPoly:
    n = len(vars)
    t = {}
    for k, c in enumerate(row):
        if c:
            t[tuple(1 if j == k else 0 for j in range(n))] = mpq(c)
    return MultiPoly._raw(tuple(vars), t)


def _u_names(x_vars, k: int) -> tuple:
    names, i = [], 1
    while len(names) < k:
        name = f"u{i}"
        if name not in x_vars:
            names.append(name)
        i += 1
    return tuple(names)


class _Membership:
    """Span of ideal multiples up to a degree, plus labelled extra rows."""

    def __init__(self, ring: AffineRing, cap: int):
        self.ring = ring
        self.cap = cap
        self.col: dict = {}
        self.e = Echelon(track=True)
        n = len(ring.vars)
        for j, gen in enumerate(ring.generators):
            for m in monomials_up_to(n, cap - int(gen.degree())):
                self.e.add(self.vec({tuple(a + b for a, b in zip(k, m)): c for k, c in gen.terms.items()}),
                           ("I", j, m))

    def vec(self, terms) -> dict:
        out = {}
        for m, c in terms.items():
            j = self.col.get(m)
            if j is None:
                j = self.col[m] = len(self.col)
            out[j] = c
        return out

    def add(self, a: MultiPoly, label):
        self.e.add(self.vec(a.terms), label)

    def express(self, a: MultiPoly) -> dict | None:
        return self.e.express(self.vec(a.terms))


def _change(rng: random.Random, n: int, box: int, attempt: int) -> list:
    if attempt == 0:
        return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    while True:
        M = [[rng.randint(-box, box) for _ in range(n)] for _ in range(n)]
        try:
            matrix_inverse(M)
            return M
        except ValueError:
            continue


def _box(box: int, attempt: int) -> int:
    """Entry range for an attempt: small boxes first keep coefficients small."""
    k = (attempt - 1) // 4
    b = 2 ** k
    if b < box:
        return b
    steps = 0
    while 2 ** steps < box:
        steps += 1
    return box * 2 ** max((k - steps) // 2, 0)


def _relation(ring: AffineRing, us: list, m: int, D: int, U: tuple):
    """Smallest k and monic f of u-degree k, total degree <= D, with f(u(x)) in I."""
    last = us[m]
    for k in range(1, D + 1):
        mem = _Membership(ring, D + int(ring.max_gen_degree))
        monos = [mm for mm in monomials_up_to(m + 1, D) if mm[m] < k]
        for mm in monos:
            t = MultiPoly.const(ring.vars, 1)
            for j, e in enumerate(mm):
                if e:
                    t = t * us[j] ** e
            mem.add(t, ("u", mm))
        sol = mem.express(last ** k)
        if sol is None:
            continue
        terms = {tuple(k if j == m else 0 for j in range(m + 1)): mpq(1)}
        for label, c in sol.items():
            if label[0] == "u":
                terms[label[1]] = terms.get(label[1], 0) - c
        f = MultiPoly(U, {mm: c for mm, c in terms.items() if c})
        return f
    return None


def birational_projection(ring: AffineRing, m: int, D: int, avoid: Sequence = (), seed: int = 0,
                          box: int = 7, retries: int = 24, skip: int = 0) -> PatchChart:
    """Chart onto a hypersurface in m+1 variables whose g is nonzero at every
    point of ``avoid``.  Attempt 0 is the identity change; later attempts draw
    integer matrices from boxes 1, 2, 4, .. up to ``box``, then keep doubling."""
    X = ring.vars
    n = len(X)
    r = n - m
    if m < 0 or r < 1:
        raise ValueError("need 0 <= m < n")
    rng = random.Random(seed)
    U = _u_names(X, m + 1)
    last_err = "no attempt made"
    for attempt in range(retries):
        B = _box(box, attempt)
        M = _change(rng, n, B, attempt)
        if attempt < skip:
            continue
        us = [_linear(M[j], X) for j in range(n)]
        f = _relation(ring, us, m, D, U)
        if f is None:
            last_err = f"no monic relation of degree <= {D}"
            continue
        g = f.partial(m)
        gx = g.compose(us[:m + 1])
        if ring.is_zero(gx):
            last_err = "g vanishes on X"
            continue
        if any(gx.evaluate(pt) == 0 for pt in avoid):
            last_err = "g vanishes at an avoided point"
            continue
        ws = []
        cap = int(f.degree())
        mem = _Membership(ring, cap + 1 + int(gx.degree()) + int(ring.max_gen_degree))
        for mm in monomials_up_to(m + 1, cap):
            t = MultiPoly.const(X, 1)
            for j, e in enumerate(mm):
                if e:
                    t = t * us[j] ** e
            mem.add(t, ("u", mm))
        ok = True
        for i in range(1, r):
            sol = mem.express(gx * us[m + i])
            if sol is None:
                ok = False
                break
            terms = {}
            for label, c in sol.items():
                if label[0] == "u":
                    terms[label[1]] = terms.get(label[1], 0) - c
            ws.append(MultiPoly(U, {mm: c for mm, c in terms.items() if c}))
        if not ok:
            last_err = "inverse coordinates not found"
            continue
        chart = PatchChart(M, f, g, ws, X, m, attempt)
        if not chart_consistent(ring, chart):
            last_err = "chart consistency check failed"
            continue
        return chart
    raise ProjectionFailed(f"retry cap exhausted: {last_err}")


def chart_consistent(ring: AffineRing, chart: PatchChart) -> bool:
    """f and g u_{m+i} + w_i vanish on X, and X's generators vanish on V'_g."""
    m = chart.m
    if not ring.is_zero(chart.to_x(chart.f)):
        return False
    for i, wi in enumerate(chart.w):
        if not ring.is_zero(chart.g_x * chart.u_in_x(m + 1 + i) + chart.to_x(wi)):
            return False
    Rf = AffineRing(chart.u_vars, [chart.f], strategy=("monic", m, 0))
    for gen in ring.generators:
        if not Rf.is_zero(chart.pull_to_patch(gen)):
            return False
    return True


@dataclass
class PatchCover:
    charts: list
    certificate: Certificate | None
    residual_witnesses: list = field(default_factory=list)

    @property
    def divisors(self) -> list:
        return [c.g_x for c in self.charts]


def patch_cover(ring: AffineRing, m: int, D: int, seed: int = 0, max_rounds: int = 6) -> PatchCover:
    """At most m + 1 charts whose g's generate the unit ideal on X.

    Each new chart is drawn at random and kept only if it shrinks the residual
    set, which is tested by certificate search rather than by sampling points."""
    charts: list = []
    log = []
    attempt = 0
    for _ in range(max_rounds * (m + 1)):
        chart = birational_projection(ring, m, D, seed=seed, skip=attempt)
        attempt = chart.attempt + 1
        trial = charts + [chart]
        gs = [c.g_x for c in trial]
        d = max(max(int(g.degree()), 1) for g in gs)
        cap = ns_bound(D, d, len(gs), m, len(ring.vars))
        try:
            cert = find_certificate(ring, gs, cap)
            log.append({"charts": len(trial), "cover": True, "cap": cap})
            return PatchCover(trial, cert, log)
        except CertificateNotFound:
            log.append({"charts": len(trial), "cover": False, "cap": cap})
        if len(trial) < m + 1:
            charts = trial
    raise ProjectionFailed(f"no cover by {m + 1} charts found; attempts: {log}")


# transport


def _pull_form_num(chart: PatchChart, num: dict) -> dict:
    """Substitute u = M x in numerators and du_j = sum M[j][k] dx_k."""
    X = chart.x_vars
    du = {j: {(k,): MultiPoly.const(X, c) for k, c in enumerate(chart.matrix[j]) if c}
          for j in range(chart.m + 1)}
    out: dict = {}
    for I, a in num.items():
        acc = {(): chart.to_x(a)}
        for j in I:
            acc = poly_wedge(acc, du[j])
        for K, c in acc.items():
            out[K] = out[K] + c if K in out else c
    return {K: c for K, c in out.items() if not c.is_zero()}


def transport_forms(chart: PatchChart, ring: AffineRing, forms: Sequence[DiffForm],
                    h: MultiPoly | None = None, check: bool = True) -> list:
    """Forms on V'_{gH} moved to X_{gh}.

    A form over g^s (h = 1) keeps its stamp.  With h, a form over (gH)^s
    becomes one over (g h)^(s (deg h + 1)); on X, H = h g^(deg h)."""
    X = chart.x_vars
    gx = chart.g_x
    out = []
    if h is not None:
        h = h if h.vars == X else h.embed(X)
        dh = max(int(h.degree()), 0)
        H = chart.pull_to_patch(h)
        if check and int(H.degree()) > dh * _degree_of(ring, chart):
            raise AssertionError("deg H exceeds deg h deg X")
    for w in forms:
        num = _pull_form_num(chart, w.num)
        if h is None or h.is_constant():
            t = DiffForm._raw(ring, w.p, num, gx, w.order)
            if check:
                st0, st1 = filtration_stamp(w), filtration_stamp(t)
                if st1.order_s > st0.order_s or st1.degree_d > st0.degree_d:
                    raise AssertionError("transport raised the stamp")
        else:
            s = w.order
            f = h ** (s * dh)
            num = {K: c * f for K, c in num.items()}
            t = DiffForm._raw(ring, w.p, num, gx * h, s * (dh + 1))
            if check and filtration_stamp(t).order_s > s * (dh + 1):
                raise AssertionError("transport order exceeds s (deg h + 1)")
        if check and w.p < len(X) and not _closed_on(ring, t):
            if _closed_on(w.ring, w):
                raise AssertionError("transported form is not closed")
        out.append(t)
    return out


def _degree_of(ring: AffineRing, chart: PatchChart) -> int:
    return max(int(chart.f.degree()), 1)


def _closed_on(ring: AffineRing, w: DiffForm) -> bool:
    if w.p >= len(ring.vars):
        return True
    return exterior_d(w).is_zero()


def hypersurface_ring(chart: PatchChart) -> AffineRing:
    return AffineRing(chart.u_vars, [chart.f], strategy=("monic", chart.m, 0))
