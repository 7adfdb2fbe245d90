"""Residues along Z = Z(g X0 - 1, f) in affine (n+1)-space.

A = k[X0, X1..Xn], f0 = g X0 - 1, f1 = f, B = A/(f0, f1) and I = (f0, f1).
f must be monic in Xn and g divisible by df/dXn, g = h df/dXn.

Elements and forms of B are carried by A-polynomials and A-polynomial forms
(with dX0..dXn), so degrees are those of honest representatives.  Equality
in B and Omega_B goes through the isomorphism B ~ (k[X]/(f))_g, X0 -> 1/g:
on V = Z(f) minus Z(g) the forms dX1..dX(n-1) are a free basis, so after
eliminating dXn the coefficients can be compared by division by f.

Power series in T0, T1 stand for series in f0, f1.  The lift psi: B -> A^
is built layer by layer; psi-hat inverse is computed by successive
decomposition, which keeps coefficient degrees within gamma^(mu+nu) deg a.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from gmpy2 import mpq

from .exactpoly import (NEG_INF, MultiPoly, coprime_leads, exact_quotient,
                        monomials_of_degree, monomials_up_to, reduce_terms)
from .linsolve import Echelon
from .ring import AffineRing, DiffForm, poly_wedge, wedge_index


class GysinPrecondition(ValueError):
    pass


class DecompositionInfeasible(RuntimeError):
    pass


def _fresh_name(vars, base="X0"):
    name = base
    while name in vars:
        name += "_"
    return name


class GysinSetup:
    def __init__(self, f: MultiPoly, g: MultiPoly, strict: bool = False):
        if f.vars != g.vars:
            g = g.embed(f.vars)
        self.vars = f.vars
        n = self.n = len(f.vars)
        if g.is_zero():
            raise GysinPrecondition("g must be nonzero")
        self.empty = f.is_constant()
        if self.empty:
            return
        lc = f.leading_coefficient_in(n - 1)
        if not lc.is_constant() or f.degree_in(n - 1) < 1:
            raise GysinPrecondition(f"f is not monic in {f.vars[-1]}")
        f = f * (1 / lc.constant_value())
        dnf = f.partial(n - 1)
        h = exact_quotient(g, dnf)
        if h is None:
            raise GysinPrecondition(f"d f/d {f.vars[-1]} does not divide g")
        self.f, self.g, self.dnf = f, g, dnf
        self.x0 = _fresh_name(f.vars)
        self.A_vars = (self.x0,) + tuple(f.vars)
        A = self.A_vars
        self.X = [MultiPoly.var(A, i) for i in range(n + 1)]
        self.F = f.embed(A)
        self.G = g.embed(A)
        self.H = h.embed(A)
        self.f0 = self.G * self.X[0] - 1
        self.f1 = self.F
        self.d0 = int(self.f0.degree())
        self.d1 = int(self.f1.degree())
        self.gamma = 2 * self.d0 - self.d1 + 1
        # gamma bounds the lift layers only for some inputs (f = y, g = x + y
        # forces a layer X0^(nu+1) in B); strict turns a violation into an error
        self.strict = strict
        self.violations: list = []
        self.B_ring = AffineRing(A, [self.f0, self.f1], strategy=("linear", 0))
        # d f0 / d Xn
        self.df0_dn = self.f0.partial(n)
        self.Rf = AffineRing(f.vars, [f], strategy=("monic", n - 1, 0))
        self._lift = None
        self._xi_cache: dict = {}
        self._Xi_cache: dict = {}
        self._pw: dict = {}

    def fpow(self, mu: int, nu: int) -> MultiPoly:
        key = (mu, nu)
        if key not in self._pw:
            self._pw[key] = self.f0 ** mu * self.f1 ** nu
        return self._pw[key]

    def violate(self, msg: str):
        if self.strict:
            raise AssertionError(msg)
        self.violations.append(msg)

    def lift(self, level: int) -> "PsiLift":
        if self._lift is None:
            self._lift = PsiLift.start(self)
        while self._lift.level < level:
            self._lift = psi_lift_step(self._lift, self)
        return self._lift


# truncated series in T0, T1


@dataclass
class BiSeries:
    box: tuple
    coeffs: dict = field(default_factory=dict)   # (mu, nu) -> MultiPoly or form dict

    def get(self, mu, nu, zero=None):
        return self.coeffs.get((mu, nu), zero)


def _series_mul(a: dict, b: dict, box, vars) -> dict:
    M0, M1 = box
    out: dict = {}
    for (m1, n1), x in a.items():
        for (m2, n2), y in b.items():
            m, n = m1 + m2, n1 + n2
            if m > M0 or n > M1:
                continue
            t = x * y
            out[(m, n)] = out[(m, n)] + t if (m, n) in out else t
    return {k: v for k, v in out.items() if not v.is_zero()}


def _form_series_wedge(a: dict, b: dict, box) -> dict:
    M0, M1 = box
    out: dict = {}
    for (m1, n1), x in a.items():
        for (m2, n2), y in b.items():
            m, n = m1 + m2, n1 + n2
            if m > M0 or n > M1:
                continue
            w = poly_wedge(x, y)
            if not w:
                continue
            acc = out.setdefault((m, n), {})
            for K, c in w.items():
                acc[K] = acc[K] + c if K in acc else c
    return {k: {K: c for K, c in v.items() if not c.is_zero()} for k, v in out.items()}


def compose_series(c: MultiPoly, xi: Sequence[dict], box, cache: dict | None = None) -> dict:
    """c(xi) for a polynomial c and series xi_i, truncated at box."""
    vars = c.vars
    cache = {} if cache is None else cache
    one = {(0, 0): MultiPoly.const(vars, 1)}

    def power(i, e):
        key = (i, e, box)
        if key not in cache:
            if e == 0:
                cache[key] = one
            else:
                cache[key] = _series_mul(power(i, e - 1), xi[i], box, vars)
        return cache[key]

    out: dict = {}
    for m, coef in c.terms.items():
        acc = {(0, 0): MultiPoly.const(vars, coef)}
        for i, e in enumerate(m):
            if e:
                acc = _series_mul(acc, power(i, e), box, vars)
        for k, v in acc.items():
            out[k] = out[k] + v if k in out else v
    return {k: v for k, v in out.items() if not v.is_zero()}


# the lift psi


def i_decompose(t: MultiPoly, N: int, setup: GysinSetup, degree_cap: int | None = None) -> dict:
    """p_(mu,nu), mu + nu = N, with t = sum p f0^mu f1^nu exactly in A."""
    if t.is_zero():
        return {(mu, N - mu): t.zero() for mu in range(N + 1)}
    base = max(2 * setup.d0 - setup.d1, 0) if degree_cap is None else degree_cap
    if degree_cap is None:
        dt = int(t.degree())
        low = max(dt - N * min(setup.d0, setup.d1), 0)
        caps = sorted({base, 2 * base + 1, low, dt})
    else:
        caps = [degree_cap]
    A = setup.A_vars
    nv = len(A)
    for cap in caps:
        e = Echelon(track=True)
        col: dict = {}

        def vec(terms):
            out = {}
            for m, c in terms.items():
                j = col.get(m)
                if j is None:
                    j = col[m] = len(col)
                out[j] = c
            return out

        target = vec(t.terms)
        for k in range(cap + 1):
            for mu in range(N + 1):
                fp = setup.fpow(mu, N - mu)
                for m in monomials_of_degree(nv, k):
                    e.add(vec({tuple(a + b for a, b in zip(mm, m)): c for mm, c in fp.terms.items()}),
                          (mu, m))
        sol = e.express(target)
        if sol is None:
            continue
        out = {(mu, N - mu): MultiPoly.const(A, 0) for mu in range(N + 1)}
        for (mu, m), c in sol.items():
            out[(mu, N - mu)] = out[(mu, N - mu)] + MultiPoly._raw(A, {m: c})
        acc = t.zero()
        for (mu, nu), pcoef in out.items():
            acc = acc + pcoef * setup.fpow(mu, nu)
        if acc != t:
            raise AssertionError("i_decompose recomposition failed")
        return out
    raise DecompositionInfeasible(f"no decomposition in I^{N} with coefficient degree <= {caps[-1]}")


@dataclass
class PsiLift:
    """Y^(N) = X + sum_{1 <= mu+nu < N} a_(mu,nu) f0^mu f1^nu lifts id_B to A/I^N."""
    level: int
    a: dict                      # (mu, nu) -> list of n+1 polynomials
    Y: list
    layer_degrees: dict = field(default_factory=dict)

    @classmethod
    def start(cls, setup: GysinSetup) -> "PsiLift":
        return cls(1, {(0, 0): list(setup.X)}, list(setup.X))

    def xi(self, i: int) -> dict:
        return {k: v[i] for k, v in self.a.items() if not v[i].is_zero()}


def psi_lift_step(lift: PsiLift, setup: GysinSetup) -> PsiLift:
    N = lift.level
    n = setup.n
    Y = lift.Y
    t0 = setup.f0.compose(Y)
    t1 = setup.f1.compose(Y)
    P = i_decompose(t0, N, setup)
    Q = i_decompose(t1, N, setup)
    X0 = setup.X[0]
    a = dict(lift.a)
    newY = list(Y)
    degs = dict(lift.layer_degrees)
    for mu in range(N + 1):
        nu = N - mu
        an = -(Q[(mu, nu)] * setup.H * X0)
        a0 = -(X0 * (P[(mu, nu)] + setup.df0_dn * an))
        # any representative mod I will do; take a low-degree one
        layer = [setup.B_ring.normal_form(a0)] + [X0.zero()] * (n - 1) + [setup.B_ring.normal_form(an)]
        a[(mu, nu)] = layer
        top = max((int(x.degree()) for x in layer if not x.is_zero()), default=0)
        degs[(mu, nu)] = top
        if top > setup.gamma:
            setup.violate(f"lift layer ({mu},{nu}) degree {top} exceeds gamma = {setup.gamma}")
        fp = setup.fpow(mu, nu)
        for i in range(n + 1):
            if not layer[i].is_zero():
                newY[i] = newY[i] + layer[i] * fp
    out = PsiLift(N + 1, a, newY, degs)
    return out


def verify_lift(lift: PsiLift, setup: GysinSetup) -> bool:
    """f0(Y), f1(Y) lie in I^level."""
    try:
        i_decompose(setup.f0.compose(lift.Y), lift.level, setup)
        i_decompose(setup.f1.compose(lift.Y), lift.level, setup)
    except DecompositionInfeasible:
        return False
    return True


def xi_series(setup: GysinSetup, total: int) -> list:
    """psi(X_i) as series in f0, f1 up to total order `total`."""
    if total in setup._xi_cache:
        return setup._xi_cache[total]
    lift = setup.lift(total + 1)
    out = [{k: v for k, v in lift.xi(i).items() if sum(k) <= total} for i in range(setup.n + 1)]
    setup._xi_cache[total] = out
    return out


def psihat_inverse(a: MultiPoly, setup: GysinSetup, box=(1, 1), check_bound: bool = True) -> BiSeries:
    """b_(mu,nu) in B (as A-representatives) with a = sum psi(b) f0^mu f1^nu."""
    if a.vars != setup.A_vars:
        a = a.embed(setup.A_vars)
    M0, M1 = box
    xi = xi_series(setup, M0 + M1)
    cache: dict = {}
    D = {(0, 0): a} if not a.is_zero() else {}
    b: dict = {}
    order = sorted(((mu, nu) for mu in range(M0 + 1) for nu in range(M1 + 1)),
                   key=lambda k: (k[0] + k[1], k))
    for mu, nu in order:
        c = D.pop((mu, nu), None)
        if c is None or c.is_zero():
            continue
        b[(mu, nu)] = c
        if c.is_constant():
            continue
        sub = compose_series(c, xi, (M0 - mu, M1 - nu), cache)
        for (m2, n2), v in sub.items():
            key = (mu + m2, nu + n2)
            if key == (mu, nu):
                continue
            D[key] = D[key] - v if key in D else -v
    if check_bound and not a.is_zero():
        da = int(a.degree())
        for (mu, nu), c in b.items():
            if c.degree() > setup.gamma ** (mu + nu) * da:
                setup.violate(f"b_{mu}{nu} degree {c.degree()} exceeds gamma^{mu + nu} deg a")
    return BiSeries(box, b)


def reconstruction_check(a: MultiPoly, series: BiSeries, setup: GysinSetup) -> bool:
    """sum psi(b) f0^mu f1^nu == a modulo I^K, K = min(M0, M1) + 1."""
    if a.vars != setup.A_vars:
        a = a.embed(setup.A_vars)
    K = min(series.box) + 1
    Y = setup.lift(K).Y
    acc = a.zero()
    for (mu, nu), c in series.coeffs.items():
        if mu + nu >= K:
            continue
        acc = acc + c.compose(Y) * setup.fpow(mu, nu)
    t = a - acc
    try:
        i_decompose(t, K, setup, degree_cap=max(int(t.degree()), 0) if not t.is_zero() else 0)
    except DecompositionInfeasible:
        return False
    return True


def Xi(setup: GysinSetup, i: int, box) -> dict:
    key = (i, box)
    if key not in setup._Xi_cache:
        setup._Xi_cache[key] = psihat_inverse(setup.X[i], setup, box).coeffs
    return setup._Xi_cache[key]


# forms


def a_d(setup: GysinSetup, a: MultiPoly) -> dict:
    out = {}
    for k in range(setup.n + 1):
        da = a.partial(k)
        if not da.is_zero():
            out[(k,)] = da
    return out


def form_d(setup: GysinSetup, num: Mapping) -> dict:
    out: dict = {}
    for I, a in num.items():
        for k in range(setup.n + 1):
            if k in I:
                continue
            da = a.partial(k)
            if da.is_zero():
                continue
            sign, J = wedge_index((k,), I)
            t = da * sign
            out[J] = out[J] + t if J in out else t
    return {J: a for J, a in out.items() if not a.is_zero()}


def d_xi_series(setup: GysinSetup, i: int, s: int) -> dict:
    """dXi_i truncated at (s-1, s-1); dT0, dT1 are the symbols n+1, n+2."""
    n = setup.n
    b = Xi(setup, i, (s, s))
    out = {}
    for mu in range(s):
        for nu in range(s):
            form: dict = {}
            c = b.get((mu, nu))
            if c is not None:
                form.update(a_d(setup, c))
            c = b.get((mu + 1, nu))
            if c is not None:
                form[(n + 1,)] = c * (mu + 1)
            c = b.get((mu, nu + 1))
            if c is not None:
                form[(n + 2,)] = c * (nu + 1)
            form = {K: v for K, v in form.items() if not v.is_zero()}
            if form:
                out[(mu, nu)] = form
    return out


@dataclass
class QuotientForm:
    """num / (f0 f1)^order modulo forms with poles along one of f0, f1 only."""
    p: int
    num: dict
    order: int

    def at_order(self, setup: GysinSetup, S: int) -> "QuotientForm":
        if S == self.order:
            return self
        fac = (setup.f0 * setup.f1) ** (S - self.order)
        return QuotientForm(self.p, {I: a * fac for I, a in self.num.items()}, S)

    def stamp(self, setup: GysinSetup):
        if not self.num:
            return (0, NEG_INF)
        deg = max(a.degree() for a in self.num.values()) + self.p
        return (self.order, deg - self.order * (setup.d0 + setup.d1))


class QuotientRelations:
    """a/(f0 f1)^S vanishes in the quotient iff a is in (f0^S, f1^S) Omega."""

    def __init__(self, f0: MultiPoly, f1: MultiPoly):
        self.f0, self.f1 = f0, f1
        self._bases: dict = {}
        self._nf: dict = {}
        self.caps: dict = {}

    def basis(self, S: int):
        if S not in self._bases:
            B = [self.f0 ** S, self.f1 ** S]
            self._bases[S] = (B, coprime_leads(B))
        return self._bases[S]

    def prepare(self, p: int, degree):
        if degree == NEG_INF:
            return
        if int(degree) > self.caps.get(p, -1):
            self.caps[p] = int(degree)

    def reduce_poly(self, a: MultiPoly, S: int) -> dict:
        B, ok = self.basis(S)
        if ok:
            cache = self._nf.setdefault(S, {})
            out: dict = {}
            for m, c in a.terms.items():
                r = cache.get(m)
                if r is None:
                    r = cache[m] = reduce_terms({m: mpq(1)}, B)
                for k, v in r.items():
                    w = out.get(k, 0) + c * v
                    if w:
                        out[k] = w
                    else:
                        out.pop(k, None)
            return out
        return self._echelon_reduce(a, S)

    def _echelon_reduce(self, a: MultiPoly, S: int) -> dict:
        # clearing one denominator costs at most one factor's degree
        cap = int(a.degree()) + max(int(self.f0.degree()), int(self.f1.degree()))
        key = (S, cap)
        if key not in self._nf:
            from .ring import mono_key_desc
            from .linsolve import ColumnIndex
            B, _ = self.basis(S)
            nv = len(a.vars)
            idx = ColumnIndex(monomials_up_to(nv, cap), mono_key_desc)
            e = Echelon()
            for b in B:
                for m in monomials_up_to(nv, cap - int(b.degree())):
                    e.add(idx.vec({tuple(x + y for x, y in zip(k, m)): c for k, c in b.terms.items()}))
            e.interreduce()
            self._nf[key] = (idx, e)
        idx, e = self._nf[key]
        return idx.unvec(e.reduce(idx.vec(a.terms)))

    def reduce(self, p: int, num: dict, S: int) -> dict:
        out = {}
        for I, a in num.items():
            for m, c in self.reduce_poly(a, S).items():
                out[(I, m)] = c
        return out

    def is_zero(self, w: QuotientForm) -> bool:
        return not self.reduce(w.p, w.num, w.order)


def lambda_map(setup: GysinSetup, omega: Mapping, p: int | None = None) -> QuotientForm:
    """[w] -> [df0/f0 ^ df1/f1 ^ w] as numerator over (f0 f1)^1."""
    omega = {tuple(I): (a if a.vars == setup.A_vars else a.embed(setup.A_vars))
             for I, a in omega.items() if not a.is_zero()}
    if p is None:
        p = len(next(iter(omega))) if omega else 0
    df = poly_wedge(a_d(setup, setup.f0), a_d(setup, setup.f1))
    return QuotientForm(p + 2, poly_wedge(df, omega), 1)


@dataclass
class ResidueResult:
    form: dict               # (p-2)-form over B, A-representatives
    p: int
    order: int
    degree: float            # coefficient degree + form degree
    bound: int


def residue(setup: GysinSetup, w: QuotientForm, check_bound: bool = True) -> ResidueResult:
    """delta_(1,1): the coefficient of dT0/T0 ^ dT1/T1."""
    n = setup.n
    s = w.order
    p = w.p
    if s < 1 or p < 2 or not w.num:
        return ResidueResult({}, max(p - 2, 0), s, NEG_INF, 0)
    box = (s - 1, s - 1)
    dxi = {i: d_xi_series(setup, i, s) for i in range(n + 1)}
    total: dict = {}
    for I, a in w.num.items():
        b = psihat_inverse(a, setup, box).coeffs
        ser = {k: {(): c} for k, c in b.items()}
        for i in I:
            ser = _form_series_wedge(ser, dxi[i], box)
            if not ser:
                break
        for k, v in ser.items():
            acc = total.setdefault(k, {})
            for K, c in v.items():
                acc[K] = acc[K] + c if K in acc else c
    top = total.get(box, {})
    out = {}
    for K, c in top.items():
        if len(K) >= 2 and K[-2:] == (n + 1, n + 2) and not c.is_zero():
            out[K[:-2]] = c
    deg = max((c.degree() for c in out.values()), default=NEG_INF)
    deg = deg + (p - 2) if out else NEG_INF
    alpha_deg = max(a.degree() for a in w.num.values()) + p
    bound = setup.gamma ** (2 * s - 1) * int(alpha_deg)
    if check_bound and out and deg > bound:
        setup.violate(f"residue degree {deg} exceeds {bound}")
    return ResidueResult(out, p - 2, s, deg, bound)


# comparison in Omega_B through V = Z(f) minus Z(g)


def to_V(setup: GysinSetup, form: Mapping, p: int) -> DiffForm:
    """Image of an A-form in Omega^p of V, written on the basis dX_J, J in 1..n-1.

    The result is a DiffForm over k[X]/(f) with divisor g and reduced numerators."""
    n = setup.n
    R = setup.Rf
    g = setup.g
    dg = {}
    for k in range(n):
        c = g.partial(k)
        if not c.is_zero():
            dg[(k,)] = c
    # dXn on V
    dnf_elim = {}
    for k in range(n - 1):
        c = -(setup.f.partial(k) * setup.H.restrict_vars(setup.vars))
        if not c.is_zero():
            dnf_elim[(k,)] = c
    terms = []   # (order, {J: num}) in R-forms with indices 0..n-1
    for I, a in form.items():
        if a.is_zero():
            continue
        if a.vars != setup.A_vars:
            a = a.embed(setup.A_vars)
        coeffs = a.coefficients_in(0)   # X0 power -> poly in A without X0
        for e, c in coeffs.items():
            c = c.restrict_vars(setup.vars)
            order = e
            if 0 in I:
                rest = tuple(i - 1 for i in I[1:])
                piece = poly_wedge(dg, {rest: -c})
                order += 2
            else:
                piece = {tuple(i - 1 for i in I): c}
            terms.append((order, piece))
    # eliminate dX_n (index n-1)
    out_terms = []
    for order, piece in terms:
        for J, c in piece.items():
            if n - 1 in J:
                rest = J[:-1]
                w = poly_wedge({rest: c}, dnf_elim)
                out_terms.append((order + 1, w))
            else:
                out_terms.append((order, {J: c}))
    E = max((o for o, _ in out_terms), default=0)
    num: dict = {}
    for order, piece in out_terms:
        fac = g ** (E - order)
        for J, c in piece.items():
            t = c * fac
            num[J] = num[J] + t if J in num else t
    red = {}
    for J, c in num.items():
        r = R.normal_form(c)
        if not r.is_zero():
            red[J] = r
    return DiffForm._raw(R, p, red, g, E if red else 0)


def b_equal(setup: GysinSetup, a: Mapping, b: Mapping, p: int) -> bool:
    """Equality of two A-forms in Omega_B."""
    diff = dict(a)
    for I, c in b.items():
        diff[I] = diff[I] - c if I in diff else -c
    return not to_V(setup, diff, p).num


def v_simplify(w: DiffForm) -> DiffForm:
    """Lower the order of a V-form while g divides every numerator mod f."""
    R = w.ring
    g = w.divisor
    num, s = dict(w.num), w.order
    while s > 0 and num:
        new = {}
        for J, c in num.items():
            q = exact_quotient(c, g)
            if q is None:
                return DiffForm._raw(R, w.p, num, g, s)
            new[J] = R.normal_form(q)
        num, s = new, s - 1
    return DiffForm._raw(R, w.p, num, g, s)


def thm62_bound(d0: int, d1: int, s: int, deg_alpha: int) -> int:
    return (2 * d0 - d1 + 1) ** (2 * s - 1) * deg_alpha
