"""Affine rings, localizations and differential forms.

``AffineRing`` is R/I for a polynomial ring R, with one of three ways of
deciding equality: no ideal at all, division by a generator that is monic in
some variable, or a degree-capped linear membership system.

``LocalizedElem`` is a/g^s in the localization at a divisor g.  Its stamp
(order, degree) uses deg(a/g^s) = deg a - s deg g.  This degree belongs to the
representative, not to the element: the same element may have several
representatives with different stamps.

``DiffForm`` stores a p-form with a common divisor and a common order,
sum_I a_I dX_I / g^s.  The form degree of a_I dX_I is deg a_I + p.
"""

from __future__ import annotations

from itertools import combinations
from typing import Mapping, NamedTuple, Sequence

from gmpy2 import mpq

from .exactpoly import (NEG_INF, MultiPoly, exact_quotient, monic_division,
                        monomials_up_to)
from .linsolve import ColumnIndex, Echelon


def mono_key_desc(m):
    """Sort key putting high degree first, then lex-larger first."""
    return (-sum(m), tuple(-e for e in m))


class AffineRing:
    """R/I with a fixed reduction strategy.

    strategy is "none", ("monic", var_index, generator_index) or
    ("linear", degree_cap).
    """

    def __init__(self, vars: Sequence[str], generators: Sequence[MultiPoly] = (),
                 strategy=None):
        self.vars = tuple(vars)
        gens = []
        for g in generators:
            if g.vars != self.vars:
                g = g.embed(self.vars) if set(g.vars) <= set(self.vars) else g
            if g.vars != self.vars:
                raise ValueError("generator ambient mismatch")
            if g.is_zero():
                raise ValueError("zero generator")
            gens.append(g)
        if strategy is None:
            strategy = "none" if not gens else _auto_strategy(gens)
        if isinstance(strategy, tuple) and strategy[0] == "monic":
            _, v, k = strategy
            lc = gens[k].leading_coefficient_in(v)
            if not lc.is_constant():
                raise ValueError("designated generator is not monic in the variable")
            gens[k] = gens[k] * (1 / lc.constant_value())
        self.generators = tuple(gens)
        self.strategy = strategy
        self._slices: dict = {}
        self._form_slices: dict = {}

    @property
    def is_polynomial_ring(self) -> bool:
        return not self.generators

    @property
    def max_gen_degree(self) -> int:
        return max((g.degree() for g in self.generators), default=0)

    def poly(self, text: str) -> MultiPoly:
        from .exactpoly import parse_poly
        return parse_poly(text, self.vars)

    def zero(self):
        return MultiPoly.const(self.vars, 0)

    def one(self):
        return MultiPoly.const(self.vars, 1)

    def __repr__(self):
        gens = ", ".join(str(g) for g in self.generators)
        return f"AffineRing({self.vars}, [{gens}], {self.strategy})"

    def same_as(self, other: "AffineRing") -> bool:
        return self is other or (self.vars == other.vars and self.generators == other.generators)

    # reduction
    def normal_form(self, f: MultiPoly) -> MultiPoly:
        if not self.generators:
            return f
        st = self.strategy
        if st == "none":
            raise ValueError("ring has no reduction strategy; equality is undecidable here")
        if st[0] == "monic":
            _, v, k = st
            g = self.generators[k]
            others = [h for i, h in enumerate(self.generators) if i != k]
            r = monic_division(f, g, v)[1]
            if others:
                # remaining generators handled by the linear system on the remainder
                return self._linear_nf(r)
            return r
        return self._linear_nf(f)

    def is_zero(self, f: MultiPoly) -> bool:
        if f.is_zero():
            return True
        return self.normal_form(f).is_zero()

    def _cap_for(self, f: MultiPoly) -> int:
        cap = self.strategy[1] if self.strategy[0] == "linear" else 0
        return max(cap, int(f.degree()) + self.max_gen_degree)

    def ideal_slice(self, degree: int):
        """Reduced echelon of I ∩ R_{<=degree} spanned by monomial multiples."""
        if degree in self._slices:
            return self._slices[degree]
        monos = monomials_up_to(len(self.vars), degree)
        idx = ColumnIndex(monos, mono_key_desc)
        e = Echelon()
        for g in self.generators:
            dg = g.degree()
            for m in monomials_up_to(len(self.vars), degree - dg):
                e.add(idx.vec(_shift(g.terms, m)))
        e.interreduce()
        self._slices[degree] = (idx, e)
        return idx, e

    def _linear_nf(self, f: MultiPoly) -> MultiPoly:
        if f.is_zero():
            return f
        deg = self._cap_for(f)
        idx, e = self.ideal_slice(deg)
        r = e.reduce(idx.vec(f.terms))
        return MultiPoly._raw(self.vars, idx.unvec(r))


    # Kaehler relations: a polynomial p-form is zero in Omega_A iff it lies in
    # I*Omega^p + dI ^ Omega^(p-1).  Membership is tested in a degree slice.
    def form_slice(self, p: int, degree: int):
        key = (p, degree)
        if key in self._form_slices:
            return self._form_slices[key]
        n = len(self.vars)
        idx = ColumnIndex(form_monomials(n, p, degree), form_key_desc)
        e = Echelon()
        tuples = all_index_tuples(n, p)
        lower = all_index_tuples(n, p - 1) if p >= 1 else []
        for g in self.generators:
            dg = g.degree()
            for m in monomials_up_to(n, degree - p - dg):
                gm = _shift(g.terms, m)
                for I in tuples:
                    e.add(idx.vec({(I, k): c for k, c in gm.items()}))
            if p >= 1:
                dgf = poly_d(self, {(): g})
                for m in monomials_up_to(n, degree - p + 1 - dg):
                    mono = MultiPoly._raw(self.vars, {m: mpq(1)})
                    for J in lower:
                        w = poly_wedge(dgf, {J: mono})
                        if w:
                            e.add(idx.vec(form_keyed(w)))
        e.interreduce()
        self._form_slices[key] = (idx, e)
        return idx, e

    def form_degree(self, num: Mapping, p: int):
        return max((a.degree() for a in num.values() if not a.is_zero()), default=NEG_INF) + p

    def form_normal_form(self, num: Mapping, p: int) -> dict:
        """Canonical remainder of a polynomial p-form modulo the relation slice."""
        num = {I: a for I, a in num.items() if not a.is_zero()}
        if not self.generators or not num:
            return num
        if p == 0:
            r = self.normal_form(num[()])
            return {(): r} if not r.is_zero() else {}
        deg = int(self.form_degree(num, p)) + 2 * self.max_gen_degree
        idx, e = self.form_slice(p, deg)
        r = e.reduce(idx.vec(form_keyed(num)))
        return keyed_form(self.vars, idx.unvec(r))

    def form_is_zero(self, num: Mapping, p: int) -> bool:
        return not self.form_normal_form(num, p)


def _auto_strategy(gens):
    if len(gens) == 1:
        g = gens[0]
        for v in reversed(range(g.nvars)):
            k = g.degree_in(v)
            if k > 0 and k == g.degree() and g.leading_coefficient_in(v).is_constant():
                return ("monic", v, 0)
        for v in reversed(range(g.nvars)):
            if g.degree_in(v) > 0 and g.leading_coefficient_in(v).is_constant():
                return ("monic", v, 0)
    return ("linear", max(g.degree() for g in gens))


def _shift(terms: Mapping, m) -> dict:
    return {tuple(a + b for a, b in zip(k, m)): c for k, c in terms.items()}


def polynomial_ring(vars: Sequence[str]) -> AffineRing:
    return AffineRing(vars, ())


class FiltrationStamp(NamedTuple):
    order_s: int
    degree_d: float

    def le(self, other: "FiltrationStamp") -> bool:
        return self.order_s <= other.order_s and self.degree_d <= other.degree_d


class LocalizedElem:
    """numerator / divisor^order in (R/I)_divisor."""

    __slots__ = ("ring", "divisor", "numerator", "order")

    def __init__(self, ring: AffineRing, divisor: MultiPoly, numerator: MultiPoly, order: int = 0):
        if order < 0:
            raise ValueError("negative order")
        self.ring = ring
        self.divisor = divisor
        self.numerator = numerator
        self.order = order

    @classmethod
    def of(cls, ring, divisor, value) -> "LocalizedElem":
        if isinstance(value, LocalizedElem):
            return value
        if not isinstance(value, MultiPoly):
            value = MultiPoly.const(ring.vars, value)
        return cls(ring, divisor, value, 0)

    def _same(self, o: "LocalizedElem"):
        if not self.ring.same_as(o.ring) or self.divisor != o.divisor:
            raise ValueError("ring/divisor mismatch")

    def at_order(self, s: int) -> MultiPoly:
        if s < self.order:
            raise ValueError("cannot lower the order of a representative")
        if s == self.order:
            return self.numerator
        return self.numerator * self.divisor ** (s - self.order)

    def __add__(self, o):
        o = LocalizedElem.of(self.ring, self.divisor, o)
        self._same(o)
        s = max(self.order, o.order)
        return LocalizedElem(self.ring, self.divisor, self.at_order(s) + o.at_order(s), s)

    __radd__ = __add__

    def __neg__(self):
        return LocalizedElem(self.ring, self.divisor, -self.numerator, self.order)

    def __sub__(self, o):
        return self + (-LocalizedElem.of(self.ring, self.divisor, o))

    def __rsub__(self, o):
        return (-self) + o

    def __mul__(self, o):
        if isinstance(o, LocalizedElem):
            self._same(o)
            return LocalizedElem(self.ring, self.divisor, self.numerator * o.numerator,
                                 self.order + o.order)
        if isinstance(o, MultiPoly):
            return LocalizedElem(self.ring, self.divisor, self.numerator * o, self.order)
        return LocalizedElem(self.ring, self.divisor, self.numerator * o, self.order)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return LocalizedElem(self.ring, self.divisor, self.numerator ** k, self.order * k)

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.numerator)

    def normalize(self) -> "LocalizedElem":
        num = self.ring.normal_form(self.numerator) if self.ring.generators else self.numerator
        s = self.order
        g = self.divisor
        if num.is_zero():
            return LocalizedElem(self.ring, g, num, 0)
        if not g.is_constant():
            # best-effort order reduction by exact polynomial division
            while s > 0:
                q = exact_quotient(num, g)
                if q is None:
                    break
                num = self.ring.normal_form(q) if self.ring.generators else q
                s -= 1
        else:
            num = num * (g.constant_value() ** -s) if s else num
            s = 0
        return LocalizedElem(self.ring, g, num, s)

    def stamp(self) -> FiltrationStamp:
        if self.numerator.is_zero():
            return FiltrationStamp(0, NEG_INF)
        return FiltrationStamp(self.order, self.numerator.degree() - self.order * self.divisor.degree())

    def __repr__(self):
        return f"({self.numerator})/({self.divisor})^{self.order}"


def loc_equal(a: LocalizedElem, b: LocalizedElem) -> bool:
    a._same(b)
    s = max(a.order, b.order)
    return a.ring.is_zero(a.at_order(s) - b.at_order(s))


def substitute(f: MultiPoly, assignments: Mapping, ring: AffineRing | None = None,
               divisor: MultiPoly | None = None) -> LocalizedElem:
    """Compose f with values that are polynomials or localized elements.

    All localized values must share one ring and divisor; the result lives
    there too.  Its order is the sum over variables of deg_var(f) * order.
    """
    vals = []
    for name in f.vars:
        if name not in assignments:
            if f.degree_in(f.vars.index(name)) > 0:
                raise ValueError(f"unassigned variable {name}")
            vals.append(None)
        else:
            vals.append(assignments[name])
    for v in vals:
        if isinstance(v, LocalizedElem):
            ring = ring or v.ring
            divisor = divisor if divisor is not None else v.divisor
    if ring is None:
        raise ValueError("target ring needed when no localized value is given")
    if divisor is None:
        divisor = ring.one()
    loc = [LocalizedElem.of(ring, divisor, v) if v is not None else None for v in vals]
    total = sum(f.degree_in(i) * loc[i].order for i in range(f.nvars) if loc[i] is not None
                and f.degree_in(i) > 0)
    acc = MultiPoly.const(ring.vars, 0)
    pw: dict = {}

    def power(i, e):
        if (i, e) not in pw:
            pw[(i, e)] = loc[i].numerator ** e
        return pw[(i, e)]

    for m, c in f.terms.items():
        t = MultiPoly.const(ring.vars, c)
        s = 0
        for i, e in enumerate(m):
            if e:
                t = t * power(i, e)
                s += e * loc[i].order
        if total > s:
            t = t * divisor ** (total - s)
        acc = acc + t
    return LocalizedElem(ring, divisor, acc, total)


# differential forms


def wedge_index(a: tuple, b: tuple):
    """(sign, merged) for dX_a ∧ dX_b; sign 0 if they share an index."""
    if set(a) & set(b):
        return 0, ()
    inv = 0
    for i in a:
        for j in b:
            if i > j:
                inv += 1
    return (-1 if inv & 1 else 1), tuple(sorted(a + b))


def sort_sign(seq) -> int:
    """Sign of the permutation sorting seq (0 if it has repeats)."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    inv = 0
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                inv += 1
    return -1 if inv & 1 else 1


class DiffForm:
    """sum_I num[I] dX_I / divisor^order over an affine ring."""

    __slots__ = ("ring", "divisor", "order", "p", "num")

    def __init__(self, ring: AffineRing, p: int, num: Mapping | None = None,
                 divisor: MultiPoly | None = None, order: int = 0):
        if p < 0 or p > len(ring.vars):
            raise ValueError("form degree out of range")
        self.ring = ring
        self.p = p
        self.divisor = divisor if divisor is not None else ring.one()
        self.order = order
        out = {}
        for I, a in (num or {}).items():
            I = tuple(I)
            if len(I) != p or list(I) != sorted(set(I)):
                raise ValueError(f"bad index tuple {I}")
            if not isinstance(a, MultiPoly):
                a = MultiPoly.const(ring.vars, a)
            if not a.is_zero():
                out[I] = a
        self.num = out

    @classmethod
    def _raw(cls, ring, p, num, divisor, order):
        w = cls.__new__(cls)
        w.ring = ring
        w.p = p
        w.num = num
        w.divisor = divisor
        w.order = order
        return w

    @classmethod
    def function(cls, ring, f, divisor=None, order=0) -> "DiffForm":
        if isinstance(f, LocalizedElem):
            return cls(ring, 0, {(): f.numerator}, f.divisor, f.order)
        return cls(ring, 0, {(): f}, divisor, order)

    @classmethod
    def zero(cls, ring, p, divisor=None, order=0) -> "DiffForm":
        return cls(ring, p, {}, divisor, order)

    @classmethod
    def dx(cls, ring, *indices) -> "DiffForm":
        s = sort_sign(indices)
        if s == 0:
            return cls.zero(ring, len(indices))
        return cls(ring, len(indices), {tuple(sorted(indices)): MultiPoly.const(ring.vars, s)})

    @property
    def coefficients(self) -> dict:
        return {I: LocalizedElem(self.ring, self.divisor, a, self.order) for I, a in self.num.items()}

    def _same(self, o: "DiffForm"):
        if not self.ring.same_as(o.ring) or self.divisor != o.divisor:
            raise ValueError("ring/divisor mismatch")

    def at_order(self, s: int) -> "DiffForm":
        if s == self.order:
            return self
        if s < self.order:
            raise ValueError("cannot lower the order of a representative")
        f = self.divisor ** (s - self.order)
        return DiffForm._raw(self.ring, self.p, {I: a * f for I, a in self.num.items()},
                             self.divisor, s)

    def is_zero(self) -> bool:
        return self.ring.form_is_zero(self.num, self.p)

    def normalize(self) -> "DiffForm":
        num = {}
        for I, a in self.num.items():
            a = self.ring.normal_form(a) if self.ring.generators else a
            if not a.is_zero():
                num[I] = a
        return DiffForm._raw(self.ring, self.p, num, self.divisor, self.order if num else 0)

    def __add__(self, o: "DiffForm") -> "DiffForm":
        if not isinstance(o, DiffForm):
            return NotImplemented
        self._same(o)
        if o.p != self.p:
            raise ValueError("form degree mismatch")
        s = max(self.order, o.order)
        a, b = self.at_order(s), o.at_order(s)
        num = dict(a.num)
        for I, c in b.num.items():
            t = num.get(I)
            t = c if t is None else t + c
            if t.is_zero():
                num.pop(I, None)
            else:
                num[I] = t
        return DiffForm._raw(self.ring, self.p, num, self.divisor, s)

    def __neg__(self):
        return DiffForm._raw(self.ring, self.p, {I: -a for I, a in self.num.items()},
                             self.divisor, self.order)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c) -> "DiffForm":
        """Multiply by a scalar, a polynomial or a localized function."""
        if isinstance(c, LocalizedElem):
            if c.divisor != self.divisor:
                raise ValueError("divisor mismatch")
            return DiffForm._raw(self.ring, self.p,
                                 _nonzero({I: a * c.numerator for I, a in self.num.items()}),
                                 self.divisor, self.order + c.order)
        return DiffForm._raw(self.ring, self.p, _nonzero({I: a * c for I, a in self.num.items()}),
                             self.divisor, self.order)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def equals(self, o: "DiffForm") -> bool:
        return (self - o).is_zero()

    def __eq__(self, o):
        if not isinstance(o, DiffForm):
            return NotImplemented
        return self.p == o.p and self.equals(o)

    __hash__ = None

    def stamp(self) -> FiltrationStamp:
        return filtration_stamp(self)

    def __repr__(self):
        return format_form(self)


def _nonzero(num: dict) -> dict:
    return {I: a for I, a in num.items() if not a.is_zero()}


def poly_d(ring: AffineRing, num: Mapping) -> dict:
    """Exterior derivative of a polynomial form given as {I: a_I}."""
    out: dict = {}
    n = len(ring.vars)
    for I, a in num.items():
        for k in range(n):
            if k in I:
                continue
            da = a.partial(k)
            if da.is_zero():
                continue
            sign, J = wedge_index((k,), I)
            t = out.get(J)
            t = da * sign if t is None else t + da * sign
            out[J] = t
    return _nonzero(out)


def poly_wedge(a: Mapping, b: Mapping) -> dict:
    out: dict = {}
    for I, x in a.items():
        for J, y in b.items():
            sign, K = wedge_index(I, J)
            if sign == 0:
                continue
            t = x * y
            if sign < 0:
                t = -t
            prev = out.get(K)
            out[K] = t if prev is None else prev + t
    return _nonzero(out)


def exterior_d(w: DiffForm) -> DiffForm:
    ring, g, s = w.ring, w.divisor, w.order
    if s == 0 or g.is_constant():
        return DiffForm._raw(ring, w.p + 1, poly_d(ring, w.num), g, s)
    da = poly_d(ring, w.num)
    dg = poly_d(ring, {(): g})
    lhs = {I: a * g for I, a in da.items()}
    rhs = poly_wedge(dg, w.num)
    out = dict(lhs)
    for I, a in rhs.items():
        t = out.get(I)
        out[I] = -a * s if t is None else t - a * s
    return DiffForm._raw(ring, w.p + 1, _nonzero(out), g, s + 1)


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    a._same(b)
    if a.p + b.p > len(a.ring.vars):
        return DiffForm._raw(a.ring, a.p + b.p, {}, a.divisor, 0)
    return DiffForm._raw(a.ring, a.p + b.p, poly_wedge(a.num, b.num), a.divisor, a.order + b.order)


def restrict(w: DiffForm, extra_divisor: MultiPoly) -> DiffForm:
    if extra_divisor.is_constant() and extra_divisor.constant_value() == 1:
        return w
    f = extra_divisor ** w.order
    return DiffForm._raw(w.ring, w.p, {I: a * f for I, a in w.num.items()},
                         w.divisor * extra_divisor, w.order)


def filtration_stamp(w: DiffForm) -> FiltrationStamp:
    nonzero = [a for a in w.num.values() if not a.is_zero()]
    if not nonzero:
        return FiltrationStamp(0, NEG_INF)
    dg = w.divisor.degree()
    d = max(a.degree() for a in nonzero) - w.order * dg + w.p
    return FiltrationStamp(w.order, d)


def in_stamp(w: DiffForm, s: int, d) -> bool:
    st = filtration_stamp(w)
    return st.order_s <= s and st.degree_d <= d


def format_form(w: DiffForm) -> str:
    """Canonical text: terms (coefficient)*dX_i^dX_j, over divisor^order."""
    parts = []
    for I in sorted(w.num):
        a = w.num[I]
        if a.is_zero():
            continue
        dx = "^".join(f"d{w.ring.vars[i]}" for i in I)
        if not I:
            parts.append(f"({a})")
        else:
            parts.append(f"({a})*{dx}" if str(a) != "1" else dx)
    body = " + ".join(parts) if parts else "0"
    if w.order and not w.divisor.is_constant():
        return f"[{body}] / ({w.divisor})^{w.order}"
    if w.order and w.divisor.constant_value() != 1:
        return f"[{body}] / ({w.divisor})^{w.order}"
    return body


def all_index_tuples(n: int, p: int) -> list:
    return list(combinations(range(n), p))


def form_monomials(n: int, p: int, degree: int) -> list:
    """Keys (I, m) of monomial p-forms with deg m + p <= degree."""
    if degree - p < 0:
        return []
    monos = monomials_up_to(n, degree - p)
    return [(I, m) for I in all_index_tuples(n, p) for m in monos]


def form_keyed(num: Mapping) -> dict:
    """{(I, monomial): coeff} from {I: poly}."""
    out = {}
    for I, a in num.items():
        for m, c in a.terms.items():
            out[(I, m)] = c
    return out


def keyed_form(vars, keyed: Mapping) -> dict:
    out: dict = {}
    for (I, m), c in keyed.items():
        out.setdefault(I, {})[m] = c
    return {I: MultiPoly._raw(tuple(vars), t) for I, t in out.items()}


def form_key_desc(key):
    I, m = key
    return (-(sum(m) + len(I)), tuple(-e for e in m), I)
