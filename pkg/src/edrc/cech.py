"""Cech complexes of differential forms over principal-open covers.

An entry of a q-cochain lives on U_I for an increasing tuple I of length q+1
and is a DiffForm over the divisor g_I = prod_{i in I} g_i.  The explicit
contracting step uses a certificate sum h_i g_i^s = 1 on X:

    eta_I = sum_i h_i g_i^s w_{iI}

with w_{iI} = sign * w_{sorted(i, I)}.  Then delta(eta) = w for every closed w
whose entries have order <= s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

from .certificates import Certificate, find_certificate
from .exactpoly import MultiPoly
from .ring import (AffineRing, DiffForm, FiltrationStamp, exterior_d,
                   filtration_stamp, restrict, sort_sign)


class NotClosed(ValueError):
    pass


def lemma51_N(D: int, s: int, d1: int, m: int) -> int:
    return 2 * D * (s * d1) ** m


@dataclass
class Cover:
    ring: AffineRing
    divisors: list
    degree_D: int
    dim_m: int
    certificate: Certificate | None = None
    _certs: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.divisors = [g if g.vars == self.ring.vars else g.embed(self.ring.vars)
                         for g in self.divisors]
        self._div: dict = {}

    @property
    def t(self) -> int:
        return len(self.divisors) - 1

    @property
    def d1(self) -> int:
        return max(max(int(g.degree()), 0) for g in self.divisors)

    def divisor(self, I: Sequence[int]) -> MultiPoly:
        I = tuple(I)
        if I not in self._div:
            acc = self.ring.one()
            for i in I:
                acc = acc * self.divisors[i]
            self._div[I] = acc
        return self._div[I]

    def simplices(self, q: int) -> list:
        if q < 0:
            return [()]
        return list(combinations(range(self.t + 1), q + 1))

    def bound_N(self, s: int) -> int:
        return lemma51_N(self.degree_D, max(s, 1), max(self.d1, 1), self.dim_m)

    def partition(self, s: int) -> Certificate:
        """Cofactors with sum h_i g_i^s = 1 on X, cached per order."""
        s = max(s, 1)
        if s not in self._certs:
            gs = [g ** s for g in self.divisors]
            cert = find_certificate(self.ring, gs, self.bound_N(s))
            self._certs[s] = cert
            if s == 1 and self.certificate is None:
                self.certificate = cert
        return self._certs[s]

    def certify(self) -> Certificate:
        return self.partition(1)


@dataclass
class CechCochain:
    q: int
    p: int
    entries: dict

    def entry(self, cover: Cover, I) -> DiffForm:
        I = tuple(I)
        w = self.entries.get(I)
        if w is None:
            return DiffForm.zero(cover.ring, self.p, cover.divisor(I))
        return w

    def is_zero(self) -> bool:
        return all(w.is_zero() for w in self.entries.values())

    def stamp(self) -> FiltrationStamp:
        st = [filtration_stamp(w) for w in self.entries.values() if w.num]
        if not st:
            return FiltrationStamp(0, float("-inf"))
        return FiltrationStamp(max(x.order_s for x in st), max(x.degree_d for x in st))

    def __add__(self, o: "CechCochain") -> "CechCochain":
        if (self.q, self.p) != (o.q, o.p):
            raise ValueError("cochain shape mismatch")
        out = dict(self.entries)
        for I, w in o.entries.items():
            out[I] = out[I] + w if I in out else w
        return CechCochain(self.q, self.p, out)

    def __neg__(self):
        return CechCochain(self.q, self.p, {I: -w for I, w in self.entries.items()})

    def __sub__(self, o):
        return self + (-o)


def zero_cochain(cover: Cover, q: int, p: int) -> CechCochain:
    return CechCochain(q, p, {})


def cech_d(cover: Cover, c: CechCochain) -> CechCochain:
    out = {}
    for J in cover.simplices(c.q + 1):
        acc = None
        for nu in range(len(J)):
            I = J[:nu] + J[nu + 1:]
            w = c.entries.get(I)
            if w is None or not w.num:
                continue
            r = restrict(w, cover.divisors[J[nu]])
            if nu & 1:
                r = -r
            acc = r if acc is None else acc + r
        if acc is not None and acc.num:
            out[J] = acc
    return CechCochain(c.q + 1, c.p, out)


def cochain_d(c: CechCochain) -> CechCochain:
    return CechCochain(c.q, c.p + 1, {I: exterior_d(w) for I, w in c.entries.items()})


def cocycle_preimage(cover: Cover, w: CechCochain, s: int, check: bool = True) -> CechCochain:
    """eta with delta(eta) = w.  For w at level 0 this glues the entries into a
    global form, returned as a level -1 cochain with the single key ()."""
    if w.q < 0:
        raise ValueError("nothing below level -1")
    if check and w.q < cover.t and not cech_d(cover, w).is_zero():
        raise NotClosed("cochain is not a Cech cocycle")
    for x in w.entries.values():
        if x.num and x.order > s:
            raise ValueError(f"entry order {x.order} exceeds s = {s}")
    q = w.q - 1
    s = max(s, 1)
    if not any(x.num for x in w.entries.values()):
        return CechCochain(q, w.p, {})
    cert = cover.partition(s)
    hs = cert.cofactors
    out = {}
    for I in cover.simplices(q):
        num: dict = {}
        for i, h in enumerate(hs):
            if h.is_zero() or i in I:
                continue
            J = tuple(sorted((i,) + I))
            x = w.entries.get(J)
            if x is None or not x.num:
                continue
            eps = sort_sign((i,) + I)
            a = x.at_order(s).num
            # h_i g_i^s * a / (g_i g_I)^s = h_i a / g_I^s
            for K, coef in a.items():
                t = coef * h * eps
                num[K] = num[K] + t if K in num else t
        num = {K: a for K, a in num.items() if not a.is_zero()}
        if num:
            out[I] = DiffForm._raw(cover.ring, w.p, num, cover.divisor(I), s if q >= 0 else 0)
    eta = CechCochain(q, w.p, out)
    if check:
        _check_contract(cover, w, eta, s)
    return eta


def _check_contract(cover: Cover, w: CechCochain, eta: CechCochain, s: int):
    if eta.q >= 0:
        diff = cech_d(cover, eta) - w
        if not diff.is_zero():
            raise AssertionError("delta(eta) != w")
    else:
        g = eta.entries.get(())
        for (i,), x in w.entries.items():
            if g is None:
                if not x.is_zero():
                    raise AssertionError("gluing lost a nonzero entry")
                continue
            if not (restrict(g, cover.divisors[i]) - x).is_zero():
                raise AssertionError("glued form disagrees with an entry")
    ws, es = w.stamp(), eta.stamp()
    N = cover.bound_N(s)
    if es.order_s > s or es.degree_d > ws.degree_d + N:
        raise AssertionError(f"stamp {es} exceeds ({s}, {ws.degree_d} + {N})")


def glue(cover: Cover, c: CechCochain, s: int, check: bool = True) -> DiffForm:
    """Global form agreeing with a level-0 cocycle."""
    eta = cocycle_preimage(cover, c, s, check)
    g = eta.entries.get(())
    if g is None:
        return DiffForm.zero(cover.ring, c.p)
    return g


# total complex


@dataclass
class TotalCochain:
    level: int
    cells: dict

    def cell(self, q: int) -> CechCochain:
        c = self.cells.get(q)
        return c if c is not None else CechCochain(q, self.level - q, {})

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.cells.values())

    def __add__(self, o: "TotalCochain") -> "TotalCochain":
        if self.level != o.level:
            raise ValueError("level mismatch")
        out = dict(self.cells)
        for q, c in o.cells.items():
            out[q] = out[q] + c if q in out else c
        return TotalCochain(self.level, out)

    def __neg__(self):
        return TotalCochain(self.level, {q: -c for q, c in self.cells.items()})

    def __sub__(self, o):
        return self + (-o)

    def stamp(self) -> FiltrationStamp:
        st = [c.stamp() for c in self.cells.values() if c.entries]
        if not st:
            return FiltrationStamp(0, float("-inf"))
        return FiltrationStamp(max(x.order_s for x in st), max(x.degree_d for x in st))


def total_d(cover: Cover, c: TotalCochain) -> TotalCochain:
    out: dict = {}
    n = len(cover.ring.vars)
    for q, cell in c.cells.items():
        if q + 1 <= cover.t:
            dq = cech_d(cover, cell)
            out[q + 1] = out[q + 1] + dq if q + 1 in out else dq
        if cell.p + 1 <= n:
            dd = cochain_d(cell)
            if q & 1:
                dd = -dd
            out[q] = out[q] + dd if q in out else dd
    return TotalCochain(c.level + 1, out)


def embed_global(cover: Cover, alpha: DiffForm) -> TotalCochain:
    cell = CechCochain(0, alpha.p, {(i,): restrict(alpha, g) for i, g in enumerate(cover.divisors)})
    return TotalCochain(alpha.p, {0: cell})


@dataclass
class ZigzagResult:
    form: DiffForm
    chain: TotalCochain
    steps: list

    def stamp(self) -> FiltrationStamp:
        return filtration_stamp(self.form)


def thm53_bound(d: int, D: int, l: int, s: int, m: int, d1: int) -> int:
    return d + 2 * D * (l + 1) * (s + l) ** m * d1 ** m


def zigzag_collapse(cover: Cover, c: TotalCochain, check: bool = True) -> ZigzagResult:
    """Move a closed total cochain into the bottom row and glue it.

    Returns alpha with c - embed(alpha) = total_d(chain)."""
    l = c.level
    if check and not total_d(cover, c).is_zero():
        raise NotClosed("total cochain is not closed")
    cur = c
    chain = TotalCochain(l - 1, {})
    steps = []
    top = min(l, cover.t)
    for q in range(top, 0, -1):
        cell = cur.cell(q)
        if not any(w.num for w in cell.entries.values()):
            continue
        s = max(w.order for w in cell.entries.values() if w.num)
        eta = cocycle_preimage(cover, cell, s, check)
        piece = TotalCochain(l - 1, {q - 1: eta})
        cur = cur - total_d(cover, piece)
        cur.cells.pop(q, None)
        chain = chain + piece
        steps.append((q, eta.stamp()))
    base = cur.cell(0)
    s = max([w.order for w in base.entries.values() if w.num], default=0)
    alpha = glue(cover, base, s, check)
    if check:
        if alpha.p + 1 <= len(cover.ring.vars) and not exterior_d(alpha).is_zero():
            raise AssertionError("glued form is not closed")
        wit = c - embed_global(cover, alpha) - total_d(cover, chain) if chain.cells else \
            c - embed_global(cover, alpha)
        if not wit.is_zero():
            raise AssertionError("zig-zag exactness witness failed")
    return ZigzagResult(alpha, chain, steps)
