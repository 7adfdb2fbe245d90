"""Nullstellensatz certificates and component idempotents.

A certificate for g_1..g_t on X is a list of cofactors h_i with
sum h_i g_i = 1 modulo I(X).  The search grows the degree window
deg(h_i g_i) <= delta one step at a time and keeps a single tracked echelon,
so the first feasible delta is also the smallest one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .exactpoly import MultiPoly, monomials_of_degree, monomials_up_to
from .linsolve import Echelon
from .ring import AffineRing, polynomial_ring


class CertificateNotFound(RuntimeError):
    pass


def ns_bound(D: int, d: int, t: int, m: int, n: int) -> int:
    """Degree bound for deg(h_i g_i) from the effective Nullstellensatz."""
    if d < 1:
        raise ValueError("input degree d must be at least 1")
    if t <= m:
        return D * d ** t
    if d >= 3 and m >= n - 1:
        return D * d ** m
    return 2 * D * d ** m - 1


def ns_branches(D: int, d: int, t: int, m: int, n: int) -> dict:
    if d < 1:
        raise ValueError("input degree d must be at least 1")
    return {"t<=m": D * d ** t, "t>m,d>=3,m>=n-1": D * d ** m, "else": 2 * D * d ** m - 1,
            "selected": ns_bound(D, d, t, m, n)}


@dataclass
class Certificate:
    cofactors: list
    generators: list
    achieved_degree: int
    bound_used: int
    minimal: bool = True

    def combination(self) -> MultiPoly:
        acc = self.generators[0].zero()
        for h, g in zip(self.cofactors, self.generators):
            acc = acc + h * g
        return acc


class _Columns:
    """Monomial -> column, numbered in order of first appearance."""

    def __init__(self):
        self.col: dict = {}

    def vec(self, terms) -> dict:
        out = {}
        for m, c in terms.items():
            j = self.col.get(m)
            if j is None:
                j = self.col[m] = len(self.col)
            out[j] = c
        return out


def _reducer(ring: AffineRing):
    """Map a polynomial to the vector we feed the echelon, plus whether the
    ideal has to enter as explicit cofactor columns."""
    if not ring.generators:
        return (lambda f: f.terms), False
    if ring.strategy != "none" and ring.strategy[0] == "monic" and len(ring.generators) == 1:
        return (lambda f: ring.normal_form(f).terms), False
    return (lambda f: f.terms), True


def find_certificate(ring: AffineRing, gs: Sequence[MultiPoly], degree_cap: int,
                     bound: int | None = None) -> Certificate:
    """Smallest-delta cofactors with sum h_i g_i = 1 mod I and deg(h_i g_i) <= delta."""
    gs = [g if g.vars == ring.vars else g.embed(ring.vars) for g in gs]
    if not gs or any(g.is_zero() for g in gs):
        raise ValueError("generators must be nonzero")
    if degree_cap < 0:
        raise ValueError("degree cap must be nonnegative")
    n = len(ring.vars)
    image, with_ideal = _reducer(ring)
    cols = _Columns()
    e = Echelon(track=True)
    target = cols.vec(ring.one().terms)
    gdeg = [int(g.degree()) for g in gs]
    extra = ring.max_gen_degree
    ideal_done = -1
    for delta in range(degree_cap + 1):
        for i, g in enumerate(gs):
            k = delta - gdeg[i]
            if k < 0:
                continue
            for m in monomials_of_degree(n, k):
                mono = MultiPoly._raw(ring.vars, {m: mpq(1)})
                e.add(cols.vec(image(mono * g)), ("h", i, m))
        if with_ideal:
            top = delta + extra
            for j, f in enumerate(ring.generators):
                lo = max(0, ideal_done + 1 - int(f.degree()))
                for k in range(lo, top - int(f.degree()) + 1):
                    for m in monomials_of_degree(n, k):
                        mono = MultiPoly._raw(ring.vars, {m: mpq(1)})
                        e.add(cols.vec((mono * f).terms), ("I", j, m))
            ideal_done = top
        sol = e.express(target)
        if sol is None:
            continue
        cof = [dict() for _ in gs]
        for label, c in sol.items():
            if label[0] == "h":
                cof[label[1]][label[2]] = c
        hs = [MultiPoly(ring.vars, t) for t in cof]
        cert = Certificate(hs, list(gs), 0, bound if bound is not None else degree_cap)
        comb = cert.combination()
        if not ring.is_zero(comb - 1):
            raise AssertionError("certificate failed exact recomposition")
        cert.achieved_degree = max((int((h * g).degree()) for h, g in zip(hs, gs) if not h.is_zero()),
                                   default=0)
        return cert
    raise CertificateNotFound(f"no certificate with deg(h_i g_i) <= {degree_cap}")


def verify_certificate(ring: AffineRing, cert: Certificate) -> bool:
    return ring.is_zero(cert.combination() - 1)


# idempotents


@dataclass
class IdempotentSet:
    idempotents: list
    component_generators: list
    method: str
    degrees: list = field(default_factory=list)
    bound: int | None = None
    pair_degrees: dict = field(default_factory=dict)

    @property
    def max_degree(self) -> int:
        return max(self.degrees, default=0)


def _component_ring(vars, gens) -> AffineRing:
    return AffineRing(vars, gens) if gens else polynomial_ring(vars)


def verify_idempotents(vars, components: Sequence[Sequence[MultiPoly]], es: Sequence[MultiPoly]) -> bool:
    """e_i e_j = delta_ij e_i and sum e_i = 1, checked on every component ring."""
    rings = [_component_ring(vars, c) for c in components]
    total = sum(es[1:], es[0])
    for R in rings:
        if not R.is_zero(total - 1):
            return False
        for i, ei in enumerate(es):
            if not R.is_zero(ei * ei - ei):
                return False
            for j in range(i + 1, len(es)):
                if not R.is_zero(ei * es[j]):
                    return False
    return True


def _prep(components):
    comps = [list(c) for c in components]
    vars = None
    for c in comps:
        for g in c:
            vars = g.vars if vars is None else vars
    if vars is None:
        raise ValueError("at least one component needs a generator to fix the variables")
    return vars, [[g.embed(vars) if g.vars != vars else g for g in c] for c in comps]


def idempotents_jelonek(components: Sequence) -> IdempotentSet:
    """Components are (generators, degree D_i, dim m_i); e_i is a product of
    pairwise certificates phi_ij = 1 on Z_i, 0 on Z_j."""
    gens_list = [c[0] for c in components]
    vars, gens_list = _prep(gens_list)
    t = len(gens_list)
    one = MultiPoly.const(vars, 1)
    if t == 1:
        return IdempotentSet([one], gens_list, "jelonek", [0], 0)
    n = len(vars)
    Ds = [c[1] for c in components]
    ms = [c[2] for c in components]
    D = sum(Ds)
    m = max(ms)
    phi = {}
    pair = {}
    for i in range(t):
        Ri = _component_ring(vars, gens_list[i])
        for j in range(t):
            if i == j:
                continue
            gj = gens_list[j]
            dj = max(int(g.degree()) for g in gj)
            cap = max(ns_bound(Ds[i], max(dj, 1), len(gj), ms[i], n), 2 * Ds[i] * Ds[j] ** ms[i])
            try:
                cert = find_certificate(Ri, gj, cap)
            except CertificateNotFound as exc:
                raise CertificateNotFound(f"components {i} and {j} likely intersect: {exc}") from None
            phi[(i, j)] = cert.combination()
            pair[(i, j)] = cert.achieved_degree
    es = []
    for i in range(t):
        e = one
        for j in range(t):
            if j != i:
                e = e * phi[(i, j)]
        es.append(e)
    if not verify_idempotents(vars, gens_list, es):
        raise AssertionError("idempotent identities failed")
    return IdempotentSet(es, gens_list, "jelonek", [int(e.degree()) for e in es], D ** (m + 1), pair)


def split_unit(vars, a_gens: Sequence[MultiPoly], b_gens: Sequence[MultiPoly], degree_cap: int):
    """phi in (a_gens), psi in (b_gens) with phi + psi = 1, smallest degree first."""
    n = len(vars)
    cols = _Columns()
    e = Echelon(track=True)
    target = cols.vec(MultiPoly.const(vars, 1).terms)
    blocks = [("a", a_gens), ("b", b_gens)]
    for delta in range(degree_cap + 1):
        for tag, gens in blocks:
            for j, g in enumerate(gens):
                k = delta - int(g.degree())
                if k < 0:
                    continue
                for m in monomials_of_degree(n, k):
                    e.add(cols.vec(_shifted(g, m)), (tag, j, m))
        sol = e.express(target)
        if sol is None:
            continue
        parts = {"a": MultiPoly.const(vars, 0), "b": MultiPoly.const(vars, 0)}
        for (tag, j, m), c in sol.items():
            gens = a_gens if tag == "a" else b_gens
            parts[tag] = parts[tag] + MultiPoly._raw(tuple(vars), {m: c}) * gens[j]
        phi, psi = parts["a"], parts["b"]
        if phi + psi != MultiPoly.const(vars, 1):
            raise AssertionError("split failed exact recomposition")
        return phi, psi, delta
    raise CertificateNotFound(f"no split of 1 up to degree {degree_cap}")


def _shifted(g: MultiPoly, m) -> dict:
    return {tuple(a + b for a, b in zip(k, m)): c for k, c in g.terms.items()}


def idempotents_kollar(components: Sequence, degrees: Sequence[int] | None = None) -> IdempotentSet:
    """Components are generator lists; pairwise splits 1 = phi_ij + psi_ij with
    phi_ij in I(Z_i), psi_ij in I(Z_j)."""
    vars, gens_list = _prep(components)
    t = len(gens_list)
    n = len(vars)
    one = MultiPoly.const(vars, 1)
    if t == 1:
        return IdempotentSet([one], gens_list, "kollar", [0], 0)
    if degrees is None:
        degrees = [_degree_guess(g) for g in gens_list]
    D = sum(degrees)
    phi, psi, pair = {}, {}, {}
    for i in range(t):
        for j in range(i + 1, t):
            cap = (n + 1) * degrees[i] * degrees[j]
            a, b, delta = split_unit(vars, gens_list[i], gens_list[j], cap)
            phi[(i, j)], psi[(i, j)], pair[(i, j)] = a, b, delta
    es = []
    for i in range(t):
        e = one
        for j in range(i):
            e = e * phi[(j, i)]
        for j in range(i + 1, t):
            e = e * psi[(i, j)]
        es.append(e)
    if not verify_idempotents(vars, gens_list, es):
        raise AssertionError("idempotent identities failed")
    return IdempotentSet(es, gens_list, "kollar", [int(e.degree()) for e in es],
                         (n + 1) * D * D // 4, pair)


def _degree_guess(gens: Sequence[MultiPoly]) -> int:
    """Product of generator degrees: a Bezout upper bound for the degree."""
    out = 1
    for g in gens:
        out *= max(int(g.degree()), 1)
    return out
