"""Sparse multivariate polynomials over the rationals.

A polynomial is a map from exponent tuples to nonzero rationals.  The
coefficient type is ``gmpy2.mpq``, which is always kept in lowest terms with
a positive denominator.  Polynomials are treated as immutable values.

Text form follows a small grammar: identifiers, integer and ``p/q``
literals, the operators ``+ - * ^`` and parentheses.  Multiplication must be
written out; ``2x`` is rejected with a diagnostic that names the line and
column.  Printing is canonical (graded lex, explicit ``*`` and ``^``) so that
equal polynomials always print identically.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

Scalar = mpq
NEG_INF = float("-inf")


def scalar(x) -> mpq:
    return mpq(x)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


# raw dict helpers; monomials are tuples of exponents


def _add_into(acc: dict, terms: Mapping, c=1) -> dict:
    if c == 1:
        for m, v in terms.items():
            w = acc.get(m)
            if w is None:
                acc[m] = v
            else:
                w = w + v
                if w:
                    acc[m] = w
                else:
                    del acc[m]
    else:
        for m, v in terms.items():
            w = acc.get(m, 0) + c * v
            if w:
                acc[m] = w
            else:
                acc.pop(m, None)
    return acc


def _mul(a: Mapping, b: Mapping) -> dict:
    if len(a) > len(b):
        a, b = b, a
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            w = out.get(m)
            if w is None:
                out[m] = ca * cb
            else:
                out[m] = w + ca * cb
    return {m: c for m, c in out.items() if c}


def _deg(terms: Mapping):
    if not terms:
        return NEG_INF
    return max(sum(m) for m in terms)


class MultiPoly:
    """Exact polynomial in a fixed, ordered list of variables."""

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, vars: Sequence[str], terms: Mapping | None = None):
        self.vars = tuple(vars)
        if terms is None:
            self.terms = {}
        else:
            self.terms = {m: mpq(c) for m, c in terms.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, vars, terms):
        p = cls.__new__(cls)
        p.vars = vars
        p.terms = terms
        p._hash = None
        return p

    # constructors
    @classmethod
    def const(cls, vars, c) -> "MultiPoly":
        vars = tuple(vars)
        c = mpq(c)
        return cls._raw(vars, {(0,) * len(vars): c} if c else {})

    @classmethod
    def var(cls, vars, name_or_index) -> "MultiPoly":
        vars = tuple(vars)
        i = name_or_index if isinstance(name_or_index, int) else vars.index(name_or_index)
        m = tuple(1 if j == i else 0 for j in range(len(vars)))
        return cls._raw(vars, {m: mpq(1)})

    @classmethod
    def monomial(cls, vars, exps, c=1) -> "MultiPoly":
        return cls(vars, {tuple(exps): c})

    def zero(self) -> "MultiPoly":
        return MultiPoly._raw(self.vars, {})

    def one(self) -> "MultiPoly":
        return MultiPoly.const(self.vars, 1)

    # basic queries
    @property
    def nvars(self) -> int:
        return len(self.vars)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def degree(self):
        return _deg(self.terms)

    def degree_in(self, i: int):
        if not self.terms:
            return NEG_INF
        return max(m[i] for m in self.terms)

    def is_constant(self) -> bool:
        z = (0,) * len(self.vars)
        return not self.terms or (len(self.terms) == 1 and z in self.terms)

    def constant_value(self) -> mpq:
        return self.terms.get((0,) * len(self.vars), mpq(0))

    def _check(self, other: "MultiPoly"):
        if other.vars != self.vars:
            raise ValueError(f"ambient mismatch: {self.vars} vs {other.vars}")

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            self._check(other)
            return other
        return MultiPoly.const(self.vars, other)

    # arithmetic
    def __add__(self, other):
        other = self._coerce(other)
        return MultiPoly._raw(self.vars, _add_into(dict(self.terms), other.terms))

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly._raw(self.vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        return MultiPoly._raw(self.vars, _add_into(dict(self.terms), other.terms, -1))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            self._check(other)
            return MultiPoly._raw(self.vars, _mul(self.terms, other.terms))
        c = mpq(other)
        if not c:
            return self.zero()
        return MultiPoly._raw(self.vars, {m: v * c for m, v in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = mpq(other)
        if not c:
            raise ZeroDivisionError("division by zero scalar")
        return self * (1 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = self.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.vars == other.vars and self.terms == other.terms
        try:
            c = mpq(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == ({(0,) * len(self.vars): c} if c else {})

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self.terms.items())))
        return self._hash

    # calculus and evaluation
    def partial(self, i: int) -> "MultiPoly":
        out = {}
        for m, c in self.terms.items():
            e = m[i]
            if e:
                mm = m[:i] + (e - 1,) + m[i + 1:]
                out[mm] = c * e
        return MultiPoly._raw(self.vars, out)

    def evaluate(self, point: Sequence) -> mpq:
        pt = [mpq(x) for x in point]
        total = mpq(0)
        for m, c in self.terms.items():
            t = c
            for x, e in zip(pt, m):
                if e:
                    t *= x ** e
            total += t
        return total

    def coefficients_in(self, i: int) -> dict:
        """Split as a polynomial in variable i: exponent -> coefficient poly."""
        out: dict = {}
        for m, c in self.terms.items():
            e = m[i]
            mm = m[:i] + (0,) + m[i + 1:]
            out.setdefault(e, {})[mm] = c
        return {e: MultiPoly._raw(self.vars, t) for e, t in out.items()}

    def leading_coefficient_in(self, i: int) -> "MultiPoly":
        if not self.terms:
            return self.zero()
        return self.coefficients_in(i)[self.degree_in(i)]

    def homogeneous_part(self, k: int) -> "MultiPoly":
        return MultiPoly._raw(self.vars, {m: c for m, c in self.terms.items() if sum(m) == k})

    def compose(self, values: Sequence["MultiPoly"]) -> "MultiPoly":
        """Substitute values[i] for variable i (all values share one ambient)."""
        if len(values) != len(self.vars):
            raise ValueError("need one value per variable")
        if not self.terms:
            return MultiPoly._raw(values[0].vars if values else (), {})
        target = values[0].vars
        for v in values:
            if v.vars != target:
                raise ValueError("substituted values must share variables")
        powers = [dict() for _ in values]

        def power(i, e):
            cache = powers[i]
            if e not in cache:
                if e == 0:
                    cache[e] = {(0,) * len(target): mpq(1)}
                elif e == 1:
                    cache[e] = values[i].terms
                else:
                    cache[e] = _mul(power(i, e - 1), values[i].terms)
            return cache[e]

        acc: dict = {}
        for m, c in self.terms.items():
            t = {(0,) * len(target): c}
            for i, e in enumerate(m):
                if e:
                    t = _mul(t, power(i, e))
            _add_into(acc, t)
        return MultiPoly._raw(target, acc)

    def rename(self, vars: Sequence[str]) -> "MultiPoly":
        if len(vars) != len(self.vars):
            raise ValueError("variable count mismatch")
        return MultiPoly._raw(tuple(vars), dict(self.terms))

    def embed(self, vars: Sequence[str]) -> "MultiPoly":
        """View the polynomial in a larger variable list containing ours."""
        vars = tuple(vars)
        idx = [vars.index(v) for v in self.vars]
        out = {}
        for m, c in self.terms.items():
            mm = [0] * len(vars)
            for j, e in zip(idx, m):
                mm[j] = e
            out[tuple(mm)] = c
        return MultiPoly._raw(vars, out)

    def restrict_vars(self, vars: Sequence[str]) -> "MultiPoly":
        """Inverse of embed; fails if a dropped variable occurs."""
        vars = tuple(vars)
        idx = [self.vars.index(v) for v in vars]
        keep = set(idx)
        out = {}
        for m, c in self.terms.items():
            if any(e for j, e in enumerate(m) if j not in keep):
                raise ValueError("polynomial involves a dropped variable")
            out[tuple(m[j] for j in idx)] = c
        return MultiPoly._raw(vars, out)

    # printing
    def sorted_monomials(self) -> list:
        return sorted(self.terms, key=lambda m: (sum(m), m), reverse=True)

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"MultiPoly({format_poly(self)!r}, vars={self.vars})"


def format_monomial(vars, m) -> str:
    parts = []
    for name, e in zip(vars, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_poly(p: MultiPoly) -> str:
    if not p.terms:
        return "0"
    out = []
    for k, m in enumerate(p.sorted_monomials()):
        c = p.terms[m]
        neg = c < 0
        a = -c if neg else c
        mon = format_monomial(p.vars, m)
        if not mon:
            body = str(a)
        elif a == 1:
            body = mon
        else:
            body = f"{a}*{mon}"
        if k == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([a-zA-Z][a-zA-Z0-9_]*)|(\S))")


def _tokenize(text: str):
    toks = []
    line, col0 = 1, 0
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        # account for newlines in skipped whitespace
        for k in range(pos, m.start(m.lastindex)):
            if text[k] == "\n":
                line += 1
                col0 = k + 1
        start = m.start(m.lastindex)
        col = start - col0 + 1
        if m.group(1) is not None:
            toks.append(("num", m.group(1), line, col))
        elif m.group(2) is not None:
            toks.append(("id", m.group(2), line, col))
        else:
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ParseError(f"unexpected character {ch!r}", line, col)
            toks.append(("op", ch, line, col))
        pos = m.end()
    end_line = text.count("\n") + 1
    end_col = len(text) - (text.rfind("\n") + 1) + 1
    toks.append(("end", "", end_line, end_col))
    for a, b in zip(toks, toks[1:]):
        if a[0] == "num" and b[0] == "id" and a[2] == b[2] and b[3] == a[3] + len(a[1]):
            raise ParseError("implicit multiplication is not allowed; write '*'", b[2], b[3])
    return toks


class _Parser:
    def __init__(self, text: str, vars: Sequence[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = tuple(vars)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def expect(self, op):
        t = self.peek()
        if t[0] != "op" or t[1] != op:
            self.fail(f"expected {op!r}")
        self.take()

    def parse(self) -> MultiPoly:
        p = self.expr()
        t = self.peek()
        if t[0] != "end":
            if t[0] in ("id", "num") or t[1] == "(":
                self.fail("missing operator (implicit multiplication is not allowed)")
            self.fail(f"unexpected token {t[1]!r}")
        return p

    def expr(self) -> MultiPoly:
        p = self.term()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.take()
                q = self.term()
                p = p + q if t[1] == "+" else p - q
            else:
                return p

    def term(self) -> MultiPoly:
        p = self.unary()
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] == "*":
                self.take()
                p = p * self.unary()
            elif t[0] == "op" and t[1] == "/":
                self.take()
                tok = self.peek()
                q = self.unary()
                if not q.is_constant() or q.is_zero():
                    self.fail("division only by a nonzero rational constant", tok)
                p = p * (1 / q.constant_value())
            else:
                return p

    def unary(self) -> MultiPoly:
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            p = self.unary()
            return -p if t[1] == "-" else p
        return self.power()

    def power(self) -> MultiPoly:
        base = self.atom()
        t = self.peek()
        if t[0] == "op" and t[1] == "^":
            self.take()
            e = self.peek()
            if e[0] != "num":
                self.fail("exponent must be a non-negative integer literal")
            self.take()
            return base ** int(e[1])
        return base

    def atom(self) -> MultiPoly:
        t = self.take()
        if t[0] == "num":
            return MultiPoly.const(self.vars, int(t[1]))
        if t[0] == "id":
            if t[1] not in self.vars:
                raise ParseError(f"unknown variable {t[1]!r}", t[2], t[3])
            return MultiPoly.var(self.vars, t[1])
        if t[0] == "op" and t[1] == "(":
            p = self.expr()
            self.expect(")")
            return p
        if t[0] == "end":
            raise ParseError("unexpected end of input", t[2], t[3])
        raise ParseError(f"unexpected token {t[1]!r}", t[2], t[3])


def identifiers(text: str) -> list:
    """Variable names occurring in text, sorted."""
    return sorted({t[1] for t in _tokenize(text) if t[0] == "id"})


def parse_poly(text: str, vars: Sequence[str] | None = None) -> MultiPoly:
    if vars is None:
        vars = identifiers(text)
    return _Parser(text, vars).parse()


def poly(text: str, vars: Sequence[str]) -> MultiPoly:
    return parse_poly(text, vars)


# operations named by the module contract


def arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    a._check(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def partial_derivative(f: MultiPoly, var: int) -> MultiPoly:
    if not 0 <= var < f.nvars:
        raise IndexError("variable index out of range")
    return f.partial(var)


def monic_division(f: MultiPoly, g: MultiPoly, var: int):
    """Divide f by g, monic in variable var: f = q*g + r, deg_var r < deg_var g."""
    f._check(g)
    if g.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    k = g.degree_in(var)
    lc = g.leading_coefficient_in(var)
    if lc != 1:
        raise ValueError("divisor is not monic in the given variable")
    # tail of g: g = var^k + tail
    tail = {m: c for m, c in g.terms.items() if m[var] < k}
    r = dict(f.terms)
    q: dict = {}
    while True:
        top = [m for m in r if m[var] >= k]
        if not top:
            break
        e = max(m[var] for m in top)
        # move all terms of degree e in var at once
        chunk = {m: r[m] for m in top if m[var] == e}
        shift = {m[:var] + (e - k,) + m[var + 1:]: c for m, c in chunk.items()}
        _add_into(q, shift)
        for m in chunk:
            del r[m]
        _add_into(r, _mul(shift, tail), -1)
    return MultiPoly._raw(f.vars, q), MultiPoly._raw(f.vars, r)


def exact_quotient(f: MultiPoly, g: MultiPoly) -> MultiPoly | None:
    """f/g if g divides f in the polynomial ring, else None."""
    f._check(g)
    if g.is_zero():
        raise ZeroDivisionError
    key = lambda m: (sum(m), m)
    lm_g = max(g.terms, key=key)
    lc_g = g.terms[lm_g]
    r = dict(f.terms)
    q: dict = {}
    while r:
        lm = max(r, key=key)
        diff = tuple(a - b for a, b in zip(lm, lm_g))
        if min(diff) < 0:
            return None
        c = r[lm] / lc_g
        q[diff] = c
        _add_into(r, _mul({diff: c}, g.terms), -1)
    return MultiPoly._raw(f.vars, q)


def linear_substitution(matrix: Sequence[Sequence], vars: Sequence[str]) -> list:
    """Images x_i -> sum_j M[i][j] x_j as polynomials."""
    n = len(vars)
    out = []
    for i in range(n):
        t = {}
        for j in range(n):
            c = mpq(matrix[i][j])
            if c:
                t[tuple(1 if k == j else 0 for k in range(n))] = c
        out.append(MultiPoly._raw(tuple(vars), t))
    return out


def matrix_inverse(matrix: Sequence[Sequence]) -> list:
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    a = [[mpq(x) for x in row] + [mpq(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(matrix)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c]), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c]:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def random_linear_change(f: MultiPoly, matrix: Sequence[Sequence]) -> MultiPoly:
    """Compose f with x_i -> sum_j M[i][j] x_j."""
    if len(matrix) != f.nvars:
        raise ValueError("matrix size must equal the number of variables")
    matrix_inverse(matrix)  # raises on singular input
    return f.compose(linear_substitution(matrix, f.vars))


def monomials_up_to(nvars: int, degree: int) -> list:
    """All exponent tuples of total degree <= degree, ascending by degree."""
    out = []
    for d in range(degree + 1):
        out.extend(monomials_of_degree(nvars, d))
    return out


def monomials_of_degree(nvars: int, d: int) -> list:
    if nvars == 0:
        return [()] if d == 0 else []
    if nvars == 1:
        return [(d,)]
    out = []
    for first in range(d, -1, -1):
        for rest in monomials_of_degree(nvars - 1, d - first):
            out.append((first,) + rest)
    return out


def random_poly(rng, vars: Sequence[str], degree: int, density: float = 0.5,
                coeff_range: int = 5) -> MultiPoly:
    terms = {}
    for m in monomials_up_to(len(vars), degree):
        if rng.random() < density:
            c = rng.randint(-coeff_range, coeff_range)
            if c:
                terms[m] = c
    return MultiPoly(vars, terms)


def sum_polys(polys: Iterable[MultiPoly], vars: Sequence[str]) -> MultiPoly:
    acc: dict = {}
    for p in polys:
        _add_into(acc, p.terms)
    return MultiPoly._raw(tuple(vars), acc)


def grlex_key(m):
    return (sum(m), m)


def leading_monomial(f: MultiPoly):
    if not f.terms:
        raise ValueError("zero polynomial has no leading monomial")
    return max(f.terms, key=grlex_key)


def divides_monomial(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def reduce_terms(terms: Mapping, basis: Sequence[MultiPoly]) -> dict:
    """Full multivariate division remainder in graded lex order.

    The remainder is canonical when ``basis`` is a Groebner basis, e.g. two
    polynomials with coprime leading monomials.
    """
    leads = []
    for b in basis:
        lm = leading_monomial(b)
        inv = 1 / b.terms[lm]
        tail = {m: c * inv for m, c in b.terms.items() if m != lm}
        leads.append((lm, tail))
    r = dict(terms)
    out: dict = {}
    while r:
        m = max(r, key=grlex_key)
        c = r.pop(m)
        for lm, tail in leads:
            if divides_monomial(lm, m):
                shift = tuple(x - y for x, y in zip(m, lm))
                for t, a in tail.items():
                    k = tuple(x + y for x, y in zip(t, shift))
                    w = r.get(k, 0) - c * a
                    if w:
                        r[k] = w
                    else:
                        r.pop(k, None)
                break
        else:
            out[m] = c
    return out


def coprime_leads(basis: Sequence[MultiPoly]) -> bool:
    lms = [leading_monomial(b) for b in basis]
    for i in range(len(lms)):
        for j in range(i + 1, len(lms)):
            if any(x and y for x, y in zip(lms[i], lms[j])):
                return False
    return True
