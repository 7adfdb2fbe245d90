"""Exact sparse linear algebra over the rationals.

Vectors are dicts ``column -> mpq`` with integer columns.  The workhorse is
:class:`Echelon`, an incrementally grown row-echelon basis in which every row
has a distinct leading column (its smallest column) normalized to 1.  Callers
that want some coordinates eliminated first give them small column indices.

An echelon may track, for every stored row, which input vectors it was built
from.  That bookkeeping turns the same elimination into a solver (express a
target through the inputs) and a kernel finder (inputs that reduced to zero).
"""

from __future__ import annotations

import os
from heapq import heapify, heappop, heappush
from typing import Callable, Hashable, Iterable, Sequence

from gmpy2 import mpq


class SliceTooLarge(RuntimeError):
    pass


def max_matrix() -> int:
    return int(os.environ.get("EDRC_MAX_MATRIX", "400000"))


def _axpy(v: dict, a, row: dict, heap=None, skip=None):
    """v -= a*row in place."""
    for k, b in row.items():
        if k == skip:
            continue
        w = v.get(k)
        if w is None:
            v[k] = -a * b
            if heap is not None:
                heappush(heap, k)
        else:
            w = w - a * b
            if w:
                v[k] = w
            else:
                del v[k]


def _combo_axpy(c: dict, a, row: dict):
    for k, b in row.items():
        w = c.get(k, 0) - a * b
        if w:
            c[k] = w
        else:
            c.pop(k, None)


class Echelon:
    """Row-echelon basis; optionally records input combinations per row."""

    def __init__(self, track: bool = False, cap: int | None = None):
        self.pivots: dict = {}
        self.track = track
        self.combos: dict = {}
        self.kernel: list = []
        self.cap = max_matrix() if cap is None else cap
        self._added = 0

    def __len__(self):
        return len(self.pivots)

    def _reduce(self, v: dict, c: dict | None, full: bool) -> dict:
        pivots = self.pivots
        heap = list(v)
        heapify(heap)
        while heap:
            col = heappop(heap)
            a = v.get(col)
            if a is None:
                continue
            row = pivots.get(col)
            if row is None:
                if full:
                    continue
                heappush(heap, col)
                break
            del v[col]
            _axpy(v, a, row, heap, skip=col)
            if c is not None:
                _combo_axpy(c, a, self.combos[col])
        return v

    def reduce(self, vec: dict) -> dict:
        """Full reduction: no pivot column survives."""
        return self._reduce(dict(vec), None, True)

    def contains(self, vec: dict) -> bool:
        return not self._reduce(dict(vec), None, False)

    def add(self, vec: dict, label: Hashable = None) -> bool:
        """Insert vec; returns False (and records a kernel relation) if dependent."""
        self._added += 1
        if self._added > self.cap:
            raise SliceTooLarge(f"linear system exceeds EDRC_MAX_MATRIX={self.cap}")
        v = dict(vec)
        c = {label: mpq(1)} if self.track else None
        self._reduce(v, c, False)
        if not v:
            if self.track:
                self.kernel.append(c)
            return False
        lead = min(v)
        a = v[lead]
        if a != 1:
            inv = 1 / a
            v = {k: x * inv for k, x in v.items()}
            if c is not None:
                c = {k: x * inv for k, x in c.items()}
        self.pivots[lead] = v
        if self.track:
            self.combos[lead] = c
        return True

    def express(self, vec: dict) -> dict | None:
        """Coefficients (by label) writing vec through the inputs, or None."""
        if not self.track:
            raise ValueError("echelon was built without tracking")
        v = dict(vec)
        c: dict = {}
        self._reduce(v, c, True)
        if v:
            return None
        return {k: -x for k, x in c.items()}

    def interreduce(self):
        """Bring rows to reduced echelon form (back substitution)."""
        for lead in sorted(self.pivots, reverse=True):
            row = self.pivots[lead]
            tail = {k: x for k, x in row.items() if k != lead}
            c = dict(self.combos[lead]) if self.track else None
            self._reduce(tail, c, True)
            tail[lead] = mpq(1)
            self.pivots[lead] = tail
            if self.track:
                self.combos[lead] = c

    def rows(self) -> list:
        return [self.pivots[k] for k in sorted(self.pivots)]


# index helpers for keyed vectors


class ColumnIndex:
    """Fixed bijection keys <-> columns, sorted by a caller-supplied key."""

    def __init__(self, keys: Iterable, sort_key: Callable | None = None):
        self.keys = sorted(set(keys), key=sort_key)
        self.col = {k: i for i, k in enumerate(self.keys)}

    def __len__(self):
        return len(self.keys)

    def vec(self, keyed: dict) -> dict:
        col = self.col
        return {col[k]: c for k, c in keyed.items()}

    def unvec(self, v: dict) -> dict:
        keys = self.keys
        return {keys[i]: c for i, c in v.items()}


# matrix-level API


class SparseMatrix:
    def __init__(self, rows: int, cols: int, entries: dict | None = None):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        for (r, c), x in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise IndexError("entry out of bounds")
            x = mpq(x)
            if x:
                self.entries[(r, c)] = x

    @classmethod
    def from_dense(cls, data: Sequence[Sequence]) -> "SparseMatrix":
        rows = len(data)
        cols = len(data[0]) if rows else 0
        return cls(rows, cols, {(i, j): x for i, r in enumerate(data) for j, x in enumerate(r) if x})

    @classmethod
    def from_rows(cls, rows: Sequence[dict], cols: int) -> "SparseMatrix":
        return cls(len(rows), cols, {(i, j): x for i, r in enumerate(rows) for j, x in r.items()})

    def row_dicts(self) -> list:
        out = [dict() for _ in range(self.rows)]
        for (r, c), x in self.entries.items():
            out[r][c] = x
        return out

    def col_dicts(self) -> list:
        out = [dict() for _ in range(self.cols)]
        for (r, c), x in self.entries.items():
            out[c][r] = x
        return out

    def to_dense(self) -> list:
        d = [[mpq(0)] * self.cols for _ in range(self.rows)]
        for (r, c), x in self.entries.items():
            d[r][c] = x
        return d

    def matvec(self, x: Sequence) -> list:
        out = [mpq(0)] * self.rows
        for (r, c), v in self.entries.items():
            out[r] += v * x[c]
        return out

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)


class SubspaceBasis:
    """Reduced echelon basis of a subspace of Q^ambient_dim."""

    def __init__(self, ambient_dim: int, vectors: Iterable[dict] = ()):
        self.ambient_dim = ambient_dim
        e = Echelon()
        for v in vectors:
            if any(not 0 <= k < ambient_dim for k in v):
                raise IndexError("vector outside ambient space")
            e.add(v)
        e.interreduce()
        self._echelon = e
        self.basis_vectors = e.rows()

    @property
    def dim(self) -> int:
        return len(self.basis_vectors)

    def contains(self, v: dict) -> bool:
        return self._echelon.contains(v)

    def dense(self) -> list:
        return [[v.get(i, mpq(0)) for i in range(self.ambient_dim)] for v in self.basis_vectors]


def rref(m: SparseMatrix):
    """Reduced row echelon form; pivots taken at the smallest column, sparsest row first."""
    rows = m.row_dicts()
    order = sorted(range(len(rows)), key=lambda i: (min(rows[i]) if rows[i] else m.cols, len(rows[i]), i))
    e = Echelon()
    for i in order:
        if rows[i]:
            e.add(rows[i])
    e.interreduce()
    pivots = sorted(e.pivots)
    out = SparseMatrix.from_rows([e.pivots[p] for p in pivots], m.cols)
    out.rows = m.rows  # zero rows pad to the original shape
    return out, pivots, len(pivots)


def _column_echelon(m: SparseMatrix) -> Echelon:
    e = Echelon(track=True)
    for j, col in enumerate(m.col_dicts()):
        e.add(col, j)
    return e


def solve_particular(m: SparseMatrix, rhs: Sequence) -> list | None:
    """One solution of m x = rhs with free variables zero, or None."""
    if len(rhs) != m.rows:
        raise ValueError("dimension mismatch")
    e = _column_echelon(m)
    target = {i: mpq(x) for i, x in enumerate(rhs) if x}
    c = e.express(target)
    if c is None:
        return None
    x = [mpq(0)] * m.cols
    for j, v in c.items():
        x[j] = v
    return x


def kernel_basis(m: SparseMatrix) -> SubspaceBasis:
    e = _column_echelon(m)
    return SubspaceBasis(m.cols, e.kernel)


def quotient_basis(big: SubspaceBasis, small: SubspaceBasis, weights: Sequence | None = None):
    """Complete small to a basis of big; representatives picked by ascending weight.

    ``weights[i]`` is the weight of coordinate i; a vector weighs as much as its
    heaviest coordinate.  Ties break by coordinate index.
    """
    if big.ambient_dim != small.ambient_dim:
        raise ValueError("ambient mismatch")
    for v in small.basis_vectors:
        if not big.contains(v):
            raise ValueError("small subspace is not contained in big")
    n = big.ambient_dim
    w = list(weights) if weights is not None else list(range(n))
    # heavy coordinates get small columns so they are eliminated first
    perm = sorted(range(n), key=lambda i: (w[i], i), reverse=True)
    to_col = {i: k for k, i in enumerate(perm)}

    def fwd(v):
        return {to_col[i]: x for i, x in v.items()}

    def back(v):
        return {perm[k]: x for k, x in v.items()}

    eb = Echelon()
    for v in big.basis_vectors:
        eb.add(fwd(v))
    eb.interreduce()
    es = Echelon()
    for v in small.basis_vectors:
        es.add(fwd(v))
    reps = []
    for lead in sorted(eb.pivots, reverse=True):  # lightest leads first
        v = eb.pivots[lead]
        if es.add(v):
            reps.append(back(v))
    return len(reps), reps


def kernel_of_images(images: Sequence[dict]) -> list:
    """Relations sum c_i images[i] = 0 as dicts i -> c_i."""
    e = Echelon(track=True)
    for i, v in enumerate(images):
        e.add(v, i)
    return e.kernel


def intersect(a: Sequence[dict], b: Sequence[dict]) -> list:
    """Basis of span(a) ∩ span(b)."""
    e = Echelon(track=True)
    for i, v in enumerate(a):
        e.add(v, ("a", i))
    out = []
    for j, v in enumerate(b):
        e.add(v, ("b", j))
    for rel in e.kernel:
        vec: dict = {}
        for (side, i), c in rel.items():
            if side == "b":
                for k, x in b[i].items():
                    w = vec.get(k, 0) + c * x
                    if w:
                        vec[k] = w
                    else:
                        vec.pop(k, None)
        if vec:
            out.append(vec)
    return out
