"""Polynomial and rational matrices, Smith / Smith-McMillan forms, structure at infinity."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence

from flint import fmpq, fmpq_mat, fmpq_poly

from .exactalg import (
    NEG_INF,
    ONE_POLY,
    ZERO_POLY,
    Poly,
    RatFn,
    as_ratfn,
    rat,
    series_coeffs,
)


class _Mat:
    """Dense row-major matrix over a ring whose elements support + - *."""

    __slots__ = ("rows", "cols", "entries")
    _zero = None
    _one = None

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows, self.cols = rows, cols
        if entries is None:
            entries = [[self._zero] * cols for _ in range(rows)]
        else:
            entries = [[self._coerce(x) for x in row] for row in entries]
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise ValueError("entry grid does not match the declared shape")
        self.entries = entries

    @classmethod
    def _coerce(cls, x):
        raise NotImplementedError

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]):
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        return cls(len(rows), ncols, rows)

    @classmethod
    def zeros(cls, rows: int, cols: int):
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int):
        m = cls(n, n)
        for i in range(n):
            m.entries[i][i] = cls._one
        return m

    @classmethod
    def diag(cls, items: Sequence, rows: int = None, cols: int = None):
        k = len(items)
        m = cls(k if rows is None else rows, k if cols is None else cols)
        for i, x in enumerate(items):
            m.entries[i][i] = cls._coerce(x)
        return m

    @classmethod
    def from_const(cls, c: fmpq_mat):
        return cls(c.nrows(), c.ncols(),
                   [[c[i, j] for j in range(c.ncols())] for i in range(c.nrows())])

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def copy(self):
        return type(self)(self.rows, self.cols, [list(r) for r in self.entries])

    def T(self):
        return type(self)(self.cols, self.rows,
                          [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    transpose = T

    def map(self, f: Callable):
        return type(self)(self.rows, self.cols, [[f(x) for x in r] for r in self.entries])

    def __add__(self, o):
        _check_same(self, o)
        return type(self)(self.rows, self.cols,
                          [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, o.entries)])

    def __sub__(self, o):
        _check_same(self, o)
        return type(self)(self.rows, self.cols,
                          [[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, o.entries)])

    def __neg__(self):
        return self.map(lambda x: -x)

    def scale(self, c):
        c = self._coerce(c)
        return self.map(lambda x: x * c)

    def __mul__(self, o):
        if not isinstance(o, _Mat):
            return self.scale(o)
        if self.cols != o.rows:
            raise ValueError(f"shape mismatch {self.shape} * {o.shape}")
        cls = _result_type(self, o)
        a = [[cls._coerce(x) for x in r] for r in self.entries] if cls is not type(self) else self.entries
        b = [[cls._coerce(x) for x in r] for r in o.entries] if cls is not type(o) else o.entries
        zero = cls._zero
        out = []
        for i in range(self.rows):
            ai = a[i]
            nz = [(k, x) for k, x in enumerate(ai) if x]
            row = []
            for j in range(o.cols):
                acc = zero
                for k, x in nz:
                    y = b[k][j]
                    if y:
                        acc = acc + x * y
                row.append(acc)
            out.append(row)
        return cls(self.rows, o.cols, out)

    def __eq__(self, o):
        if not isinstance(o, _Mat) or self.shape != o.shape:
            return False
        return all(as_ratfn(a) == as_ratfn(b) for r, s in zip(self.entries, o.entries) for a, b in zip(r, s))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(not x for r in self.entries for x in r)

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]):
        rows, cols = list(rows), list(cols)
        return type(self)(len(rows), len(cols), [[self.entries[i][j] for j in cols] for i in rows])

    def rows_slice(self, start: int, stop: int):
        return self.submatrix(range(start, stop), range(self.cols))

    def cols_slice(self, start: int, stop: int):
        return self.submatrix(range(self.rows), range(start, stop))

    def column(self, j: int) -> list:
        return [self.entries[i][j] for i in range(self.rows)]

    @classmethod
    def hstack(cls, *mats):
        mats = [m for m in mats if m is not None]
        rows = mats[0].rows
        if any(m.rows != rows for m in mats):
            raise ValueError("hstack with differing row counts")
        return cls(rows, sum(m.cols for m in mats),
                   [[x for m in mats for x in m.entries[i]] for i in range(rows)])

    @classmethod
    def vstack(cls, *mats):
        mats = [m for m in mats if m is not None]
        cols = mats[0].cols
        if any(m.cols != cols for m in mats):
            raise ValueError("vstack with differing column counts")
        return cls(sum(m.rows for m in mats), cols, [list(r) for m in mats for r in m.entries])

    @classmethod
    def block(cls, grid: Sequence[Sequence]):
        """Assemble from a grid of matrices; ``None`` entries are zero blocks sized by their row/column."""
        heights = []
        for brow in grid:
            h = next((m.rows for m in brow if m is not None), None)
            if h is None:
                raise ValueError("block row without a sized block")
            heights.append(h)
        widths = []
        for j in range(len(grid[0])):
            w = next((brow[j].cols for brow in grid if brow[j] is not None), None)
            if w is None:
                raise ValueError("block column without a sized block")
            widths.append(w)
        out = cls(sum(heights), sum(widths))
        r0 = 0
        for bi, brow in enumerate(grid):
            c0 = 0
            for bj, m in enumerate(brow):
                if m is not None:
                    if m.shape != (heights[bi], widths[bj]):
                        raise ValueError("inconsistent block sizes")
                    for i in range(m.rows):
                        out.entries[r0 + i][c0:c0 + m.cols] = [cls._coerce(x) for x in m.entries[i]]
                c0 += widths[bj]
            r0 += heights[bi]
        return out

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "entries": [[as_ratfn(x).to_json() for x in r] for r in self.entries]}

    def to_text(self) -> str:
        return "\n".join("[" + ", ".join(x.to_text() for x in r) + "]" for r in self.entries)

    def __repr__(self):
        return f"{type(self).__name__}({self.rows}x{self.cols})"


def _check_same(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")


def _result_type(a, b):
    return RatMatrix if isinstance(a, RatMatrix) or isinstance(b, RatMatrix) else PolyMatrix


class PolyMatrix(_Mat):
    """Matrix with Poly entries."""

    __slots__ = ()
    _zero = ZERO_POLY
    _one = ONE_POLY

    @classmethod
    def _coerce(cls, x):
        if isinstance(x, Poly):
            return x
        if isinstance(x, RatFn):
            if not x.is_poly():
                raise ValueError("non-polynomial entry in a polynomial matrix")
            return x.num
        return Poly.const(x)

    def degree(self):
        """Max entry degree (NEG_INF for the zero matrix)."""
        return max((x.degree for r in self.entries for x in r), default=NEG_INF)

    def col_degrees(self) -> list:
        return [max((self.entries[i][j].degree for i in range(self.rows)), default=NEG_INF)
                for j in range(self.cols)]

    def row_degrees(self) -> list:
        return [max((x.degree for x in r), default=NEG_INF) for r in self.entries]

    def coeff(self, k: int) -> fmpq_mat:
        m = fmpq_mat(self.rows, self.cols)
        for i, r in enumerate(self.entries):
            for j, x in enumerate(r):
                if x.degree >= k:
                    m[i, j] = x.coeff(k)
        return m

    def eval(self, x) -> fmpq_mat:
        x = rat(x)
        m = fmpq_mat(self.rows, self.cols)
        for i, r in enumerate(self.entries):
            for j, e in enumerate(r):
                if e:
                    m[i, j] = e(x)
        return m

    def highest_col_coeff(self) -> fmpq_mat:
        """N_h: column j holds the coefficient of lambda^{d_j}."""
        degs = self.col_degrees()
        m = fmpq_mat(self.rows, self.cols)
        for j, d in enumerate(degs):
            if d == NEG_INF:
                continue
            for i in range(self.rows):
                m[i, j] = self.entries[i][j].coeff(d)
        return m

    def to_rat(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols,
                         [[RatFn.from_poly(x) for x in r] for r in self.entries])

    @staticmethod
    def pencil(l1: fmpq_mat, l0: fmpq_mat) -> "PolyMatrix":
        if (l1.nrows(), l1.ncols()) != (l0.nrows(), l0.ncols()):
            raise ValueError("pencil coefficients differ in shape")
        return PolyMatrix(l1.nrows(), l1.ncols(),
                          [[Poly(fmpq_poly([l0[i, j], l1[i, j]])) for j in range(l1.ncols())]
                           for i in range(l1.nrows())])

    @staticmethod
    def from_coeffs(coeffs: Sequence[fmpq_mat]) -> "PolyMatrix":
        """sum_k coeffs[k] * lambda^k."""
        r, c = coeffs[0].nrows(), coeffs[0].ncols()
        return PolyMatrix(r, c, [[Poly(fmpq_poly([m[i, j] for m in coeffs])) for j in range(c)]
                                 for i in range(r)])


class RatMatrix(_Mat):
    """Matrix with RatFn entries."""

    __slots__ = ()
    _zero = RatFn()
    _one = RatFn.const(1)

    @classmethod
    def _coerce(cls, x):
        return as_ratfn(x)

    def is_poly(self) -> bool:
        return all(x.is_poly() for r in self.entries for x in r)

    def to_poly(self) -> PolyMatrix:
        return PolyMatrix(self.rows, self.cols, [[x.num for x in r] for r in self.entries])

    def is_proper(self) -> bool:
        return all(x.is_proper() for r in self.entries for x in r)

    def is_strictly_proper(self) -> bool:
        return all(x.is_strictly_proper() for r in self.entries for x in r)

    def eval(self, x) -> fmpq_mat:
        x = rat(x)
        m = fmpq_mat(self.rows, self.cols)
        for i, r in enumerate(self.entries):
            for j, e in enumerate(r):
                if e:
                    m[i, j] = e(x)
        return m

    def common_den(self) -> Poly:
        """Monic lcm of all entry denominators."""
        den = ONE_POLY
        for r in self.entries:
            for x in r:
                if not x.den.is_const():
                    g = den.gcd(x.den)
                    den = den * (x.den // g)
        return den

    def cleared(self):
        """(delta, delta * G) with delta the global monic lcm denominator."""
        delta = self.common_den()
        return delta, PolyMatrix(self.rows, self.cols,
                                 [[x.num * (delta // x.den) for x in r] for r in self.entries])

    def row_cleared(self) -> PolyMatrix:
        """Each row multiplied by the lcm of its own denominators (same right kernel)."""
        out = []
        for r in self.entries:
            den = ONE_POLY
            for x in r:
                if not x.den.is_const():
                    den = den * (x.den // den.gcd(x.den))
            out.append([x.num * (den // x.den) for x in r])
        return PolyMatrix(self.rows, self.cols, out)

    def decompose(self):
        """(D, G_sp) with D polynomial and G_sp strictly proper."""
        d = PolyMatrix(self.rows, self.cols)
        sp = RatMatrix(self.rows, self.cols)
        for i, r in enumerate(self.entries):
            for j, x in enumerate(r):
                q, rem = x.num.divrem(x.den)
                d.entries[i][j] = q
                sp.entries[i][j] = RatFn(rem, x.den)
        return d, sp

    def at_inverse(self) -> "RatMatrix":
        return self.map(lambda x: x.at_inverse())

    def inverse(self) -> "RatMatrix":
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        return self.solve(RatMatrix.identity(self.rows))

    def solve(self, rhs: "_Mat") -> "RatMatrix":
        """X with self * X = rhs, by Gauss-Jordan over the field of rational functions."""
        if self.rows != self.cols or rhs.rows != self.rows:
            raise ValueError("solve needs a square system with matching right-hand side")
        n, k = self.rows, rhs.cols
        a = [list(self.entries[i]) + [as_ratfn(x) for x in rhs.entries[i]] for i in range(n)]
        for c in range(n):
            piv = _pick_pivot(a, c, n)
            if piv is None:
                raise ZeroDivisionError("singular rational matrix")
            a[c], a[piv] = a[piv], a[c]
            inv = a[c][c].inv()
            a[c] = [x * inv if x else x for x in a[c]]
            for i in range(n):
                f = a[i][c]
                if i != c and f:
                    rc = a[c]
                    a[i] = [x - f * y if y else x for x, y in zip(a[i], rc)]
        return RatMatrix(n, k, [row[n:] for row in a])

    def det(self) -> RatFn:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        a = [list(r) for r in self.entries]
        det = RatFn.const(1)
        for c in range(n):
            piv = _pick_pivot(a, c, n)
            if piv is None:
                return RatFn()
            if piv != c:
                a[c], a[piv] = a[piv], a[c]
                det = -det
            p = a[c][c]
            det = det * p
            inv = p.inv()
            for i in range(c + 1, n):
                f = a[i][c]
                if f:
                    f = f * inv
                    a[i] = [x - f * y if y else x for x, y in zip(a[i], a[c])]
        return det


def _pick_pivot(a, c, n):
    best, best_size = None, None
    for i in range(c, n):
        x = a[i][c]
        if x:
            size = x.num.degree + x.den.degree
            if best is None or size < best_size:
                best, best_size = i, size
    return best


def as_rat_matrix(m) -> RatMatrix:
    if isinstance(m, RatMatrix):
        return m
    if isinstance(m, PolyMatrix):
        return m.to_rat()
    if isinstance(m, fmpq_mat):
        return RatMatrix.from_const(m)
    raise TypeError(f"cannot view {type(m).__name__} as a rational matrix")


def as_poly_matrix(m) -> PolyMatrix:
    if isinstance(m, PolyMatrix):
        return m
    if isinstance(m, RatMatrix):
        if not m.is_poly():
            raise ValueError("matrix has non-polynomial entries")
        return m.to_poly()
    if isinstance(m, fmpq_mat):
        return PolyMatrix.from_const(m)
    raise TypeError(f"cannot view {type(m).__name__} as a polynomial matrix")


def matrix_from_json(data) -> RatMatrix:
    rows, cols = int(data["rows"]), int(data["cols"])
    # an entry is {"num": [...], "den": [...]} or a bare coefficient list (a polynomial)
    entries = [[RatFn.from_json(e) if isinstance(e, dict) else RatFn.from_poly(Poly.from_json(e))
                for e in r] for r in data["entries"]]
    return RatMatrix(rows, cols, entries)


def const_from_json(data) -> fmpq_mat:
    m = matrix_from_json(data)
    out = fmpq_mat(m.rows, m.cols)
    for i, r in enumerate(m.entries):
        for j, x in enumerate(r):
            if not x.num.is_const() or not x.den.is_const():
                raise ValueError("expected a constant matrix")
            out[i, j] = x.num.coeff(0)
    return out


def const_to_json(c: fmpq_mat) -> dict:
    return PolyMatrix.from_const(c).to_json()


# ---------------------------------------------------------------------------
# Smith form


@dataclass
class SmithForm:
    u: PolyMatrix
    v: PolyMatrix
    inv_factors: List[Poly]
    rank: int


@dataclass
class SmithMcMillanForm:
    u: PolyMatrix
    v: PolyMatrix
    eps: List[Poly]
    psi: List[Poly]
    rank: int


@dataclass
class InfinityStructure:
    q: List[int]

    @property
    def d(self) -> int:
        return -min(0, self.q[0]) if self.q else 0


def _raw(p: PolyMatrix):
    return [[x._p for x in r] for r in p.entries]


def _wrap(a, rows, cols) -> PolyMatrix:
    return PolyMatrix(rows, cols, [[Poly(x) for x in r] for r in a])


def _ident_raw(n):
    one, zero = fmpq_poly([1]), fmpq_poly()
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def _deg(x):
    return x.degree()


def smith_form(p: PolyMatrix, transforms: bool = True) -> SmithForm:
    """Smith form u * p * v = diag(inv_factors, 0) by elementary operations.

    Pivots are minimal-degree entries, ties broken by lowest (row, col).
    With ``transforms=False`` the transformers are returned as ``None``.
    """
    m, n = p.rows, p.cols
    a = _raw(p)
    u = _ident_raw(m) if transforms else None
    v = _ident_raw(n) if transforms else None

    def row_swap(i, j):
        if i != j:
            a[i], a[j] = a[j], a[i]
            if transforms:
                u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        if i != j:
            for r in a:
                r[i], r[j] = r[j], r[i]
            if transforms:
                for r in v:
                    r[i], r[j] = r[j], r[i]

    def row_axpy(dst, src, q, start):
        # row dst -= q * row src
        ad, asrc = a[dst], a[src]
        for j in range(start, n):
            if asrc[j]:
                ad[j] = ad[j] - q * asrc[j]
        if transforms:
            ud, us = u[dst], u[src]
            for j in range(m):
                if us[j]:
                    ud[j] = ud[j] - q * us[j]

    def col_axpy(dst, src, q, start):
        for i in range(start, m):
            r = a[i]
            if r[src]:
                r[dst] = r[dst] - q * r[src]
        if transforms:
            for r in v:
                if r[src]:
                    r[dst] = r[dst] - q * r[src]

    invf = []
    k = 0
    while k < min(m, n):
        best = None
        for i in range(k, m):
            for j in range(k, n):
                x = a[i][j]
                if x and (best is None or _deg(x) < best[0]):
                    best = (_deg(x), i, j)
                    if best[0] == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        row_swap(k, best[1])
        col_swap(k, best[2])
        while True:
            # clear column k and row k, re-pivoting on smaller remainders
            while True:
                piv = a[k][k]
                for i in range(k + 1, m):
                    if a[i][k]:
                        q = a[i][k] // piv
                        if q:
                            row_axpy(i, k, q, k)
                for j in range(k + 1, n):
                    if a[k][j]:
                        q = a[k][j] // piv
                        if q:
                            col_axpy(j, k, q, k)
                cand = None
                for i in range(k + 1, m):
                    if a[i][k] and (cand is None or _deg(a[i][k]) < cand[0]):
                        cand = (_deg(a[i][k]), "r", i)
                for j in range(k + 1, n):
                    if a[k][j] and (cand is None or _deg(a[k][j]) < cand[0]):
                        cand = (_deg(a[k][j]), "c", j)
                if cand is None:
                    break
                if cand[1] == "r":
                    row_swap(k, cand[2])
                else:
                    col_swap(k, cand[2])
            piv = a[k][k]
            bad = None
            if _deg(piv) > 0:
                for i in range(k + 1, m):
                    for j in range(k + 1, n):
                        if a[i][j] and (a[i][j] % piv):
                            bad = i
                            break
                    if bad is not None:
                        break
            if bad is None:
                break
            # row k += row bad, then repeat elimination
            row_axpy(k, bad, fmpq_poly([-1]), k)
        c = a[k][k].coeffs()[-1]
        if c != 1:
            inv = 1 / c
            a[k][k] = a[k][k] * inv
            if transforms:
                u[k] = [x * inv for x in u[k]]
        invf.append(Poly(a[k][k]))
        k += 1
    return SmithForm(
        u=_wrap(u, m, m) if transforms else None,
        v=_wrap(v, n, n) if transforms else None,
        inv_factors=invf,
        rank=len(invf),
    )


def has_unit_invariant_factors(p: PolyMatrix, tries: int = 24) -> bool:
    """True iff p has full rank min(rows, cols) with all invariant factors 1.

    The gcd of a few maximal minors already equal to 1 settles it exactly;
    otherwise the Smith form decides.
    """
    k = min(p.rows, p.cols)
    if k == 0:
        return True
    pp = p if p.cols <= p.rows else p.T()
    rng = random.Random(0)
    g = fmpq_poly()
    subsets = [list(range(k))]
    subsets += [sorted(rng.sample(range(pp.rows), k)) for _ in range(tries)]
    for rows in subsets:
        g = g.gcd(det_poly(pp.submatrix(rows, range(k)))._p)
        if g.degree() == 0:
            return True
    sf = smith_form(pp, transforms=False)
    return sf.rank == k and all(f.degree == 0 for f in sf.inv_factors)


def invariant_factors(p: PolyMatrix) -> List[Poly]:
    return smith_form(p, transforms=False).inv_factors


def smith_mcmillan_finite(g, transforms: bool = True) -> SmithMcMillanForm:
    """Finite Smith-McMillan form via the global lcm denominator."""
    g = as_rat_matrix(g)
    delta, pg = g.cleared()
    sf = smith_form(pg, transforms=transforms)
    eps, psi = [], []
    for f in sf.inv_factors:
        x = RatFn(f, delta)
        eps.append(x.num.monic())
        psi.append(x.den)
    return SmithMcMillanForm(u=sf.u, v=sf.v, eps=eps, psi=psi, rank=sf.rank)


def rank(g) -> int:
    """Normal rank by fraction-free (Bareiss) elimination over polynomials."""
    if isinstance(g, fmpq_mat):
        return g.rank()
    if isinstance(g, RatMatrix):
        p = g.row_cleared()
    else:
        p = as_poly_matrix(g)
    a = _raw(p)
    m, n = p.rows, p.cols
    r = 0
    prev = fmpq_poly([1])
    for c in range(n):
        if r == m:
            break
        piv = None
        for i in range(r, m):
            if a[i][c] and (piv is None or _deg(a[i][c]) < _deg(a[piv][c])):
                piv = i
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        pv = a[r][c]
        for i in range(r + 1, m):
            ai = a[i]
            f = ai[c]
            for j in range(c + 1, n):
                x = pv * ai[j] - f * a[r][j]
                ai[j] = x // prev
            ai[c] = fmpq_poly()
        prev = pv
        r += 1
    return r


def det_poly(p: PolyMatrix) -> Poly:
    if p.rows != p.cols:
        raise ValueError("determinant of a non-square matrix")
    n = p.rows
    a = _raw(p)
    sign = 1
    prev = fmpq_poly([1])
    for c in range(n):
        piv = None
        for i in range(c, n):
            if a[i][c] and (piv is None or _deg(a[i][c]) < _deg(a[piv][c])):
                piv = i
        if piv is None:
            return Poly()
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        pv = a[c][c]
        for i in range(c + 1, n):
            ai = a[i]
            f = ai[c]
            for j in range(c + 1, n):
                ai[j] = (pv * ai[j] - f * a[c][j]) // prev
            ai[c] = fmpq_poly()
        prev = pv
    if n == 0:
        return Poly.const(1)
    return Poly(a[n - 1][n - 1] * sign)


def is_unimodular(p: PolyMatrix) -> bool:
    if p.rows != p.cols:
        raise ValueError("unimodularity needs a square matrix")
    d = det_poly(p)
    return d.degree == 0


def is_biproper(g) -> bool:
    g = as_rat_matrix(g)
    if g.rows != g.cols:
        raise ValueError("biproperness needs a square matrix")
    if not g.is_proper():
        return False
    det = g.det()
    return (not det.is_zero()) and det.num.degree == det.den.degree


def least_order(g) -> int:
    g = as_rat_matrix(g)
    if g.is_poly():
        return 0
    smf = smith_mcmillan_finite(g, transforms=False)
    return sum(p.degree for p in smf.psi)


# ---------------------------------------------------------------------------
# structure at infinity


def local_orders_at_zero(g, rank_hint: int = None) -> List[int]:
    """Exponents of the local Smith-McMillan form of g at lambda = 0.

    g is first scaled by lambda^h so that no entry has a pole at 0; then the
    block Toeplitz matrices T_k of its Taylor coefficients satisfy
    rank T_k = sum_i max(0, k + 1 - e_i), which pins down every exponent e_i.
    """
    g = as_rat_matrix(g)
    r = rank(g) if rank_hint is None else rank_hint
    if r == 0:
        return []
    h = 0
    for row in g.entries:
        for x in row:
            if x:
                h = max(h, x.den.valuation() - x.num.valuation())
    p, m = g.rows, g.cols
    series = {}
    for i, row in enumerate(g.entries):
        for j, x in enumerate(row):
            if x:
                series[(i, j)] = (RatFn(x.num.shift(h), x.den), [])
    coeffs: List[fmpq_mat] = []

    def coeff(k):
        while len(coeffs) <= k:
            kk = len(coeffs)
            c = fmpq_mat(p, m)
            for (i, j), (x, cache) in series.items():
                if len(cache) <= kk:
                    cache[:] = series_coeffs(x, max(2 * kk + 2, 4))
                c[i, j] = cache[kk]
            coeffs.append(c)
        return coeffs[k]

    counts = [0]
    exps: List[int] = []
    k = 0
    prev_rank = 0
    while len(exps) < r:
        t = fmpq_mat((k + 1) * p, (k + 1) * m)
        for bi in range(k + 1):
            for bj in range(bi + 1):
                c = coeff(bi - bj)
                for i in range(p):
                    for j in range(m):
                        if c[i, j] != 0:
                            t[bi * p + i, bj * m + j] = c[i, j]
        rk = t.rank()
        le_k = rk - prev_rank  # number of exponents <= k
        prev_rank = rk
        exps.extend([k] * (le_k - len(exps)))
        k += 1
        if k > 10 * (p + m) * (1 + max(0, h)) + 50:
            raise RuntimeError("local order computation did not terminate")
    return [e - h for e in exps]


def infinity_structure(g) -> InfinityStructure:
    """Invariant orders at infinity q_1 <= ... <= q_r (substitution lambda -> 1/mu)."""
    g = as_rat_matrix(g)
    return InfinityStructure(q=local_orders_at_zero(g.at_inverse()))


def infinity_structure_smith(g) -> InfinityStructure:
    """Same data read off the finite Smith-McMillan form of G(1/mu) (slower cross-check)."""
    g = as_rat_matrix(g)
    smf = smith_mcmillan_finite(g.at_inverse(), transforms=False)
    q = [e.valuation() - s.valuation() for e, s in zip(smf.eps, smf.psi)]
    return InfinityStructure(q=sorted(q))


def pencil_infinity_structure(l1: fmpq_mat, l0: fmpq_mat) -> InfinityStructure:
    """Orders at infinity of lambda*l1 + l0: those of l1 + mu*l0 at mu = 0, minus one."""
    rev = PolyMatrix.pencil(l0, l1)
    return InfinityStructure(q=[e - 1 for e in local_orders_at_zero(rev)])
