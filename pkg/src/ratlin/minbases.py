"""Minimal bases and minimal indices of rational matrices."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from flint import fmpq, fmpq_mat, fmpq_poly, fmpz

from .exactalg import NEG_INF, Poly
from .polymat import (
    PolyMatrix,
    RatMatrix,
    as_rat_matrix,
    has_unit_invariant_factors,
    rank,
    smith_form,
)


@dataclass
class MinimalBasis:
    side: str
    basis: PolyMatrix
    indices: List[int]

    def to_json(self) -> dict:
        return {"side": self.side, "basis": self.basis.to_json(), "indices": list(self.indices)}


@dataclass
class Certificate:
    """Outcome of a checker: ``ok`` plus the first failed item, if any."""

    ok: bool
    failed: Optional[str] = None
    items: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "failed": self.failed, "items": dict(self.items)}


def _check_side(side: str) -> None:
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _oriented(g, side: str) -> RatMatrix:
    _check_side(side)
    g = as_rat_matrix(g)
    return g if side == "right" else g.T()


def nullspace_const(m: fmpq_mat) -> fmpq_mat:
    """Basis (as columns) of the right null space of a constant matrix."""
    rows, cols = m.nrows(), m.ncols()
    if rows == 0:
        out = fmpq_mat(cols, cols)
        for i in range(cols):
            out[i, i] = 1
        return out
    rr, rk = m.rref()
    pivots = []
    r = 0
    for c in range(cols):
        if r < rk and rr[r, c] != 0:
            pivots.append(c)
            r += 1
    free = [c for c in range(cols) if c not in set(pivots)]
    out = fmpq_mat(cols, len(free))
    for k, f in enumerate(free):
        out[f, k] = 1
        for i, pc in enumerate(pivots):
            out[pc, k] = -rr[i, f]
    return out


def _column_echelon(a, m: int, n: int):
    """Column operations a * v = [w, 0] with w of full column rank; returns (rank, v)."""
    one, zero = fmpq_poly([1]), fmpq_poly()
    v = [[one if i == j else zero for j in range(n)] for i in range(n)]
    c = 0
    for i in range(m):
        if c == n:
            break
        while True:
            best = None
            for j in range(c, n):
                x = a[i][j]
                if x and (best is None or x.degree() < a[i][best].degree()):
                    best = j
            if best is None:
                break
            if best != c:
                for r in a:
                    r[best], r[c] = r[c], r[best]
                for r in v:
                    r[best], r[c] = r[c], r[best]
            piv = a[i][c]
            left = False
            for j in range(c + 1, n):
                if a[i][j]:
                    q = a[i][j] // piv
                    for r in a[i:]:
                        if r[c]:
                            r[j] = r[j] - q * r[c]
                    for r in v:
                        if r[c]:
                            r[j] = r[j] - q * r[c]
                    if a[i][j]:
                        left = True
                    _make_primitive(a, v, j, i)
            if not left:
                c += 1
                break
    return c, v


def _rat_content(polys) -> fmpq:
    num, den = fmpz(0), fmpz(1)
    for p in polys:
        if p:
            num = num.gcd(p.numer().content())
            den = den * p.denom() // den.gcd(p.denom())
    return fmpq(num, den) if num else fmpq(1)


def _make_primitive(a, v, j, start):
    """Divide column j of both a (from row ``start``) and v by their joint rational content."""
    c = _rat_content([r[j] for r in a[start:]] + [r[j] for r in v])
    if c != 1:
        inv = 1 / c
        for r in a[start:]:
            if r[j]:
                r[j] = r[j] * inv
        for r in v:
            if r[j]:
                r[j] = r[j] * inv


def kernel_module_basis(g, side: str = "right") -> PolyMatrix:
    """Polynomial basis of the kernel module, from a unimodular column-echelon transformer."""
    h = _oriented(g, side)
    p = h.row_cleared()
    a = [[x._p for x in r] for r in p.entries]
    rk, v = _column_echelon(a, p.rows, p.cols)
    n = p.cols
    return PolyMatrix(n, n - rk, [[Poly(x) for x in r[rk:]] for r in v])


def _is_reduced(cols_raw, rows: int) -> tuple:
    degs = [max((x.degree() for x in col), default=-1) for col in cols_raw]
    nh = fmpq_mat(rows, len(cols_raw))
    for j, col in enumerate(cols_raw):
        d = degs[j]
        if d < 0:
            continue
        for i, x in enumerate(col):
            if x.degree() >= d:
                nh[i, j] = x[d]
    return degs, nh


def column_reduce(p: PolyMatrix):
    """Column-reduce a full-column-rank polynomial matrix.

    Returns ``(reduced, w)`` with ``p * w == reduced``, ``w`` unimodular and the
    columns of ``reduced`` sorted by non-decreasing degree.
    """
    rows, n = p.rows, p.cols
    cols = [[p.entries[i][j]._p for i in range(rows)] for j in range(n)]
    one, zero = fmpq_poly([1]), fmpq_poly()
    w = [[one if i == j else zero for i in range(n)] for j in range(n)]  # columns of w
    while True:
        degs, nh = _is_reduced(cols, rows)
        if any(d < 0 for d in degs):
            raise ValueError("column_reduce needs a matrix of full column rank")
        if nh.rank() == n:
            break
        ns = nullspace_const(nh)
        x = [ns[i, 0] for i in range(n)]
        support = [j for j in range(n) if x[j] != 0]
        k = max(support, key=lambda j: (degs[j], -j))
        dk = degs[k]
        newc = list(cols[k])
        neww = list(w[k])
        for j in support:
            if j == k:
                continue
            f = fmpq_poly([0] * (dk - degs[j]) + [x[j] / x[k]])
            newc = [a + f * b if b else a for a, b in zip(newc, cols[j])]
            neww = [a + f * b if b else a for a, b in zip(neww, w[j])]
        cols[k], w[k] = newc, neww
    degs = [max((x.degree() for x in col), default=-1) for col in cols]
    order = sorted(range(n), key=lambda j: (degs[j], j))
    red = PolyMatrix(rows, n, [[Poly(cols[j][i]) for j in order] for i in range(rows)])
    wm = PolyMatrix(n, n, [[Poly(w[j][i]) for j in order] for i in range(n)])
    return red, wm


def normalize_columns(p: PolyMatrix) -> PolyMatrix:
    """Scale each column so its first top-degree entry has leading coefficient 1."""
    out = p.copy()
    degs = p.col_degrees()
    for j, d in enumerate(degs):
        if d == NEG_INF:
            continue
        lead = next(p.entries[i][j].coeff(d) for i in range(p.rows) if p.entries[i][j].degree == d)
        if lead != 1:
            inv = 1 / lead
            for i in range(p.rows):
                out.entries[i][j] = p.entries[i][j] * inv
    return out


def sorted_col_degrees(p: PolyMatrix) -> List[int]:
    return sorted(int(d) for d in p.col_degrees())


def minimal_basis(g, side: str = "right", certify: bool = True) -> MinimalBasis:
    """Minimal basis of the right or left null space of g."""
    h = _oriented(g, side)
    k = kernel_module_basis(h, "right")
    if k.cols == 0:
        return MinimalBasis(side, k, [])
    red, _ = column_reduce(k)
    red = normalize_columns(red)
    mb = MinimalBasis(side, red, sorted_col_degrees(red))
    if certify:
        cert = is_minimal_basis(red, g, side)
        if not cert:
            raise AssertionError(f"minimal basis certification failed: {cert.failed}")
    return mb


def is_minimal_basis(candidate: PolyMatrix, g, side: str = "right") -> Certificate:
    """Check membership, module-basis property, cardinality and column reducedness."""
    h = _oriented(g, side)
    if candidate.rows != h.cols:
        raise ValueError(f"candidate has {candidate.rows} rows, expected {h.cols}")
    items = {}
    prod = h * candidate
    items["in_null_space"] = prod.is_zero()
    nullity = h.cols - rank(h)
    items["count_equals_nullity"] = candidate.cols == nullity
    if candidate.cols:
        items["unit_invariant_factors"] = has_unit_invariant_factors(candidate)
        items["column_reduced"] = candidate.highest_col_coeff().rank() == candidate.cols
    else:
        items["unit_invariant_factors"] = True
        items["column_reduced"] = True
    failed = next((k for k, v in items.items() if not v), None)
    return Certificate(failed is None, failed, items)


def _eval_rank(p: PolyMatrix) -> int:
    """Normal rank as the max rank over enough distinct rational points."""
    deg = p.degree()
    if deg == NEG_INF:
        return 0
    r = min(p.rows, p.cols)
    best = 0
    for t in range(r * int(deg) + 1):
        best = max(best, p.eval(t).rank())
        if best == r:
            break
    return best


def oracle_minimal_indices(g, side: str = "right", degree_cap: int = 8) -> List[int]:
    """Brute-force minimal indices from dimensions of degree-bounded kernels.

    With a_k the dimension of kernel vectors of degree <= k, the number of
    indices <= k is a_k - a_{k-1}.
    """
    if degree_cap < 0:
        raise ValueError("degree_cap must be non-negative")
    h = _oriented(g, side)
    p = h.row_cleared()
    rows, m = p.rows, p.cols
    nullity = m - _eval_rank(p)
    if nullity == 0:
        return []
    dp = 0 if p.is_zero() else max(int(p.degree()), 0)
    coeffs = [p.coeff(t) for t in range(dp + 1)]
    a_prev = 0
    count_prev = 0
    out: List[int] = []
    for delta in range(degree_cap + 1):
        neq, nunk = (dp + delta + 1) * rows, (delta + 1) * m
        sysm = fmpq_mat(neq, nunk)
        for t in range(dp + delta + 1):
            for i in range(delta + 1):
                if 0 <= t - i <= dp:
                    c = coeffs[t - i]
                    for r in range(rows):
                        for s in range(m):
                            if c[r, s] != 0:
                                sysm[t * rows + r, i * m + s] = c[r, s]
        a = nunk - sysm.rank()
        count = a - a_prev
        out.extend([delta] * (count - count_prev))
        if count == nullity:
            return out
        a_prev, count_prev = a, count
    raise ValueError(
        f"degree cap {degree_cap} too small: found {len(out)} of {nullity} minimal indices")
