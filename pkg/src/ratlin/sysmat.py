"""Polynomial system matrices, their transfer functions, and minimal realizations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from flint import fmpq, fmpq_mat

from .exactalg import LAMBDA, Poly, RatFn
from .minbases import Certificate, MinimalBasis, is_minimal_basis, sorted_col_degrees
from .polymat import (
    PolyMatrix,
    RatMatrix,
    as_poly_matrix,
    as_rat_matrix,
    det_poly,
    has_unit_invariant_factors,
    infinity_structure,
    least_order,
    rank,
)


class PreconditionError(ValueError):
    """A theorem hypothesis does not hold for the given input."""


class CertificationError(AssertionError):
    """A computed object failed its exact certificate."""


@dataclass
class PolySystemMatrix:
    a: PolyMatrix
    b: PolyMatrix
    c: PolyMatrix
    d: PolyMatrix

    def __post_init__(self):
        self.a, self.b = as_poly_matrix(self.a), as_poly_matrix(self.b)
        self.c, self.d = as_poly_matrix(self.c), as_poly_matrix(self.d)
        n = self.a.rows
        if self.a.cols != n or self.b.rows != n or self.c.cols != n:
            raise ValueError("inconsistent block sizes in polynomial system matrix")
        if self.d.shape != (self.c.rows, self.b.cols):
            raise ValueError("D block does not match C rows and B columns")
        if n > 0 and det_poly(self.a).is_zero():
            raise ValueError("A block is singular")

    @property
    def n(self) -> int:
        return self.a.rows

    @property
    def p(self) -> int:
        return self.d.rows

    @property
    def m(self) -> int:
        return self.d.cols

    def assembled(self) -> PolyMatrix:
        return PolyMatrix.block([[self.a, self.b], [-self.c, self.d]])

    def to_json(self) -> dict:
        return {"n": self.n, "A": self.a.to_json(), "B": self.b.to_json(),
                "C": self.c.to_json(), "D": self.d.to_json()}

    @staticmethod
    def from_json(data) -> "PolySystemMatrix":
        from .polymat import matrix_from_json

        n = int(data["n"])
        d = matrix_from_json(data["D"]).to_poly()
        if n == 0:
            return PolySystemMatrix.empty_state(d)
        return PolySystemMatrix(*(matrix_from_json(data[k]).to_poly() for k in "ABC"), d)

    @staticmethod
    def empty_state(d) -> "PolySystemMatrix":
        d = as_poly_matrix(d)
        return PolySystemMatrix(PolyMatrix(0, 0), PolyMatrix(0, d.cols), PolyMatrix(d.rows, 0), d)

    @staticmethod
    def from_pencil(l1: fmpq_mat, l0: fmpq_mat, n: int) -> "PolySystemMatrix":
        """Split the pencil lambda*l1 + l0 after n rows/columns; the C block carries the minus sign."""
        lp = PolyMatrix.pencil(l1, l0)
        rows, cols = lp.rows, lp.cols
        a = lp.submatrix(range(n), range(n))
        b = lp.submatrix(range(n), range(n, cols))
        c = -lp.submatrix(range(n, rows), range(n))
        d = lp.submatrix(range(n, rows), range(n, cols))
        return PolySystemMatrix(a, b, c, d)


def transfer_function(p: PolySystemMatrix) -> RatMatrix:
    """G = D + C A^{-1} B."""
    if p.n == 0:
        return p.d.to_rat()
    return p.d.to_rat() + p.c.to_rat() * p.a.to_rat().solve(p.b)


def coprime_check(x, y, side: str = "right") -> bool:
    """Right: [x; y] has unit invariant factors.  Left: [x, y] does."""
    x, y = as_poly_matrix(x), as_poly_matrix(y)
    if side == "right":
        if x.cols != y.cols:
            raise ValueError("right coprimeness needs equal column counts")
        st = PolyMatrix.vstack(x, y)
        if st.cols == 0:
            return True
        return st.rows >= st.cols and has_unit_invariant_factors(st)
    if side == "left":
        if x.rows != y.rows:
            raise ValueError("left coprimeness needs equal row counts")
        return coprime_check(x.T(), y.T(), "right")
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def is_minimal(p: PolySystemMatrix) -> bool:
    if p.n == 0:
        return True
    return coprime_check(p.a, p.b, "left") and coprime_check(p.a, p.c, "right")


def a_inv_b(p: PolySystemMatrix) -> RatMatrix:
    return p.a.to_rat().solve(p.b)


def c_a_inv(p: PolySystemMatrix) -> RatMatrix:
    return p.a.T().to_rat().solve(p.c.T()).T()


def properness_conditions(p: PolySystemMatrix) -> Tuple[bool, bool]:
    """(A^{-1}B proper, C A^{-1} proper)."""
    if p.n == 0:
        return True, True
    return a_inv_b(p).is_proper(), c_a_inv(p).is_proper()


def irreducibility_orders(p: PolySystemMatrix):
    """Invariant orders at infinity of [A B 0; -C D -I] and [A B; -C D; 0 I]."""
    n, pp, m = p.n, p.p, p.m
    neg_i = PolyMatrix.identity(pp).scale(-1)
    wide = PolyMatrix.block([
        [p.a, p.b, PolyMatrix.zeros(n, pp)],
        [-p.c, p.d, neg_i],
    ])
    tall = PolyMatrix.block([
        [p.a, p.b],
        [-p.c, p.d],
        [PolyMatrix.zeros(m, n), PolyMatrix.identity(m)],
    ])
    return infinity_structure(wide).q, infinity_structure(tall).q


def strong_irreducibility(p: PolySystemMatrix) -> bool:
    if not is_minimal(p):
        return False
    q_wide, q_tall = irreducibility_orders(p)
    return all(q <= 0 for q in q_wide) and all(q <= 0 for q in q_tall)


def _transfer_preconditions(p: PolySystemMatrix, side: str) -> None:
    if p.n == 0:
        return
    ab_proper, ca_proper = properness_conditions(p)
    if side == "right":
        if not coprime_check(p.a, p.c, "right"):
            raise PreconditionError("A and C are not right coprime")
        if not ab_proper:
            raise PreconditionError("A^{-1}B is not proper")
    elif side == "left":
        if not coprime_check(p.a, p.b, "left"):
            raise PreconditionError("A and B are not left coprime")
        if not ca_proper:
            raise PreconditionError("C A^{-1} is not proper")
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def _top_map(p: PolySystemMatrix, side: str) -> RatMatrix:
    """The rational matrix X with H_1 = X H_2 for null vectors of P."""
    if side == "right":
        return -a_inv_b(p)
    return c_a_inv(p).T()


def transfer_minimal_basis(p: PolySystemMatrix, basis_of_p: MinimalBasis) -> MinimalBasis:
    """Minimal basis of G from one of P by dropping the top n rows."""
    side = basis_of_p.side
    _transfer_preconditions(p, side)
    big = p.assembled()
    cert = is_minimal_basis(basis_of_p.basis, big, side)
    if not cert:
        raise PreconditionError(f"input is not a minimal basis of P: {cert.failed}")
    n = p.n
    h = basis_of_p.basis
    h1 = h.rows_slice(0, n)
    h2 = h.rows_slice(n, h.rows)
    if n and not (_top_map(p, side) * h2.to_rat() == h1.to_rat()):
        raise CertificationError("top block is not X * H_2")
    g = transfer_function(p)
    cert = is_minimal_basis(h2, g, side)
    if not cert:
        raise CertificationError(f"stripped basis is not minimal for G: {cert.failed}")
    out = MinimalBasis(side, h2, sorted_col_degrees(h2))
    if out.indices != basis_of_p.indices:
        raise CertificationError("minimal indices changed under transfer")
    return out


def lift_minimal_basis(p: PolySystemMatrix, basis_of_g: MinimalBasis) -> MinimalBasis:
    """Minimal basis of P from one of G by prepending H_1 = X H_2."""
    side = basis_of_g.side
    _transfer_preconditions(p, side)
    g = transfer_function(p)
    cert = is_minimal_basis(basis_of_g.basis, g, side)
    if not cert:
        raise PreconditionError(f"input is not a minimal basis of G: {cert.failed}")
    h2 = basis_of_g.basis
    if p.n:
        h1r = _top_map(p, side) * h2.to_rat()
        if not h1r.is_poly():
            raise CertificationError("H_1 is not polynomial; coprimeness fails")
        h = PolyMatrix.vstack(h1r.to_poly(), h2)
    else:
        h = h2
    cert = is_minimal_basis(h, p.assembled(), side)
    if not cert:
        raise CertificationError(f"lifted basis is not minimal for P: {cert.failed}")
    out = MinimalBasis(side, h, sorted_col_degrees(h))
    if out.indices != basis_of_g.indices:
        raise CertificationError("minimal indices changed under lifting")
    return out


# ---------------------------------------------------------------------------
# state-space realizations


@dataclass
class StateSpaceRealization:
    a_mat: fmpq_mat
    b_mat: fmpq_mat
    c_mat: fmpq_mat
    e_mat: Optional[fmpq_mat] = None

    def __post_init__(self):
        if self.e_mat is None:
            self.e_mat = _eye(self.a_mat.nrows())

    @property
    def n(self) -> int:
        return self.a_mat.nrows()

    def transfer(self, p: int = None, m: int = None) -> RatMatrix:
        """C (lambda E - A)^{-1} B."""
        if self.n == 0:
            return RatMatrix(p or self.c_mat.nrows(), m or self.b_mat.ncols())
        pencil = PolyMatrix.pencil(self.e_mat, -self.a_mat)
        return RatMatrix.from_const(self.c_mat) * pencil.to_rat().solve(RatMatrix.from_const(self.b_mat))

    def as_psm(self, d=None) -> PolySystemMatrix:
        p, m = self.c_mat.nrows(), self.b_mat.ncols()
        d = PolyMatrix(p, m) if d is None else as_poly_matrix(d)
        a = PolyMatrix.pencil(self.e_mat, -self.a_mat)
        return PolySystemMatrix(a, PolyMatrix.from_const(self.b_mat), PolyMatrix.from_const(self.c_mat), d)

    def to_json(self) -> dict:
        from .polymat import const_to_json

        return {"n": self.n, "A": const_to_json(self.a_mat), "B": const_to_json(self.b_mat),
                "C": const_to_json(self.c_mat), "E": const_to_json(self.e_mat)}


def _eye(n: int) -> fmpq_mat:
    m = fmpq_mat(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def _col_basis_completion(cols: fmpq_mat):
    """Columns of ``cols`` spanning their image, then unit vectors completing to a basis."""
    n = cols.nrows()
    picked = fmpq_mat(n, 0)
    keep = []
    cur = 0
    for j in range(cols.ncols()):
        trial = _hcat(picked, _col(cols, j))
        r = trial.rank()
        if r > cur:
            picked, cur = trial, r
            keep.append(j)
    span = picked
    full = picked
    for i in range(n):
        if full.ncols() == n:
            break
        e = fmpq_mat(n, 1)
        e[i, 0] = 1
        trial = _hcat(full, e)
        if trial.rank() > full.ncols():
            full = trial
    return span, full


def _col(m: fmpq_mat, j: int) -> fmpq_mat:
    out = fmpq_mat(m.nrows(), 1)
    for i in range(m.nrows()):
        out[i, 0] = m[i, j]
    return out


def _hcat(a: fmpq_mat, b: fmpq_mat) -> fmpq_mat:
    out = fmpq_mat(a.nrows(), a.ncols() + b.ncols())
    for i in range(a.nrows()):
        for j in range(a.ncols()):
            out[i, j] = a[i, j]
        for j in range(b.ncols()):
            out[i, a.ncols() + j] = b[i, j]
    return out


def _vcat(a: fmpq_mat, b: fmpq_mat) -> fmpq_mat:
    return _hcat(a.transpose(), b.transpose()).transpose()


def _sub(m: fmpq_mat, rows, cols) -> fmpq_mat:
    rows, cols = list(rows), list(cols)
    out = fmpq_mat(len(rows), len(cols))
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            out[a, b] = m[i, j]
    return out


def _krylov(a: fmpq_mat, b: fmpq_mat) -> fmpq_mat:
    n = a.nrows()
    blocks = [b]
    for _ in range(1, n):
        blocks.append(a * blocks[-1])
    out = blocks[0]
    for blk in blocks[1:]:
        out = _hcat(out, blk)
    return out


def controllable_part(a: fmpq_mat, b: fmpq_mat, c: fmpq_mat):
    n = a.nrows()
    if n == 0:
        return a, b, c
    span, full = _col_basis_completion(_krylov(a, b))
    r = span.ncols()
    if r == n:
        return a, b, c
    tinv = full.inv()
    at = tinv * a * full
    bt = tinv * b
    ct = c * full
    return _sub(at, range(r), range(r)), _sub(bt, range(r), range(b.ncols())), _sub(ct, range(c.nrows()), range(r))


def observable_part(a: fmpq_mat, b: fmpq_mat, c: fmpq_mat):
    at, ct, bt = controllable_part(a.transpose(), c.transpose(), b.transpose())
    return at.transpose(), bt.transpose(), ct.transpose()


def minimal_realization(g_sp) -> StateSpaceRealization:
    """Minimal (A, B, C) with C (lambda I - A)^{-1} B = g_sp.

    Block controller form of N(lambda) (delta(lambda) I)^{-1}, then Kalman
    controllability and observability reductions.
    """
    g_sp = as_rat_matrix(g_sp)
    if not g_sp.is_strictly_proper():
        raise PreconditionError("minimal_realization needs a strictly proper matrix")
    p, m = g_sp.rows, g_sp.cols
    delta, num = g_sp.cleared()
    k = int(delta.degree)
    if k <= 0 or g_sp.is_zero():
        return StateSpaceRealization(fmpq_mat(0, 0), fmpq_mat(0, m), fmpq_mat(p, 0))
    nk = k * m
    a = fmpq_mat(nk, nk)
    for blk in range(k - 1):
        for i in range(m):
            a[blk * m + i, (blk + 1) * m + i] = 1
    for j in range(k):
        coef = -delta.coeff(j)
        if coef != 0:
            for i in range(m):
                a[(k - 1) * m + i, j * m + i] = coef
    b = fmpq_mat(nk, m)
    for i in range(m):
        b[(k - 1) * m + i, i] = 1
    c = fmpq_mat(p, nk)
    for j in range(k):
        cj = num.coeff(j)
        for r in range(p):
            for s in range(m):
                if cj[r, s] != 0:
                    c[r, j * m + s] = cj[r, s]
    a, b, c = controllable_part(a, b, c)
    a, b, c = observable_part(a, b, c)
    real = StateSpaceRealization(a, b, c)
    nu = least_order(g_sp)
    if real.n != nu:
        raise CertificationError(f"realization order {real.n} differs from least order {nu}")
    if not real.transfer() == g_sp:
        raise CertificationError("realization does not reproduce the strictly proper part")
    return real


def realization_is_minimal(real: StateSpaceRealization) -> bool:
    n = real.n
    if n == 0:
        return True
    ctrb = _krylov(real.a_mat, real.b_mat).rank() == n
    obsv = _krylov(real.a_mat.transpose(), real.c_mat.transpose()).rank() == n
    return ctrb and obsv
