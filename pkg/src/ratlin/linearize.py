"""Strong block minimal bases linearizations, M1 / M2 families, and recovery rules.

Every linearization object exposes the same small interface:

* ``pencil``: the assembled :class:`Pencil` (with its state size ``n``),
* ``g``: the rational matrix it linearizes,
* ``recovery_matrix(side)``: constant matrix R with ``R * H_L`` a minimal basis of G,
* ``shift(side)``: amount by which the minimal indices of L exceed those of G,
* ``lift(basis)``: minimal basis of L built from one of G.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from flint import fmpq, fmpq_mat

from .exactalg import LAMBDA, NEG_INF, ONE_POLY, Poly, rat
from .minbases import MinimalBasis, is_minimal_basis, nullspace_const, sorted_col_degrees
from .polymat import PolyMatrix, RatMatrix, as_poly_matrix, as_rat_matrix, rank
from .sysmat import (
    CertificationError,
    PolySystemMatrix,
    PreconditionError,
    StateSpaceRealization,
    minimal_realization,
)


# ---------------------------------------------------------------------------
# small constant helpers


def eye(n: int) -> fmpq_mat:
    m = fmpq_mat(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def unit_vector(k: int, i: int) -> fmpq_mat:
    """Row vector e_i^T in F^k (0-based i)."""
    m = fmpq_mat(1, k)
    m[0, i] = 1
    return m


def kron_eye(p, w: int) -> PolyMatrix:
    """p (x) I_w for a polynomial or constant matrix p."""
    p = as_poly_matrix(p)
    out = PolyMatrix(p.rows * w, p.cols * w)
    for i in range(p.rows):
        for j in range(p.cols):
            x = p.entries[i][j]
            if x:
                for t in range(w):
                    out.entries[i * w + t][j * w + t] = x
    return out


def _const(m) -> PolyMatrix:
    return PolyMatrix.from_const(m) if isinstance(m, fmpq_mat) else as_poly_matrix(m)


def _to_const(p: PolyMatrix) -> fmpq_mat:
    if p.degree() not in (NEG_INF, 0):
        raise ValueError("matrix is not constant")
    return p.coeff(0)


def _vec(v, k: int) -> fmpq_mat:
    """Row vector from a sequence of scalars (or None for e_1)."""
    if v is None:
        return unit_vector(k, 0)
    if isinstance(v, fmpq_mat):
        v = [v[i, j] for i in range(v.nrows()) for j in range(v.ncols())]
    v = [rat(x) for x in v]
    if len(v) != k:
        raise ValueError(f"vector of length {len(v)}, expected {k}")
    m = fmpq_mat(1, k)
    for i, x in enumerate(v):
        m[0, i] = x
    return m


def block_transpose(p, rb: int, cb: int):
    """Block transpose of a matrix partitioned in rb x cb blocks."""
    p = _const(p)
    br, bc = p.rows // rb, p.cols // cb
    if br * rb != p.rows or bc * cb != p.cols:
        raise ValueError("matrix is not partitioned by the given block size")
    out = PolyMatrix(bc * rb, br * cb)
    for i in range(br):
        for j in range(bc):
            for a in range(rb):
                for b in range(cb):
                    out.entries[j * rb + a][i * cb + b] = p.entries[i * rb + a][j * cb + b]
    return out


# ---------------------------------------------------------------------------
# pencils


@dataclass
class Pencil:
    """lambda * l1 + l0, with the first ``n`` rows/columns forming the state block."""

    l1: fmpq_mat
    l0: fmpq_mat
    n: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.l1.nrows(), self.l1.ncols()) != (self.l0.nrows(), self.l0.ncols()):
            raise ValueError("pencil coefficients differ in shape")

    @staticmethod
    def from_poly(p: PolyMatrix, n: int = 0, meta: dict = None) -> "Pencil":
        p = as_poly_matrix(p)
        if p.degree() != NEG_INF and p.degree() > 1:
            raise ValueError("matrix has degree > 1")
        return Pencil(p.coeff(1), p.coeff(0), n, dict(meta or {}))

    @property
    def shape(self):
        return (self.l1.nrows(), self.l1.ncols())

    def poly(self) -> PolyMatrix:
        return PolyMatrix.pencil(self.l1, self.l0)

    def eval(self, x) -> fmpq_mat:
        x = rat(x)
        return self.l1 * x + self.l0

    def as_psm(self) -> PolySystemMatrix:
        return PolySystemMatrix.from_pencil(self.l1, self.l0, self.n)

    def to_json(self) -> dict:
        from .polymat import const_to_json

        return {"l1": const_to_json(self.l1), "l0": const_to_json(self.l0),
                "n": self.n, "meta": self.meta}

    @staticmethod
    def from_json(data) -> "Pencil":
        from .polymat import const_from_json

        return Pencil(const_from_json(data["l1"]), const_from_json(data["l0"]),
                      int(data.get("n", 0)), dict(data.get("meta", {})))


# ---------------------------------------------------------------------------
# dual minimal basis pairs


@dataclass
class DualMinimalBasisPair:
    """K, N dual minimal bases with [K; K_hat]^{-1} = [N_hat^T, N^T]."""

    k: PolyMatrix
    n_dual: PolyMatrix
    k_hat: fmpq_mat
    n_hat: PolyMatrix

    @property
    def width(self) -> int:
        """Number of rows of N (m or p in the linearization)."""
        return self.n_dual.rows

    @property
    def extra(self) -> int:
        """Number of rows of K (m_hat or p_hat)."""
        return self.k.rows

    @property
    def degree(self) -> int:
        d = self.n_dual.degree()
        return 0 if d == NEG_INF else int(d)

    def certify(self) -> dict:
        items = {}
        k, n = self.k, self.n_dual
        total = k.cols
        items["shapes"] = (n.cols == total and self.k_hat.ncols() == total
                           and self.k_hat.nrows() == n.rows and self.n_hat.shape == k.shape
                           and k.rows + n.rows == total)
        if not items["shapes"]:
            return items
        items["k_times_nt_zero"] = (k * n.T()).is_zero()
        items["k_row_degrees_one"] = all(d == 1 for d in k.row_degrees())
        nd = n.row_degrees()
        items["n_row_degrees_equal"] = len(set(nd)) <= 1
        u = PolyMatrix.vstack(k, _const(self.k_hat))
        w = PolyMatrix.hstack(self.n_hat.T(), n.T())
        items["unimodular_completion"] = u * w == PolyMatrix.identity(total)
        # full rank everywhere follows from the completion; reducedness from N_h / K_h
        items["k_row_reduced"] = k.rows == 0 or k.T().highest_col_coeff().rank() == k.rows
        items["n_row_reduced"] = n.rows == 0 or n.T().highest_col_coeff().rank() == n.rows
        return items

    def check(self) -> None:
        items = self.certify()
        bad = [name for name, ok in items.items() if not ok]
        if bad:
            raise PreconditionError(f"dual minimal basis pair fails: {bad[0]}")


def block_kronecker_pair(k_deg: int, width: int) -> DualMinimalBasisPair:
    """K = L_k (x) I_w, N = Lambda_k (x) I_w, K_hat = e_{k+1}^T (x) I_w."""
    if k_deg < 0:
        raise ValueError("k_deg must be non-negative")
    kk = PolyMatrix(k_deg, k_deg + 1)
    for i in range(k_deg):
        kk.entries[i][i] = Poly.const(-1)
        kk.entries[i][i + 1] = LAMBDA
    lam = PolyMatrix(1, k_deg + 1, [[Poly.monomial(k_deg - j) for j in range(k_deg + 1)]])
    nh = PolyMatrix(k_deg, k_deg + 1)
    # N_hat^T[i, j] = -lambda^{j-i} for i <= j, last row zero
    for i in range(k_deg):
        for j in range(i, k_deg):
            nh.entries[j][i] = Poly.monomial(j - i, -1)
    khat = unit_vector(k_deg + 1, k_deg)
    pair = DualMinimalBasisPair(kron_eye(kk, width), kron_eye(lam, width),
                                _to_const(kron_eye(PolyMatrix.from_const(khat), width)),
                                kron_eye(nh, width))
    pair.check()
    return pair


def complete_pair(k: PolyMatrix, n_dual: PolyMatrix, k_hat: fmpq_mat = None) -> DualMinimalBasisPair:
    """Constant K_hat and polynomial N_hat completing a dual pair (K, N).

    Without ``k_hat``, K_hat solves K_hat N_0^T = I and K_hat N_j^T = 0 for j >= 1,
    where N = sum_j N_j lambda^j. N_hat^T is the first block column of [K; K_hat]^{-1}.
    """
    k, n_dual = as_poly_matrix(k), as_poly_matrix(n_dual)
    m, total = n_dual.rows, n_dual.cols
    if k_hat is None:
        deg = max(int(n_dual.degree()), 0) if n_dual.degree() != NEG_INF else 0
        # K_hat * [N_0^T, ..., N_d^T] = [I, 0, ..., 0]
        lhs = fmpq_mat(total, m * (deg + 1))
        rhs = fmpq_mat(m, m * (deg + 1))
        for j in range(deg + 1):
            c = n_dual.coeff(j)
            for a in range(m):
                for b in range(total):
                    lhs[b, j * m + a] = c[a, b]
        for a in range(m):
            rhs[a, a] = 1
        try:
            sol = lhs.transpose().solve(rhs.transpose()) if lhs.nrows() == lhs.ncols() else None
        except ZeroDivisionError:
            sol = None
        if sol is None:
            sol = _least_solution(lhs.transpose(), rhs.transpose())
        if sol is None:
            raise PreconditionError("no constant K_hat with K_hat N^T = I")
        k_hat = sol.transpose()
    u = PolyMatrix.vstack(k, PolyMatrix.from_const(k_hat)).to_rat()
    try:
        inv = u.inverse()
    except ZeroDivisionError:
        raise PreconditionError("[K; K_hat] is singular") from None
    if not inv.is_poly():
        raise PreconditionError("[K; K_hat] is not unimodular")
    inv = inv.to_poly()
    if not inv.cols_slice(k.rows, total) == n_dual.T():
        raise PreconditionError("last block column of [K; K_hat]^{-1} is not N^T")
    pair = DualMinimalBasisPair(k, n_dual, k_hat, inv.cols_slice(0, k.rows).T())
    pair.check()
    return pair


def _least_solution(a: fmpq_mat, b: fmpq_mat) -> Optional[fmpq_mat]:
    """Some X with a X = b, or None."""
    rows, cols = a.nrows(), a.ncols()
    aug = fmpq_mat(rows, cols + b.ncols())
    for i in range(rows):
        for j in range(cols):
            aug[i, j] = a[i, j]
        for j in range(b.ncols()):
            aug[i, cols + j] = b[i, j]
    rr, rk = aug.rref()
    x = fmpq_mat(cols, b.ncols())
    r = 0
    for c in range(cols + b.ncols()):
        if r < rk and rr[r, c] != 0:
            if c >= cols:
                return None
            for j in range(b.ncols()):
                x[c, j] = rr[r, cols + j]
            r += 1
    return x


# ---------------------------------------------------------------------------
# bodies and the antidiagonal sum condition


def _coeff_blocks(d: PolyMatrix) -> List[fmpq_mat]:
    deg = int(d.degree())
    return [d.coeff(j) for j in range(deg + 1)]


def default_body(d, eps_deg: int, eta_deg: int) -> PolyMatrix:
    """Body M with D = (Lambda_eta (x) I) M (Lambda_eps (x) I)^T.

    Block (1,1) holds lambda D_q + D_{q-1}, the rest of the first block row holds
    D_{q-2}, ..., D_eta and the last block column continues down to D_0.
    """
    d = as_poly_matrix(d)
    q = eps_deg + eta_deg + 1
    if d.degree() == NEG_INF or int(d.degree()) != q:
        raise PreconditionError(f"deg D must equal eps + eta + 1 = {q}")
    p, m = d.rows, d.cols
    cs = _coeff_blocks(d)
    body = PolyMatrix((eta_deg + 1) * p, (eps_deg + 1) * m)

    def put(bi, bj, c1, c0):
        for a in range(p):
            for b in range(m):
                x = Poly([c0[a, b], c1[a, b]]) if c1 is not None else Poly([c0[a, b]])
                body.entries[bi * p + a][bj * m + b] = x

    put(0, 0, cs[q], cs[q - 1])
    for j in range(1, eps_deg + 1):
        put(0, j, None, cs[q - 1 - j])
    for i in range(1, eta_deg + 1):
        put(i, eps_deg, None, cs[eta_deg - i])
    return body


def as_condition(body, d, eps_deg: int, eta_deg: int) -> dict:
    """Antidiagonal sums of the body against the coefficients of D (1-based blocks)."""
    body, d = as_poly_matrix(body), as_poly_matrix(d)
    p, m = d.rows, d.cols
    q = eps_deg + eta_deg + 1
    if body.shape != ((eta_deg + 1) * p, (eps_deg + 1) * m):
        raise ValueError("body has the wrong shape")
    m1, m0 = body.coeff(1), body.coeff(0)
    if body.degree() != NEG_INF and body.degree() > 1:
        return {"pencil": False}
    items = {"pencil": True}

    def blk(mat, i, j):
        out = fmpq_mat(p, m)
        for a in range(p):
            for b in range(m):
                out[a, b] = mat[(i - 1) * p + a, (j - 1) * m + b]
        return out

    for k in range(q + 1):
        acc = fmpq_mat(p, m)
        for i in range(1, eta_deg + 2):
            for j in range(1, eps_deg + 2):
                if i + j == q + 2 - k:
                    acc += blk(m1, i, j)
                if i + j == q + 1 - k:
                    acc += blk(m0, i, j)
        items[f"D{k}"] = acc == d.coeff(k)
    items["ok"] = all(items.values())
    items["corner"] = blk(m0, eta_deg + 1, eps_deg + 1) == d.coeff(0)
    return items


# ---------------------------------------------------------------------------
# strong block minimal bases linearizations


def _resolvent_b(real: StateSpaceRealization) -> RatMatrix:
    """(lambda I - A)^{-1} B."""
    a = PolyMatrix.pencil(eye(real.n), -real.a_mat).to_rat()
    return a.solve(RatMatrix.from_const(real.b_mat))


def _c_resolvent(real: StateSpaceRealization) -> RatMatrix:
    """C (lambda I - A)^{-1}."""
    at = PolyMatrix.pencil(eye(real.n), -real.a_mat.transpose()).to_rat()
    return at.solve(RatMatrix.from_const(real.c_mat.transpose())).T()


def _split(g) -> tuple:
    g = as_rat_matrix(g)
    d, sp = g.decompose()
    return g, d, sp


@dataclass
class SbmbLinearization:
    g: RatMatrix
    pencil: Pencil
    m_body: PolyMatrix
    pair1: DualMinimalBasisPair
    pair2: DualMinimalBasisPair
    t_mat: fmpq_mat
    s_mat: fmpq_mat
    realization: StateSpaceRealization

    @property
    def n(self) -> int:
        return self.realization.n

    @property
    def eps_deg(self) -> int:
        return self.pair1.degree

    @property
    def eta_deg(self) -> int:
        return self.pair2.degree

    @property
    def m_hat(self) -> int:
        return self.pair1.extra

    @property
    def p_hat(self) -> int:
        return self.pair2.extra

    def shift(self, side: str) -> int:
        return self.eps_deg if side == "right" else self.eta_deg

    def recovery_matrix(self, side: str) -> fmpq_mat:
        """Constant R with R * (basis of L) = basis of G."""
        rows, cols = self.pencil.shape
        n = self.n
        if side == "right":
            khat, size = self.pair1.k_hat, cols
        else:
            khat, size = self.pair2.k_hat, rows
        r = fmpq_mat(khat.nrows(), size)
        for i in range(khat.nrows()):
            for j in range(khat.ncols()):
                r[i, n + j] = khat[i, j]
        return r

    def lift(self, basis_of_g: MinimalBasis, certify: bool = True) -> MinimalBasis:
        return lift_basis_to_sbmb(self, basis_of_g, certify=certify)

    def to_json(self) -> dict:
        out = self.pencil.to_json()
        out["meta"] = dict(out["meta"], kind="sbmb", eps=self.eps_deg, eta=self.eta_deg)
        return out


def build_sbmb(g, pair1: DualMinimalBasisPair, pair2: DualMinimalBasisPair, m_body,
               t_mat: fmpq_mat = None, s_mat: fmpq_mat = None,
               realization: StateSpaceRealization = None) -> SbmbLinearization:
    g, d, sp = _split(g)
    p, m = g.rows, g.cols
    m_body = as_poly_matrix(m_body)
    if d.degree() == NEG_INF or int(d.degree()) <= 1:
        raise PreconditionError("polynomial part must have degree at least 2")
    pair1.check()
    pair2.check()
    if pair1.width != m or pair2.width != p:
        raise PreconditionError("dual pairs do not match the size of G")
    if m_body.shape != (p + pair2.extra, m + pair1.extra):
        raise PreconditionError("body has the wrong shape")
    if m_body.degree() != NEG_INF and m_body.degree() > 1:
        raise PreconditionError("body is not a pencil")
    if not (pair2.n_dual * m_body * pair1.n_dual.T() == d):
        raise PreconditionError("D != N_2 M N_1^T")
    if int(d.degree()) != pair1.degree + pair2.degree + 1:
        raise PreconditionError("degree of D is not deg N_1 + deg N_2 + 1")
    real = realization if realization is not None else minimal_realization(sp)
    if realization is not None and not (real.transfer(p, m) == sp):
        raise PreconditionError("realization does not reproduce the strictly proper part")
    n = real.n
    t_mat = eye(n) if t_mat is None else t_mat
    s_mat = eye(n) if s_mat is None else s_mat
    if n and (t_mat.rank() < n or s_mat.rank() < n):
        raise PreconditionError("T and S must be nonsingular")
    m_hat, p_hat = pair1.extra, pair2.extra
    if n:
        top_left = PolyMatrix.pencil(t_mat * s_mat, -(t_mat * real.a_mat * s_mat))
        top_mid = PolyMatrix.from_const(t_mat * real.b_mat * pair1.k_hat)
        mid_left = PolyMatrix.from_const(-(pair2.k_hat.transpose() * real.c_mat * s_mat))
    else:
        top_left = top_mid = mid_left = None
    grid = []
    if n:
        grid.append([top_left, top_mid, PolyMatrix(n, p_hat)])
    grid.append([mid_left if n else None, m_body, pair2.k.T()])
    grid.append([PolyMatrix(m_hat, n) if n else None, pair1.k, PolyMatrix(m_hat, p_hat)])
    if not n:
        grid = [row[1:] for row in grid]
    big = _block_allow_empty(grid)
    pencil = Pencil.from_poly(big, n, {"kind": "sbmb", "eps": pair1.degree, "eta": pair2.degree})
    return SbmbLinearization(g, pencil, m_body, pair1, pair2, t_mat, s_mat, real)


def _block_allow_empty(grid) -> PolyMatrix:
    """PolyMatrix.block that tolerates block rows/cols of size zero."""
    heights = [next(m.rows for m in row if m is not None) for row in grid]
    widths = [next(row[j].cols for row in grid if row[j] is not None) for j in range(len(grid[0]))]
    out = PolyMatrix(sum(heights), sum(widths))
    r0 = 0
    for bi, row in enumerate(grid):
        c0 = 0
        for bj, m in enumerate(row):
            if m is not None:
                if m.shape != (heights[bi], widths[bj]):
                    raise ValueError("inconsistent block sizes")
                for i in range(m.rows):
                    out.entries[r0 + i][c0:c0 + m.cols] = list(m.entries[i])
            c0 += widths[bj]
        r0 += heights[bi]
    return out


def block_kronecker(g, eps_deg: int, eta_deg: int, t_mat=None, s_mat=None, body=None) -> SbmbLinearization:
    """Block Kronecker linearization with the default body."""
    g, d, _ = _split(g)
    if body is None:
        body = default_body(d, eps_deg, eta_deg)
    return build_sbmb(g, block_kronecker_pair(eps_deg, g.cols), block_kronecker_pair(eta_deg, g.rows),
                      body, t_mat, s_mat)


def kronecker_splits(g) -> List[tuple]:
    """All (eps, eta) with eps + eta + 1 = deg D."""
    _, d, _ = _split(g)
    q = int(d.degree())
    return [(e, q - 1 - e) for e in range(q)]


def transfer_of_sbmb(lin: SbmbLinearization) -> RatMatrix:
    """G_hat = [[M + K2hat^T C (lambda I - A)^{-1} B K1hat, K2^T], [K1, 0]]."""
    top = lin.m_body.to_rat()
    if lin.n:
        cr = RatMatrix.from_const(lin.pair2.k_hat.transpose() * lin.realization.c_mat)
        top = top + cr * _resolvent_b(lin.realization) * RatMatrix.from_const(lin.pair1.k_hat)
    return _block_rat(lin, top)


def _block_rat(lin, top):
    m_hat, p_hat = lin.m_hat, lin.p_hat
    out = top
    if p_hat:
        out = RatMatrix.hstack(out, lin.pair2.k.T().to_rat())
    if m_hat:
        bottom = lin.pair1.k.to_rat()
        if p_hat:
            bottom = RatMatrix.hstack(bottom, RatMatrix(m_hat, p_hat))
        out = RatMatrix.vstack(out, bottom)
    return out


def sbmb_transformers(lin: SbmbLinearization):
    """Unimodular U, V with U G_hat V = diag(G, I)."""
    p1, p2, m = lin.pair1, lin.pair2, lin.m_body
    x = p2.n_hat * m * p1.n_dual.T()
    y = p2.n_dual * m * p1.n_hat.T()
    z = p2.n_hat * m * p1.n_hat.T()
    mm, m_hat, pp, p_hat = p1.width, p1.extra, p2.width, p2.extra
    v = _block_allow_empty([
        [p1.n_dual.T(), p1.n_hat.T(), PolyMatrix(mm + m_hat, p_hat)],
        [-x, PolyMatrix(p_hat, m_hat), PolyMatrix.identity(p_hat)],
    ] if p_hat else [[p1.n_dual.T(), p1.n_hat.T(), PolyMatrix(mm + m_hat, 0)]])
    u_rows = [[p2.n_dual, -y]]
    u_rows.append([PolyMatrix(m_hat, pp + p_hat), PolyMatrix.identity(m_hat)])
    if p_hat:
        u_rows.append([p2.n_hat, -z])
    u = _block_allow_empty(u_rows) if m_hat else PolyMatrix.vstack(*[r[0] for r in u_rows if r[0].rows])
    return u, v


def uv_certificate(lin: SbmbLinearization) -> bool:
    u, v = sbmb_transformers(lin)
    lhs = u.to_rat() * transfer_of_sbmb(lin) * v.to_rat()
    p, m = lin.g.shape
    extra = lin.m_hat + lin.p_hat
    rhs = RatMatrix(p + extra, m + extra)
    for i in range(p):
        for j in range(m):
            rhs.entries[i][j] = lin.g.entries[i][j]
    for t in range(extra):
        rhs.entries[p + t][m + t] = RatMatrix._one
    return lhs == rhs


# ---------------------------------------------------------------------------
# generic recovery and lifting


def _certified(h: PolyMatrix, target, side: str, what: str) -> MinimalBasis:
    cert = is_minimal_basis(h, target, side)
    if not cert:
        raise CertificationError(f"{what} is not a minimal basis: {cert.failed}")
    return MinimalBasis(side, h, sorted_col_degrees(h))


def _check_basis_of(basis: MinimalBasis, target, what: str) -> None:
    cert = is_minimal_basis(basis.basis, target, basis.side)
    if not cert:
        raise PreconditionError(f"input is not a minimal basis of {what}: {cert.failed}")


def recover_basis(lin, basis_of_l: MinimalBasis, certify: bool = True) -> MinimalBasis:
    """Minimal basis of G read off one of L through the constant recovery matrix."""
    side = basis_of_l.side
    if certify:
        _check_basis_of(basis_of_l, lin.pencil.poly(), "L")
    r = PolyMatrix.from_const(lin.recovery_matrix(side))
    h = r * basis_of_l.basis
    out = _certified(h, lin.g, side, "recovered basis") if certify else \
        MinimalBasis(side, h, sorted_col_degrees(h))
    sh = lin.shift(side)
    if [i + sh for i in out.indices] != list(basis_of_l.indices):
        raise CertificationError("minimal indices do not follow the shift law")
    return out


def recover_basis_from_sbmb(lin: SbmbLinearization, basis_of_l: MinimalBasis,
                            certify: bool = True) -> MinimalBasis:
    return recover_basis(lin, basis_of_l, certify)


def lift_basis_to_sbmb(lin: SbmbLinearization, basis_of_g: MinimalBasis,
                       certify: bool = True) -> MinimalBasis:
    """Right: [-S^{-1}(lambda I-A)^{-1}B H; N_1^T H; -N_2hat M N_1^T H].

    Left: [(C(lambda I-A)^{-1}T^{-1})^T H; N_2^T H; -N_1hat M^T N_2^T H].
    """
    side = basis_of_g.side
    h = basis_of_g.basis
    if certify:
        _check_basis_of(basis_of_g, lin.g, "G")
    if side == "right":
        own, other, body = lin.pair1, lin.pair2, lin.m_body
    else:
        own, other, body = lin.pair2, lin.pair1, lin.m_body.T()
    h2 = own.n_dual.T() * h
    h3 = -(other.n_hat * body * h2)
    blocks = [h2, h3]
    if lin.n:
        real = lin.realization
        if side == "right":
            top = -(RatMatrix.from_const(lin.s_mat.inv()) * _resolvent_b(real))
        else:
            top = (_c_resolvent(real) * RatMatrix.from_const(lin.t_mat.inv())).T()
        h1 = top * h.to_rat()
        if not h1.is_poly():
            raise CertificationError("state block of the lifted basis is not polynomial")
        blocks.insert(0, h1.to_poly())
    z = PolyMatrix.vstack(*[b for b in blocks if b.rows])
    out = _certified(z, lin.pencil.poly(), side, "lifted basis") if certify else \
        MinimalBasis(side, z, sorted_col_degrees(z))
    sh = lin.shift(side)
    if certify:
        hd = h.col_degrees()
        zd = z.col_degrees()
        if any(zd[j] != hd[j] + sh for j in range(h.cols)):
            raise CertificationError("lifted column degrees break deg z = deg N + deg h")
    return out


# ---------------------------------------------------------------------------
# three-term recurrences


@dataclass
class OrthogonalRecurrence:
    """alpha_j phi_{j+1} = (lambda - beta_j) phi_j - gamma_j phi_{j-1}, phi_{-1}=0, phi_0=1."""

    alpha: Sequence
    beta: Sequence
    gamma: Sequence

    def __post_init__(self):
        self.alpha = [rat(x) for x in self.alpha]
        self.beta = [rat(x) for x in self.beta]
        self.gamma = [rat(x) for x in self.gamma]
        if not (len(self.alpha) == len(self.beta) == len(self.gamma)):
            raise ValueError("alpha, beta, gamma must have the same length")
        if any(a == 0 for a in self.alpha):
            raise ValueError("alpha_j must be nonzero")

    @staticmethod
    def constant(alpha, beta, gamma, length: int) -> "OrthogonalRecurrence":
        return OrthogonalRecurrence([alpha] * length, [beta] * length, [gamma] * length)

    @staticmethod
    def monomial(length: int) -> "OrthogonalRecurrence":
        return OrthogonalRecurrence.constant(1, 0, 0, length)

    def __len__(self):
        return len(self.alpha)

    def polys(self, k: int) -> List[Poly]:
        """phi_0, ..., phi_k."""
        if k > len(self.alpha):
            raise ValueError(f"recurrence has only {len(self.alpha)} steps, need {k}")
        out = [ONE_POLY]
        prev = Poly()
        for j in range(k):
            nxt = ((LAMBDA - Poly.const(self.beta[j])) * out[j] - prev * Poly.const(self.gamma[j])) \
                * Poly.const(1 / self.alpha[j])
            prev = out[j]
            out.append(nxt)
        return out

    def expand(self, d) -> List[fmpq_mat]:
        """Coefficients D_j with D = sum_j D_j phi_j."""
        d = as_poly_matrix(d)
        k = int(d.degree())
        phis = self.polys(k)
        rem = [d.coeff(t) for t in range(k + 1)]
        out = [None] * (k + 1)
        for j in range(k, -1, -1):
            c = rem[j] * (1 / phis[j].lc())
            out[j] = c
            for t in range(j + 1):
                x = phis[j].coeff(t)
                if x != 0:
                    rem[t] = rem[t] - c * x
        return out

    def matrix(self, k: int) -> PolyMatrix:
        """M_Phi, the (k-1) x k pencil with M_Phi [phi_{k-1} ... phi_0]^T = 0."""
        mp = PolyMatrix(k - 1, k)
        for r in range(k - 1):
            j = k - 2 - r
            mp.entries[r][r] = Poly.const(-self.alpha[j])
            mp.entries[r][r + 1] = LAMBDA - Poly.const(self.beta[j])
            if r + 2 < k:
                mp.entries[r][r + 2] = Poly.const(-self.gamma[j])
        return mp

    def phi_vector(self, k: int) -> PolyMatrix:
        """Phi_k = [phi_{k-1}, ..., phi_0]^T."""
        phis = self.polys(k - 1)
        return PolyMatrix(k, 1, [[phis[k - 1 - i]] for i in range(k)])

    def body(self, d) -> PolyMatrix:
        """m_Phi^D, the m x km pencil with m_Phi^D (Phi_k (x) I) = D."""
        d = as_poly_matrix(d)
        k = int(d.degree())
        if k < 2:
            raise PreconditionError("degree of D must be at least 2")
        cs = self.expand(d)
        p, m = d.rows, d.cols
        a, b, c = self.alpha[k - 1], self.beta[k - 1], self.gamma[k - 1]
        out = PolyMatrix(p, k * m)
        blocks = [None] * k
        blocks[0] = (cs[k] * (1 / a), cs[k - 1] - cs[k] * (b / a))
        blocks[1] = (None, cs[k - 2] - cs[k] * (c / a))
        for i in range(2, k):
            blocks[i] = (None, cs[k - 1 - i])
        for bj, (c1, c0) in enumerate(blocks):
            for r in range(p):
                for s in range(m):
                    coeffs = [c0[r, s]] + ([c1[r, s]] if c1 is not None else [])
                    out.entries[r][bj * m + s] = Poly(coeffs)
        return out


# ---------------------------------------------------------------------------
# M1, extended M1 and M2


def _unimodular_completion(m_psi: PolyMatrix, w: fmpq_mat):
    """(R, Psi_k) with [M_Psi; w^T]^{-1} = [R, Psi_k]."""
    k = m_psi.cols
    u = PolyMatrix.vstack(m_psi, PolyMatrix.from_const(w)).to_rat()
    try:
        inv = u.inverse()
    except ZeroDivisionError:
        raise PreconditionError("[M_Psi; w^T] is singular") from None
    if not inv.is_poly():
        raise PreconditionError("[M_Psi; w^T] is not unimodular")
    inv = inv.to_poly()
    return inv.cols_slice(0, k - 1), inv.cols_slice(k - 1, k)


def _check_dual(m_psi: PolyMatrix, psi: PolyMatrix) -> None:
    if not (m_psi * psi).is_zero():
        raise PreconditionError("M_Psi is not dual to Psi_k")
    if any(d != 1 for d in m_psi.row_degrees()):
        raise PreconditionError("M_Psi must have all row degrees equal to 1")
    degs = [psi.entries[i][0].degree for i in range(psi.rows)]
    if degs != list(range(psi.rows - 1, -1, -1)):
        raise PreconditionError("Psi_k is not degree graded")


@dataclass
class PremultLinearization:
    """X * base * Y for an SBMB base pencil; covers the M1 and M2 families.

    ``recovery_rows`` give the theorem's direct extraction rules; the generic
    path through the base pencil is exposed as ``base_recovery_matrix``.
    """

    g: RatMatrix
    pencil: Pencil
    base: SbmbLinearization
    x_mat: fmpq_mat
    y_mat: fmpq_mat
    direct: dict
    shifts: dict
    family: str
    params: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.base.n

    def shift(self, side: str) -> int:
        return self.shifts[side]

    def recovery_matrix(self, side: str) -> fmpq_mat:
        return self.direct[side]

    def base_recovery_matrix(self, side: str) -> fmpq_mat:
        """Recovery through the base pencil: a basis of X L Y maps to Y H (right) or X^T H (left)."""
        if side == "right":
            return self.base.recovery_matrix("right") * self.y_mat
        return self.base.recovery_matrix("left") * self.x_mat.transpose()

    def lift(self, basis_of_g: MinimalBasis, certify: bool = True) -> MinimalBasis:
        b = lift_basis_to_sbmb(self.base, basis_of_g, certify=certify)
        if basis_of_g.side == "right":
            h = PolyMatrix.from_const(self.y_mat.inv()) * b.basis
        else:
            h = PolyMatrix.from_const(self.x_mat.transpose().inv()) * b.basis
        if certify:
            return _certified(h, self.pencil.poly(), basis_of_g.side, "lifted basis")
        return MinimalBasis(basis_of_g.side, h, sorted_col_degrees(h))

    def to_json(self) -> dict:
        out = self.pencil.to_json()
        out["meta"] = dict(out["meta"], kind=self.family)
        return out


def _embed(n: int, inner: fmpq_mat) -> fmpq_mat:
    """diag(I_n, inner)."""
    size = n + inner.nrows()
    out = fmpq_mat(size, n + inner.ncols())
    for i in range(n):
        out[i, i] = 1
    for i in range(inner.nrows()):
        for j in range(inner.ncols()):
            out[n + i, n + j] = inner[i, j]
    return out


def _v_block(v: fmpq_mat, j_mat: fmpq_mat, m: int) -> fmpq_mat:
    """[v (x) I_m, J]."""
    k = v.ncols()
    vi = _to_const(kron_eye(PolyMatrix.from_const(v.transpose()), m))
    if j_mat is None:
        # complete with the unit vectors outside the support of v's first nonzero slot
        lead = next(i for i in range(k) if v[0, i] != 0)
        j_mat = fmpq_mat(k * m, (k - 1) * m)
        col = 0
        for blk in range(k):
            if blk == lead:
                continue
            for t in range(m):
                j_mat[blk * m + t, col] = 1
                col += 1
    if (j_mat.nrows(), j_mat.ncols()) != (k * m, (k - 1) * m):
        raise PreconditionError("J has the wrong shape")
    out = fmpq_mat(k * m, k * m)
    for i in range(k * m):
        for j in range(m):
            out[i, j] = vi[i, j]
        for j in range(j_mat.ncols()):
            out[i, m + j] = j_mat[i, j]
    if out.rank() < k * m:
        raise PreconditionError("[v (x) I_m, J] is singular")
    return out


def _recovery_rows(size: int, start: int, block: fmpq_mat) -> fmpq_mat:
    r = fmpq_mat(block.nrows(), size)
    for i in range(block.nrows()):
        for j in range(block.ncols()):
            r[i, start + j] = block[i, j]
    return r


def extended_m1_build(g, m_psi, m_psi_body, w=None, v=None, j_mat: fmpq_mat = None,
                      t_mat: fmpq_mat = None, s_mat: fmpq_mat = None) -> PremultLinearization:
    """Extended M1 linearization for a degree-graded basis described by M_Psi."""
    g, d, _ = _split(g)
    if g.rows != g.cols:
        raise PreconditionError("M1 linearizations need a square matrix")
    m = g.cols
    m_psi, m_psi_body = as_poly_matrix(m_psi), as_poly_matrix(m_psi_body)
    k = m_psi.cols
    if d.degree() == NEG_INF or int(d.degree()) != k or k < 2:
        raise PreconditionError("need deg D = k >= 2 matching M_Psi")
    if m_psi.rows != k - 1:
        raise PreconditionError("M_Psi must be (k-1) x k")
    w = _vec(w, k) if w is not None else unit_vector(k, k - 1)
    v = _vec(v, k)
    r_mat, psi = _unimodular_completion(m_psi, w)
    _check_dual(m_psi, psi)
    if not (m_psi_body * kron_eye(psi, m) == d):
        raise PreconditionError("m_Psi^D (Psi_k (x) I) != D")
    pair1 = DualMinimalBasisPair(kron_eye(m_psi, m), kron_eye(psi.T(), m),
                                 _to_const(kron_eye(PolyMatrix.from_const(w), m)),
                                 kron_eye(r_mat.T(), m))
    pair2 = DualMinimalBasisPair(PolyMatrix(0, m), PolyMatrix.identity(m), eye(m), PolyMatrix(0, m))
    base = build_sbmb(g, pair1, pair2, m_psi_body, t_mat, s_mat)
    n = base.n
    vj = _v_block(v, j_mat, m)
    x = _embed(n, vj)
    y = eye(n + k * m)
    pen = base.pencil
    l1, l0 = x * pen.l1, x * pen.l0
    size_r, size_c = l1.nrows(), l1.ncols()
    direct = {
        "right": _recovery_rows(size_c, size_c - m, eye(m)),
        "left": _recovery_rows(size_r, n, _to_const(kron_eye(PolyMatrix.from_const(v), m))),
    }
    out = PremultLinearization(g, Pencil(l1, l0, n, {"kind": "extended-m1", "k": k}), base, x, y,
                               direct, {"right": k - 1, "left": 0}, "extended-m1",
                               {"k": k, "v": v, "w": w, "psi": psi})
    return out


def m1_build(g, rec: OrthogonalRecurrence = None, v=None, j_mat: fmpq_mat = None,
             t_mat: fmpq_mat = None, s_mat: fmpq_mat = None) -> PremultLinearization:
    """M1 linearization X * L with X = diag(I_n, [v (x) I_m, J])."""
    g, d, _ = _split(g)
    if d.degree() == NEG_INF or int(d.degree()) < 2:
        raise PreconditionError("degree of D must be at least 2")
    k = int(d.degree())
    rec = rec if rec is not None else OrthogonalRecurrence.monomial(k)
    lin = extended_m1_build(g, rec.matrix(k), rec.body(d), None, v, j_mat, t_mat, s_mat)
    lin.family = "m1"
    lin.pencil.meta["kind"] = "m1"
    return lin


def m1_recover(lin: PremultLinearization, basis_of_l: MinimalBasis, certify: bool = True) -> MinimalBasis:
    """Right: the last m rows. Left: (v^T (x) I_m) applied to the lower block."""
    return recover_basis(lin, basis_of_l, certify)


def m2_build(g, rec: OrthogonalRecurrence = None, w=None, j_block: fmpq_mat = None,
             t_mat: fmpq_mat = None, s_mat: fmpq_mat = None) -> PremultLinearization:
    """M2 linearization LL * Y with Y = diag(I_n, [w^T (x) I_m; J^B]).

    ``j_block`` is J (km x (k-1)m); its block transpose J^B is used.
    """
    g, d, _ = _split(g)
    if g.rows != g.cols:
        raise PreconditionError("M2 linearizations need a square matrix")
    if d.degree() == NEG_INF or int(d.degree()) < 2:
        raise PreconditionError("degree of D must be at least 2")
    m = g.cols
    k = int(d.degree())
    rec = rec if rec is not None else OrthogonalRecurrence.monomial(k)
    mphi = rec.matrix(k)
    ek = unit_vector(k, k - 1)
    q_mat, phi = _unimodular_completion(mphi, ek)
    body = block_transpose(rec.body(d), m, m)
    pair1 = DualMinimalBasisPair(PolyMatrix(0, m), PolyMatrix.identity(m), eye(m), PolyMatrix(0, m))
    pair2 = DualMinimalBasisPair(kron_eye(mphi, m), kron_eye(phi.T(), m),
                                 _to_const(kron_eye(PolyMatrix.from_const(ek), m)),
                                 kron_eye(q_mat.T(), m))
    base = build_sbmb(g, pair1, pair2, body, t_mat, s_mat)
    n = base.n
    w = _vec(w, k)
    # [w^T (x) I; J^B] is the block transpose of [w (x) I, J]
    wj = _v_block(w, j_block, m)
    inner = _to_const(block_transpose(PolyMatrix.from_const(wj), m, m))
    y = _embed(n, inner)
    x = eye(base.pencil.shape[0])
    pen = base.pencil
    l1, l0 = pen.l1 * y, pen.l0 * y
    size_r, size_c = l1.nrows(), l1.ncols()
    direct = {
        "right": _recovery_rows(size_c, n, _to_const(kron_eye(PolyMatrix.from_const(w), m))),
        "left": _recovery_rows(size_r, size_r - m, eye(m)),
    }
    return PremultLinearization(g, Pencil(l1, l0, n, {"kind": "m2", "k": k}), base, x, y, direct,
                                {"right": 0, "left": k - 1}, "m2", {"k": k, "w": w})


def m2_recover(lin: PremultLinearization, basis_of_l: MinimalBasis, certify: bool = True) -> MinimalBasis:
    """Right: (w^T (x) I_m) applied to the lower block. Left: the last m rows."""
    return recover_basis(lin, basis_of_l, certify)


# ---------------------------------------------------------------------------
# eigenvectors


@dataclass
class EigenRecovery:
    side: str
    basis: fmpq_mat
    is_eigenvalue: bool


def recover_eigenvectors(lin, lambda0, side: str = "right") -> EigenRecovery:
    """Basis of the null space of G(lambda0) from the null space of L(lambda0)."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    g = lin.g
    x0 = rat(lambda0)
    if g.rows != g.cols or rank(g) < g.rows:
        raise PreconditionError("eigenvector recovery needs a regular G")
    if any(e.den(x0) == 0 for r in g.entries for e in r):
        raise PreconditionError(f"{x0} is a pole of G")
    lval = lin.pencil.eval(x0)
    z = nullspace_const(lval if side == "right" else lval.transpose())
    vecs = lin.recovery_matrix(side) * z
    gval = g.eval(x0)
    target = nullspace_const(gval if side == "right" else gval.transpose())
    if vecs.ncols() != target.ncols() or (vecs.ncols() and vecs.rank() != vecs.ncols()):
        raise CertificationError("recovered vectors do not span the null space of G(lambda0)")
    check = (gval if side == "right" else gval.transpose()) * vecs
    if any(check[i, j] != 0 for i in range(check.nrows()) for j in range(check.ncols())):
        raise CertificationError("recovered vectors are not null vectors of G(lambda0)")
    return EigenRecovery(side, vecs, vecs.ncols() > 0)
