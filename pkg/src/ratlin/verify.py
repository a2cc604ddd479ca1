"""Checkers for strong linearizations, invariant orders of pencils and index sums."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from flint import fmpq_mat

from .minbases import Certificate, MinimalBasis, minimal_basis, sorted_col_degrees
from .polymat import (
    InfinityStructure,
    PolyMatrix,
    RatMatrix,
    SmithMcMillanForm,
    as_poly_matrix,
    as_rat_matrix,
    infinity_structure,
    invariant_factors,
    pencil_infinity_structure,
    rank,
    smith_mcmillan_finite,
)
from .sysmat import PolySystemMatrix, PreconditionError, is_minimal

BRANCHES = ("B1nonzero", "B1zero_npos", "constant")


@dataclass
class StructuralReport:
    smith_mcmillan: SmithMcMillanForm
    infinity: InfinityStructure
    right_indices: List[int]
    left_indices: List[int]
    nu: int
    mu: int
    d: int
    rank: int = 0

    def to_json(self) -> dict:
        smf = self.smith_mcmillan
        return {
            "rank": self.rank,
            "eps": [e.to_json() for e in smf.eps],
            "psi": [p.to_json() for p in smf.psi],
            "q": list(self.infinity.q),
            "right_indices": list(self.right_indices),
            "left_indices": list(self.left_indices),
            "nu": self.nu,
            "mu": self.mu,
            "d": self.d,
        }


def structural_report(g) -> StructuralReport:
    g = as_rat_matrix(g)
    smf = smith_mcmillan_finite(g, transforms=False)
    inf = infinity_structure(g)
    right = minimal_basis(g, "right").indices
    left = minimal_basis(g, "left").indices
    nu = sum(int(p.degree) for p in smf.psi)
    return StructuralReport(smf, inf, right, left, nu, sum(right) + sum(left), inf.d, smf.rank)


def index_sum(g) -> int:
    """sum deg psi - sum deg eps - sum q."""
    g = as_rat_matrix(g)
    smf = smith_mcmillan_finite(g, transforms=False)
    q = infinity_structure(g).q
    return (sum(int(p.degree) for p in smf.psi) - sum(int(e.degree) for e in smf.eps) - sum(q))


# ---------------------------------------------------------------------------
# pencils presented as polynomial system matrices


def _blocks(l1: fmpq_mat, n: int):
    rows, cols = l1.nrows(), l1.ncols()

    def sub(r0, r1, c0, c1):
        m = fmpq_mat(r1 - r0, c1 - c0)
        for i in range(r0, r1):
            for j in range(c0, c1):
                m[i - r0, j - c0] = l1[i, j]
        return m

    a1, b1 = sub(0, n, 0, n), sub(0, n, n, cols)
    c1, d1 = -sub(n, rows, 0, n), sub(n, rows, n, cols)
    return a1, b1, c1, d1


def _pencil_parts(pencil):
    """(l1, l0, n) from a Pencil-like object or a (PolyMatrix, n) pair."""
    if hasattr(pencil, "l1"):
        return pencil.l1, pencil.l0, pencil.n
    p, n = pencil
    p = as_poly_matrix(p)
    return p.coeff(1), p.coeff(0), n


def detect_branch(pencil) -> str:
    """Branch of the invariant-orders lemma, from D_1 + C_1 A_1^{-1} B_1."""
    l1, l0, n = _pencil_parts(pencil)
    a1, b1, c1, d1 = _blocks(l1, n)
    if n:
        if a1.rank() < n:
            raise PreconditionError("A_1 is singular")
        t = d1 + c1 * a1.solve(b1)
    else:
        t = d1
    if any(t[i, j] != 0 for i in range(t.nrows()) for j in range(t.ncols())):
        return "B1nonzero"
    return "B1zero_npos" if n else "constant"


def predicted_pencil_orders(q: List[int], n: int, s: int, branch: str) -> List[int]:
    """Invariant orders at infinity of a strong linearization, from those of G."""
    d = -min(0, q[0]) if q else 0
    if branch == "B1nonzero":
        out = [-1] * (n + s) + [x + d - 1 for x in q]
    elif branch == "B1zero_npos":
        out = [-1] * n + [0] * s + [x + d for x in q]
    elif branch == "constant":
        out = [0] * (s + len(q))
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return sorted(out)


def invariant_orders_of_linearization(g, n: int, s: int, branch: str,
                                      report: Optional[StructuralReport] = None) -> List[int]:
    q = report.infinity.q if report is not None else infinity_structure(g).q
    return predicted_pencil_orders(q, n, s, branch)


def _nontrivial(polys) -> List:
    return sorted((p.monic() for p in polys if p.degree != 0 and not p.is_zero()),
                  key=lambda p: (p.degree, [str(c) for c in p.coeffs]))


def check_strong_linearization(pencil, g) -> Certificate:
    """Itemized check of the spectral characterization of strong linearizations."""
    g = as_rat_matrix(g)
    l1, l0, n = _pencil_parts(pencil)
    rows, cols = l1.nrows(), l1.ncols()
    p, m = g.shape
    items = {}
    s = rows - n - p
    items["shape"] = s >= 0 and cols - n - m == s
    if not items["shape"]:
        return Certificate(False, "shape", items)
    smf = smith_mcmillan_finite(g, transforms=False)
    nu = sum(int(x.degree) for x in smf.psi)
    items["order_equals_least_order"] = n == nu
    a1, b1, c1, d1 = _blocks(l1, n)
    items["a1_invertible"] = n == 0 or a1.rank() == n
    if not (items["order_equals_least_order"] and items["a1_invertible"]):
        failed = next(k for k, v in items.items() if not v)
        return Certificate(False, failed, items)
    psm = PolySystemMatrix.from_pencil(l1, l0, n)
    items["minimal_psm"] = is_minimal(psm)
    lp = PolyMatrix.pencil(l1, l0)
    r_l = rank(lp)
    items["equal_nullity"] = cols - r_l == m - smf.rank
    # finite poles of G are the finite zeros of the state block
    if n:
        a_inv = invariant_factors(psm.a)
    else:
        a_inv = []
    items["finite_poles"] = _same(_nontrivial(a_inv), _nontrivial(smf.psi))
    items["finite_zeros"] = _same(_nontrivial(invariant_factors(lp)), _nontrivial(smf.eps))
    # infinite zeros of lambda^{-1} L against lambda^{-d} G or diag(lambda^{-1} I_s, lambda^{-d-1} G)
    q_g = infinity_structure(g).q
    d = -min(0, q_g[0]) if q_g else 0
    q_l = pencil_infinity_structure(l1, l0).q
    lhs = sorted(x + 1 for x in q_l if x + 1 > 0)
    branch = detect_branch((lp, n))
    if branch == "B1nonzero":
        rhs = sorted(x + d for x in q_g if x + d > 0)
    else:
        rhs = sorted([1] * s + [x + d + 1 for x in q_g if x + d + 1 > 0])
    items["infinite_zeros"] = lhs == rhs
    failed = next((k for k, v in items.items() if not v), None)
    return Certificate(failed is None, failed, items)


def _same(a, b) -> bool:
    return len(a) == len(b) and all(x == y for x, y in zip(a, b))


def mu_relation(g, pencil) -> dict:
    """Check mu(G) against mu(L) through the three-branch identity."""
    g = as_rat_matrix(g)
    l1, l0, n = _pencil_parts(pencil)
    lp = PolyMatrix.pencil(l1, l0)
    p = g.rows
    s = l1.nrows() - n - p
    r = rank(g)
    q = infinity_structure(g).q
    d = -min(0, q[0]) if q else 0
    mu_g = sum(minimal_basis(g, "right").indices) + sum(minimal_basis(g, "left").indices)
    mu_l = sum(minimal_basis(lp, "right").indices) + sum(minimal_basis(lp, "left").indices)
    branch = detect_branch((lp, n))
    if branch == "B1nonzero":
        predicted = mu_l + d * r - (r + s)
    elif branch == "B1zero_npos":
        predicted = mu_l + d * r
    else:
        predicted = d * r
    return {"branch": branch, "mu_g": mu_g, "mu_l": mu_l, "d": d, "r": r, "s": s,
            "predicted": predicted, "ok": predicted == mu_g}


# ---------------------------------------------------------------------------
# polynomial bases through unimodular transformers


def polynomial_basis_map(u, v, g, g_hat, h, direction: str = "forward") -> PolyMatrix:
    """Map right polynomial bases between G and G_hat with U G_hat V = diag(G, I_s).

    forward: H -> V [H; 0].  converse: H_hat -> top block of V^{-1} H_hat.
    The results are polynomial bases of the null spaces; they need not be minimal.
    """
    u, v = as_poly_matrix(u), as_poly_matrix(v)
    g, g_hat = as_rat_matrix(g), as_rat_matrix(g_hat)
    h = as_poly_matrix(h)
    p, m = g.shape
    s = g_hat.cols - m
    target = RatMatrix(p + s, m + s)
    for i in range(p):
        for j in range(m):
            target.entries[i][j] = g.entries[i][j]
    for t in range(s):
        target.entries[p + t][m + t] = RatMatrix._one
    if not (u.to_rat() * g_hat * v.to_rat() == target):
        raise PreconditionError("U G_hat V != diag(G, I)")
    if direction == "forward":
        out = v * PolyMatrix.vstack(h, PolyMatrix(s, h.cols)) if s else v * h
        tgt = g_hat
    elif direction == "converse":
        w = v.to_rat().inverse()
        if not w.is_poly():
            raise PreconditionError("V is not unimodular")
        full = w.to_poly() * h
        if not full.rows_slice(m, m + s).is_zero():
            raise PreconditionError("identity block of V^{-1} H_hat is nonzero")
        out = full.rows_slice(0, m)
        tgt = g
    else:
        raise ValueError("direction must be 'forward' or 'converse'")
    if not (tgt * out.to_rat()).is_zero():
        raise PreconditionError("mapped columns are not null vectors")
    if out.cols and rank(out) != out.cols:
        raise PreconditionError("mapped columns are dependent")
    if out.cols != tgt.cols - rank(tgt):
        raise PreconditionError("mapped columns do not span the null space")
    return out
